//! Static GHS dilaton black hole in Newman–Penrose form.
//!
//! Line element `ds² = χ²dt² − χ⁻²dr² − R²dΩ²` with
//! `χ² = (1−r₊/r)(1−r₋/r)^((1−a²)/(1+a²))`, `R = r(1−r₋/r)^(a²/(1+a²))`,
//! dilaton `φ = −a/(1+a²) ln(1−r₋/r)` and magnetic Maxwell scalar
//! `φ₁ = iQ/(2R²)`.

use crate::error::{Error, Result};
use crate::opalg::Jet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackHoleParams {
    r_plus: f64,
    r_minus: f64,
    a: f64,
    q: f64,
    m: f64,
}

/// Build the parameter set from the two horizons and the coupling.
pub fn params_from_horizons(r_plus: f64, r_minus: f64, a: f64) -> Result<BlackHoleParams> {
    if !(r_minus > 0.0) {
        return Err(Error::DegenerateCharge(r_minus));
    }
    if !(r_minus < r_plus) {
        return Err(Error::HorizonOrder { r_plus, r_minus });
    }
    if !(a >= 0.0) {
        return Err(Error::NegativeCoupling(a));
    }
    let a2 = a * a;
    let q = (r_plus * r_minus / (1.0 + a2)).sqrt();
    let m = 0.5 * (r_plus + r_minus * (1.0 - a2) / (1.0 + a2));
    Ok(BlackHoleParams { r_plus, r_minus, a, q, m })
}

impl BlackHoleParams {
    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }
    pub fn r_minus(&self) -> f64 {
        self.r_minus
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn charge(&self) -> f64 {
        self.q
    }
    pub fn mass(&self) -> f64 {
        self.m
    }

    /// Same horizons and coupling with the charge replaced. The result is no
    /// longer a solution; used to probe the sensitivity of the residuals.
    pub fn with_charge(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        if r > self.r_plus && r.is_finite() {
            Ok(())
        } else {
            Err(Error::HorizonDomain { r, r_plus: self.r_plus })
        }
    }
}

/// Background quantities at a radius, all as jets in `r`.
///
/// Every field is real-valued except `phi1`, which is purely imaginary.
#[derive(Clone, Copy, Debug)]
pub struct BackgroundJets {
    pub r: Jet,
    pub chi2: Jet,
    pub rr: Jet,
    pub phi: Jet,
    pub xi: Jet,
    pub phi1: Jet,
    pub phi1sq: Jet,
    pub dphi: Jet,
    pub dltaphi: Jet,
    pub rho: Jet,
    pub mu: Jet,
    pub gamma: Jet,
    pub psi2: Jet,
    pub phi00: Jet,
    pub phi11: Jet,
    pub phi22: Jet,
    pub lam: Jet,
    pub f1: Jet,
    pub f2: Jet,
    /// `a ξ φ₁² / Dφ` through the closed form of `a/Dφ`; finite at `a = 0`.
    pub axi_over_dphi: Jet,
}

/// Evaluate all background jets to the given order at `r`.
pub fn background_jets(p: &BlackHoleParams, r: f64, order: usize) -> Result<BackgroundJets> {
    p.check_radius(r)?;
    // The deepest quantities (ρ, γ, Dφ) each consume one derivative.
    let n = order + 1;
    let a = p.a;
    let a2 = a * a;
    let x = Jet::variable(r, n);
    let u = 1.0 - p.r_minus / x;
    let chi2_n = (1.0 - p.r_plus / x) * u.powf((1.0 - a2) / (1.0 + a2));
    let rr = x * u.powf(a2 / (1.0 + a2));
    let phi = u.ln() * (-a / (1.0 + a2));
    let xi = -u.powf(2.0 * a2 / (1.0 + a2));
    let rr2 = rr * rr;
    let phi1 = Complex64::new(0.0, p.q / 2.0) / rr2;
    let phi1sq = phi1 * phi1;

    let dphi = phi.diff();
    let chi2 = chi2_n.truncate(order);
    let rho = -(rr.diff() / rr.truncate(order));
    let rr = rr.truncate(order);
    let gamma = chi2_n.diff() * 0.25;
    let phi = phi.truncate(order);
    let xi = xi.truncate(order);
    let phi1 = phi1.truncate(order);
    let phi1sq = phi1sq.truncate(order);

    let dltaphi = -0.5 * chi2 * dphi;
    let mu = 0.5 * chi2 * rho;
    let psi2 = 2.0 * gamma * rho - (2.0 / 3.0) * dphi * dltaphi;
    let phi00 = -(dphi * dphi);
    let phi22 = -(dltaphi * dltaphi);
    let phi11 = -0.5 * dphi * dltaphi - 2.0 * xi * phi1sq;
    let lam = -(dphi * dltaphi) / 6.0;
    let axiphi = a * xi * phi1sq;
    let f1 = 8.0 * (gamma * dphi + axiphi) / chi2;
    let f2 = 2.0 * (mu * dphi + axiphi);
    let xr = x.truncate(order);
    let a_over_dphi = -(1.0 + a2) * xr * (xr - p.r_minus) / p.r_minus;
    let axi_over_dphi = a_over_dphi * xi * phi1sq;

    Ok(BackgroundJets {
        r: xr,
        chi2,
        rr,
        phi,
        xi,
        phi1,
        phi1sq,
        dphi,
        dltaphi,
        rho,
        mu,
        gamma,
        psi2,
        phi00,
        phi11,
        phi22,
        lam,
        f1,
        f2,
        axi_over_dphi,
    })
}

/// Background scalars at a radius, with the first three derivatives of
/// `χ²`, `R` and `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Background {
    pub r: f64,
    pub chi2: f64,
    pub rr: f64,
    pub phi: f64,
    pub xi: f64,
    pub phi1: Complex64,
    pub dphi: f64,
    pub dltaphi: f64,
    pub rho: f64,
    pub mu: f64,
    pub gamma: f64,
    pub psi2: f64,
    pub phi00: f64,
    pub phi11: f64,
    pub phi22: f64,
    pub lam: f64,
    pub f1: f64,
    pub f2: f64,
    pub chi2_jet: [f64; 4],
    pub rr_jet: [f64; 4],
    pub phi_jet: [f64; 4],
}

pub fn eval_background(p: &BlackHoleParams, r: f64) -> Result<Background> {
    let j = background_jets(p, r, 3)?;
    let d3 = |f: &Jet| [0, 1, 2, 3].map(|k| f.derivative(k).re);
    Ok(Background {
        r,
        chi2: j.chi2.re(),
        rr: j.rr.re(),
        phi: j.phi.re(),
        xi: j.xi.re(),
        phi1: j.phi1.value(),
        dphi: j.dphi.re(),
        dltaphi: j.dltaphi.re(),
        rho: j.rho.re(),
        mu: j.mu.re(),
        gamma: j.gamma.re(),
        psi2: j.psi2.re(),
        phi00: j.phi00.re(),
        phi11: j.phi11.re(),
        phi22: j.phi22.re(),
        lam: j.lam.re(),
        f1: j.f1.re(),
        f2: j.f2.re(),
        chi2_jet: d3(&j.chi2),
        rr_jet: d3(&j.rr),
        phi_jet: d3(&j.phi),
    })
}

/// Residuals of the background Maxwell and dilaton equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BackgroundResiduals {
    /// `(D − 2ρ)φ₁`
    pub maxwell_d: Complex64,
    /// `(Δ + 2μ)φ₁`
    pub maxwell_delta: Complex64,
    /// `DΔφ + 2μDφ − 2aξφ₁²`
    pub dilaton: f64,
    /// Largest individual term in each residual, for relative comparisons.
    pub scale: [f64; 3],
}

impl BackgroundResiduals {
    pub fn max_relative(&self) -> f64 {
        let rel = |v: f64, s: f64| if s > 0.0 { v / s } else { v };
        rel(self.maxwell_d.norm(), self.scale[0])
            .max(rel(self.maxwell_delta.norm(), self.scale[1]))
            .max(rel(self.dilaton.abs(), self.scale[2]))
    }
}

pub fn background_residuals(p: &BlackHoleParams, r: f64) -> Result<BackgroundResiduals> {
    let j = background_jets(p, r, 2)?;
    let dphi1 = j.phi1.diff().value();
    let phi1 = j.phi1.value();
    let t_d = [dphi1, -2.0 * j.rho.value() * phi1];
    let t_delta = [-0.5 * j.chi2.value() * dphi1, 2.0 * j.mu.value() * phi1];
    let t_dil = [
        j.dltaphi.diff().re(),
        2.0 * j.mu.re() * j.dphi.re(),
        -2.0 * p.a * (j.xi * j.phi1sq).re(),
    ];
    Ok(BackgroundResiduals {
        maxwell_d: t_d[0] + t_d[1],
        maxwell_delta: t_delta[0] + t_delta[1],
        dilaton: t_dil.iter().sum(),
        scale: [
            t_d.iter().map(|c| c.norm()).fold(0.0, f64::max),
            t_delta.iter().map(|c| c.norm()).fold(0.0, f64::max),
            t_dil.iter().map(|c| c.abs()).fold(0.0, f64::max),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charge_and_mass_examples() {
        let p = params_from_horizons(2.0, 1.0, 1.0).unwrap();
        assert!((p.charge() - 1.0).abs() < 1e-15);
        assert!((p.mass() - 1.0).abs() < 1e-15);
        let p = params_from_horizons(3.0, 1.0, 0.0).unwrap();
        assert!((p.charge() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(params_from_horizons(2.0, 2.0, 1.0), Err(Error::HorizonOrder { .. })));
        assert!(matches!(params_from_horizons(2.0, 0.0, 1.0), Err(Error::DegenerateCharge(_))));
        assert!(matches!(params_from_horizons(2.0, 1.0, -0.1), Err(Error::NegativeCoupling(_))));
        let p = params_from_horizons(2.0, 1.0, 1.0).unwrap();
        assert!(matches!(eval_background(&p, 2.0), Err(Error::HorizonDomain { .. })));
    }

    #[test]
    fn worked_values_at_r4() {
        let p = params_from_horizons(2.0, 1.0, 1.0).unwrap();
        let b = eval_background(&p, 4.0).unwrap();
        assert!((b.chi2 - 0.5).abs() < 1e-15);
        assert!((b.rr - 12f64.sqrt()).abs() < 1e-14);
        assert!((b.rho + 7.0 / 24.0).abs() < 1e-15);
        assert!((b.mu + 7.0 / 96.0).abs() < 1e-15);
        assert!((b.xi + 0.75).abs() < 1e-15);
    }

    #[test]
    fn a_zero_dilaton_is_trivial() {
        let p = params_from_horizons(3.0, 1.0, 0.0).unwrap();
        let res = background_residuals(&p, 5.0).unwrap();
        assert_eq!(res.dilaton, 0.0);
        let j = background_jets(&p, 5.0, 2).unwrap();
        assert_eq!(j.dphi.value().norm(), 0.0);
        assert!(j.axi_over_dphi.value().norm() > 0.0);
    }
}
