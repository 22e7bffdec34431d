//! Field variations and the decoupled five-vector built from the Debye
//! potentials.
//!
//! A potential solution `ψ(r) ₋₂Y e^{−iωt}` produces field components with
//! two time dependences. The part multiplying `e^{−iωt}` (the minus sector)
//! depends on `ψ` algebraically; the part multiplying `e^{+iωt}` (the plus
//! sector) depends on `ψ̄` and up to four of its derivatives. On plus-sector
//! quantities `D → ∂_r + iω/χ²` and `Δ → −(χ²/2)(∂_r − iω/χ²)`, which is the
//! minus-sector substitution with `ω → −ω`.

use crate::background::{background_jets, BackgroundJets, BlackHoleParams};
use crate::error::{Error, Result};
use crate::harmonics::{swsh, ModeSpec};
use crate::opalg::entries::{build_o_ctx, EntryPerturbation, SeparatedContext};
use crate::opalg::Jet;
use crate::solver::{jet_extend, SolutionTrace};
use num_complex::Complex64;
use serde::Serialize;

type C = Complex64;

pub const DECOUPLED_NAMES: [&str; 5] = ["Psi0", "Psibar4", "sigma", "lambda", "phi"];

/// Which time dependence a radial part multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sector {
    /// `e^{+iωt}`, built from `ψ̄`.
    Plus,
    /// `e^{−iωt}`, built from `ψ`.
    Minus,
}

/// Radial parts `(Ψ₀, Ψ̄₄, σ̃, λ̃, (δ−2β)φ̃)` of the decoupled vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecoupledVector {
    pub psi0: C,
    pub psibar4: C,
    pub sigma: C,
    pub lambda: C,
    pub phi: C,
    pub sector: Sector,
}

impl DecoupledVector {
    pub fn from_array(v: [C; 5], sector: Sector) -> Self {
        DecoupledVector { psi0: v[0], psibar4: v[1], sigma: v[2], lambda: v[3], phi: v[4], sector }
    }

    pub fn to_array(&self) -> [C; 5] {
        [self.psi0, self.psibar4, self.sigma, self.lambda, self.phi]
    }
}

/// Radial factors of a real field `F = minus·Y e^{−iωt} + plus·Y' e^{iωt}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SectorPair {
    pub minus: C,
    pub plus: C,
}

/// Radial parts of the tetrad projections of `h_μν`, `b_μ` and `φ^B`.
///
/// Spin-weight-zero components (`lb`, `nb`, `llh`, `nnh`, `phi_b`) multiply
/// `Y_lm` and its conjugate; the `d2*` components multiply `₂Y_lm` and
/// `conj(₋₂Y_lm)`. The projections containing `m^μ` have only a plus part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FieldVariationRadial {
    pub lb: SectorPair,
    pub nb: SectorPair,
    pub d2lb: SectorPair,
    pub d2nb: SectorPair,
    pub mb_proj: C,
    pub llh: SectorPair,
    pub nnh: SectorPair,
    pub d2llh: SectorPair,
    pub d2nnh: SectorPair,
    pub lmh_proj: C,
    pub nmh_proj: C,
    pub mmh: C,
    pub phi_b: SectorPair,
    pub d2phi_b: SectorPair,
}

/// The potential-to-decoupled map for `e^{−iωt}` solutions, in the unit
/// normalization: `(ψ_h/R⁴, ψ_g/R⁴, −ψ_f/(2Q²ξ), ψ_e/(2Q²ξ),
/// ½[ψ_d/R⁴ + (Dφψ_e + Δφψ_f)/(Q²ξ)])`.
pub fn unit_map_jets(bg: &BackgroundJets, q: f64, psi: &[Jet; 5]) -> [Jet; 5] {
    let [g, h, e, f, d] = *psi;
    let rm4 = bg.rr.powi(4).recip();
    let qx = (q * q) * bg.xi;
    [
        h * rm4,
        g * rm4,
        -(f / (2.0 * qx)),
        e / (2.0 * qx),
        0.5 * (d * rm4 + (bg.dphi * e + bg.dltaphi * f) / qx),
    ]
}

/// Unit-normalized minus-sector vector from potential values at `r`.
pub fn decoupled_minus(psi: &[C; 5], p: &BlackHoleParams, r: f64) -> Result<DecoupledVector> {
    let bg = background_jets(p, r, 0)?;
    let jets = psi.map(|c| Jet::constant(c, 0));
    let v = unit_map_jets(&bg, p.charge(), &jets).map(|j| j.value());
    Ok(DecoupledVector::from_array(v, Sector::Minus))
}

/// Minus-sector radial parts as they appear in the reconstructed fields:
/// `L²l(l+1)/4` times the unit map.
pub fn minus_sector_jets(bg: &BackgroundJets, q: f64, mode: &ModeSpec, psi: &[Jet; 5]) -> [Jet; 5] {
    let n4 = mode.weight() / 4.0;
    unit_map_jets(bg, q, psi).map(|j| n4 * j)
}

/// Plus-sector inner radial parts, as jets two orders shorter than `psib`.
#[derive(Clone, Copy, Debug)]
pub struct PlusInner {
    /// `(½ m^μ m^ν h_μν)(r)`
    pub mmh: Jet,
    /// `[(δ−2β)(l^μ m^ν h_μν)](r)`
    pub lmh_proj: Jet,
    /// `[(δ−2β)(n^μ m^ν h_μν)](r)`
    pub nmh_proj: Jet,
    /// `[(δ−2β)(m^μ b_μ)](r)`
    pub mb_proj: Jet,
}

/// `ctx` must be built for the conjugate mode so that `ctx.d()` and
/// `ctx.delta()` are the plus-sector substitutions.
pub fn plus_inner(ctx: &SeparatedContext, psib: &[Jet; 5]) -> PlusInner {
    let b = &ctx.bg;
    let a = ctx.a;
    let q = ctx.q;
    let (d, dl) = (ctx.d(), ctx.delta());
    let [g, h, e, f, dd] = *psib;
    let (rho, mu, gam) = (b.rho, b.mu, b.gamma);
    let l2r2 = ctx.mode.l2() / (b.rr * b.rr);
    let xf8 = 8.0 * a * b.xi * b.phi1sq;

    let mmh = ((d.clone() - rho) * (d.clone() + 3.0 * rho) + b.phi00).apply(&g)
        + ((dl.clone() - 2.0 * gam + mu) * (dl.clone() - 4.0 * gam - 3.0 * mu) + b.phi22).apply(&h)
        - 2.0 * (d.clone() - rho).apply(&e)
        - 2.0 * (dl.clone() - 2.0 * gam + mu).apply(&f)
        - (b.dltaphi * d.clone() + b.dphi * dl.clone() + xf8).apply(&dd);
    let lmh_proj = l2r2 * ((-dl.clone() + 4.0 * gam + 2.0 * mu).apply(&h) + f + b.dphi * dd);
    let nmh_proj = -(l2r2 * ((d.clone() + 2.0 * rho).apply(&g) - e - b.dltaphi * dd));
    let pref = C::new(0.0, ctx.mode.l2() / (4.0 * q)) / b.xi;
    let mb_proj = pref * (d.apply(&e) + (dl - 2.0 * gam).apply(&f) + xf8 * dd);
    PlusInner { mmh, lmh_proj, nmh_proj, mb_proj }
}

/// Plus-sector decoupled vector as jets four orders shorter than `psib`.
pub fn plus_sector_jets(ctx: &SeparatedContext, psib: &[Jet; 5]) -> [Jet; 5] {
    let b = &ctx.bg;
    let inner = plus_inner(ctx, psib);
    let (d, dl) = (ctx.d(), ctx.delta());
    let (rho, mu, gam) = (b.rho, b.mu, b.gamma);
    let nw = ctx.mode.weight();
    let rm4 = b.rr.powi(4).recip();
    let qx = (ctx.q * ctx.q) * b.xi;
    let half_inv_phi1 = (2.0 * b.phi1).recip();
    let [g, h, e, f, dd] = *psib;
    let PlusInner { mmh, lmh_proj, nmh_proj, mb_proj } = inner;

    let psi0 = ((d.clone() - 2.0 * rho) * d.clone()).apply(&mmh) - (d.clone() - 2.0 * rho).apply(&lmh_proj)
        + (nw / 4.0) * h * rm4;
    let dl4 = dl.clone() + 2.0 * gam + 2.0 * mu;
    let psibar4 = (dl4.clone() * dl.clone()).apply(&mmh) - dl4.apply(&nmh_proj) + (nw / 4.0) * g * rm4;
    let sigma = d.apply(&mmh) + half_inv_phi1 * (d.clone() - 2.0 * rho).apply(&mb_proj) + (nw / 8.0) * f / qx;
    let lambda =
        -dl.apply(&mmh) - half_inv_phi1 * (dl.clone() + 2.0 * mu).apply(&mb_proj) - (nw / 8.0) * e / qx;
    let phi = -(half_inv_phi1 * (b.dltaphi * (d - 2.0 * rho) + b.dphi * (dl + 2.0 * mu)).apply(&mb_proj))
        - (nw / 8.0) * (-(dd * rm4) + (b.dphi * e + b.dltaphi * f) / qx);
    let n = [psi0, psibar4, sigma, lambda, phi].iter().map(Jet::order).min().unwrap_or(0);
    [psi0, psibar4, sigma, lambda, phi].map(|j| j.truncate(n))
}

/// Plus-sector vector at `r` from order-≥4 jets of `ψ̄`.
pub fn decoupled_plus(conj_jets: &[Jet; 5], p: &BlackHoleParams, mode: &ModeSpec, r: f64) -> Result<DecoupledVector> {
    let n = conj_jets.iter().map(Jet::order).min().unwrap_or(0);
    if n < 4 {
        return Err(Error::Invalid(format!("plus sector needs order-4 jets, got order {n}")));
    }
    let ctx = SeparatedContext::new(p, &mode.conjugate(), r, n)?;
    let v = plus_sector_jets(&ctx, conj_jets).map(|j| j.value());
    Ok(DecoupledVector::from_array(v, Sector::Plus))
}

/// All field-variation radial parts at `r`. `psi` and `conj_jets` are jets
/// (order ≥ 2) of `ψ` and `ψ̄` respectively.
pub fn fields_from_potentials(
    psi: &[Jet; 5],
    conj_jets: &[Jet; 5],
    p: &BlackHoleParams,
    mode: &ModeSpec,
    r: f64,
) -> Result<FieldVariationRadial> {
    let n = conj_jets.iter().map(Jet::order).min().unwrap_or(0);
    if n < 2 {
        return Err(Error::Invalid(format!("field variations need order-2 jets, got order {n}")));
    }
    let ctx = SeparatedContext::new(p, &mode.conjugate(), r, n)?;
    let inner = plus_inner(&ctx, conj_jets);
    let b = &ctx.bg;
    let q = p.charge();
    let xi = b.xi.value();
    let r2 = b.rr.value() * b.rr.value();
    let lsq = (mode.l2() * (mode.l * (mode.l + 1)) as f64).sqrt();
    let nw = mode.weight();
    let v = |j: &[Jet; 5], k: usize| j[k].value();
    let i = C::i();

    let kb = i * lsq / (4.0 * q * xi);
    let kd2b = i * nw / (8.0 * q * xi * r2);
    let kh = lsq / (2.0 * r2);
    let kd2h = nw / (2.0 * r2 * r2);
    let kphi = lsq / (4.0 * r2);
    let kd2phi = nw / (8.0 * r2 * r2);
    Ok(FieldVariationRadial {
        lb: SectorPair { minus: kb * v(psi, 3), plus: -kb * v(conj_jets, 3) },
        nb: SectorPair { minus: kb * v(psi, 2), plus: -kb * v(conj_jets, 2) },
        d2lb: SectorPair { minus: kd2b * v(psi, 3), plus: -kd2b * v(conj_jets, 3) },
        d2nb: SectorPair { minus: kd2b * v(psi, 2), plus: -kd2b * v(conj_jets, 2) },
        mb_proj: inner.mb_proj.value(),
        llh: SectorPair { minus: kh * v(psi, 1), plus: kh * v(conj_jets, 1) },
        nnh: SectorPair { minus: kh * v(psi, 0), plus: kh * v(conj_jets, 0) },
        d2llh: SectorPair { minus: kd2h * v(psi, 1), plus: kd2h * v(conj_jets, 1) },
        d2nnh: SectorPair { minus: kd2h * v(psi, 0), plus: kd2h * v(conj_jets, 0) },
        lmh_proj: inner.lmh_proj.value(),
        nmh_proj: inner.nmh_proj.value(),
        mmh: inner.mmh.value(),
        phi_b: SectorPair { minus: kphi * v(psi, 4), plus: kphi * v(conj_jets, 4) },
        d2phi_b: SectorPair { minus: kd2phi * v(psi, 4), plus: kd2phi * v(conj_jets, 4) },
    })
}

/// Reassemble the spin-weight-zero fields at `(t, θ, φ)` and return the
/// largest ratio `|Im F| / |F|` among them.
pub fn reality_defect(fv: &FieldVariationRadial, mode: &ModeSpec, t: f64, theta: f64, varphi: f64) -> Result<f64> {
    let y = swsh(0, mode.l, mode.m, theta, varphi)?;
    let ph = C::from_polar(1.0, -mode.omega * t);
    let mut worst: f64 = 0.0;
    for sp in [fv.lb, fv.nb, fv.llh, fv.nnh, fv.phi_b] {
        let field = sp.minus * y * ph + sp.plus * y.conj() * ph.conj();
        if field.norm() > 0.0 {
            worst = worst.max(field.im.abs() / field.norm());
        }
    }
    Ok(worst)
}

/// Relations among the minus-sector components and the potentials,
/// returned as relative residuals:
/// `ψ_gΨ₀ − ψ_hΨ̄₄`, `ψ_eσ̃ + ψ_fλ̃` and
/// `Δφψ_dσ̃ − Dφψ_dλ̃ + ψ_dφ̃ − L²l(l+1)ψ_d²/(8R⁴)`.
pub fn verify_algebraic_relations(psi: &[C; 5], p: &BlackHoleParams, mode: &ModeSpec, r: f64) -> Result<[f64; 3]> {
    let bg = background_jets(p, r, 0)?;
    let jets = psi.map(|c| Jet::constant(c, 0));
    let m = minus_sector_jets(&bg, p.charge(), mode, &jets).map(|j| j.value());
    let [g, h, e, f, d] = *psi;
    let (dp, dl) = (bg.dphi.value(), bg.dltaphi.value());
    let r4 = bg.rr.value().powi(4);
    let rel = |terms: &[C]| {
        let s: C = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            s.norm() / scale
        } else {
            0.0
        }
    };
    Ok([
        rel(&[g * m[0], -h * m[1]]),
        rel(&[e * m[2], f * m[3]]),
        rel(&[dl * d * m[2], -dp * d * m[3], d * m[4], -mode.weight() * d * d / (8.0 * r4)]),
    ])
}

/// Per-row residuals of a decoupled-system check.
#[derive(Clone, Debug, Serialize)]
pub struct DecoupledResidual {
    pub rows: [f64; 5],
    pub worst_r: f64,
}

impl DecoupledResidual {
    pub fn max(&self) -> f64 {
        self.rows.iter().copied().fold(0.0, f64::max)
    }
}

fn row_residuals(ctx: &SeparatedContext, v: &[Jet; 5], probe: Option<&EntryPerturbation>) -> [f64; 5] {
    let o = build_o_ctx(ctx, probe);
    let rows = o.apply(v);
    let terms = o.apply_terms(v);
    std::array::from_fn(|k| {
        let scale = terms[k].iter().copied().fold(0.0, f64::max);
        if scale > 0.0 {
            rows[k].value().norm() / scale
        } else {
            0.0
        }
    })
}

/// Apply the separated `O` to the minus-sector image of the trace and
/// report the worst relative residual per row.
pub fn verify_decoupled(trace: &SolutionTrace, radii: &[f64]) -> Result<DecoupledResidual> {
    verify_decoupled_with(trace, radii, None)
}

pub fn verify_decoupled_with(
    trace: &SolutionTrace,
    radii: &[f64],
    probe: Option<&EntryPerturbation>,
) -> Result<DecoupledResidual> {
    let mut out = DecoupledResidual { rows: [0.0; 5], worst_r: f64::NAN };
    for &r in radii {
        let psi = jet_extend(trace, r, 4)?;
        let ctx = SeparatedContext::new(&trace.params, &trace.mode, r, 6)?;
        let v = unit_map_jets(&ctx.bg, trace.params.charge(), &psi);
        let res = row_residuals(&ctx, &v, probe);
        if res.iter().copied().fold(0.0, f64::max) >= out.max() {
            out.worst_r = r;
        }
        for k in 0..5 {
            out.rows[k] = out.rows[k].max(res[k]);
        }
    }
    Ok(out)
}

/// Apply `O` with `ω → −ω` to the plus-sector vector built from the
/// conjugate trace. A diagnostic for the plus-sector formulas.
pub fn verify_decoupled_plus(trace: &SolutionTrace, radii: &[f64]) -> Result<DecoupledResidual> {
    let conj = trace.conjugate();
    let mut out = DecoupledResidual { rows: [0.0; 5], worst_r: f64::NAN };
    for &r in radii {
        let psib = jet_extend(&conj, r, 6)?;
        let ctx = SeparatedContext::new(&trace.params, &trace.mode.conjugate(), r, 8)?;
        let v = plus_sector_jets(&ctx, &psib);
        let res = row_residuals(&ctx, &v, None);
        if res.iter().copied().fold(0.0, f64::max) >= out.max() {
            out.worst_r = r;
        }
        for k in 0..5 {
            out.rows[k] = out.rows[k].max(res[k]);
        }
    }
    Ok(out)
}

/// Ratios of the plus-sector vector to the unit map of `ψ̄`, per component,
/// with their spread over the sampled radii.
#[derive(Clone, Debug, Serialize)]
pub struct ProportionalityReport {
    pub radii: Vec<f64>,
    /// `ratios[k][i]` for component `k` at `radii[i]`; `None` where the
    /// denominator vanishes.
    pub ratios: [Vec<Option<C>>; 5],
    /// `max |ratio − mean| / |mean|` per component, `None` if undefined.
    pub spread: [Option<f64>; 5],
}

pub fn proportionality_diagnostic(trace: &SolutionTrace, radii: &[f64]) -> Result<ProportionalityReport> {
    let conj = trace.conjugate();
    let mut ratios: [Vec<Option<C>>; 5] = Default::default();
    for &r in radii {
        let psib = jet_extend(&conj, r, 4)?;
        let plus = decoupled_plus(&psib, &trace.params, &trace.mode, r)?.to_array();
        let vals = psib.map(|j| j.value());
        let bar = decoupled_minus(&vals, &trace.params, r)?.to_array();
        for k in 0..5 {
            ratios[k].push(if bar[k].norm() > 0.0 && plus[k].norm() > 0.0 { Some(plus[k] / bar[k]) } else { None });
        }
    }
    let spread = std::array::from_fn(|k| {
        let vals: Vec<C> = ratios[k].iter().flatten().copied().collect();
        if vals.is_empty() || vals.len() < ratios[k].len() {
            return None;
        }
        let mean: C = vals.iter().sum::<C>() / vals.len() as f64;
        if mean.norm() == 0.0 {
            return None;
        }
        Some(vals.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max) / mean.norm())
    });
    Ok(ProportionalityReport { radii: radii.to_vec(), ratios, spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::params_from_horizons;

    fn p211() -> BlackHoleParams {
        params_from_horizons(2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn unit_map_examples() {
        let p = p211();
        let z = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        let v = decoupled_minus(&[z, z, z, z, one], &p, 4.0).unwrap();
        assert!((v.phi - 1.0 / 288.0).norm() < 1e-15);
        assert_eq!(v.psi0, z);
        let v = decoupled_minus(&[one, z, z, z, z], &p, 4.0).unwrap();
        assert!((v.psibar4 - 1.0 / 144.0).norm() < 1e-15);
        assert_eq!(v.psi0, z);
        assert_eq!(v.phi, z);
    }

    #[test]
    fn d2lb_prefactor() {
        let p = p211();
        let mode = ModeSpec::new(2, 0, 0.3).unwrap();
        let one = [Jet::constant(1.0, 2); 5];
        let fv = fields_from_potentials(&one, &one, &p, &mode, 4.0).unwrap();
        assert!((fv.d2lb.minus - C::new(0.0, -1.0 / 3.0)).norm() < 1e-14);
        assert!((fv.d2lb.plus - C::new(0.0, 1.0 / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn plus_sector_h_term() {
        // Only ψ̄_h = 1 with vanishing derivatives; the algebraic term of Ψ₀⁺ is 1/24.
        let p = p211();
        let mode = ModeSpec::new(2, 0, 0.3).unwrap();
        let ctx = SeparatedContext::new(&p, &mode.conjugate(), 4.0, 6).unwrap();
        let mut psib = [Jet::zero(4); 5];
        psib[1] = Jet::constant(1.0, 4);
        let rm4 = ctx.bg.rr.powi(4).recip().value();
        assert!((mode.weight() / 4.0 * rm4 - 1.0 / 24.0).norm() < 1e-15);
        let full = plus_sector_jets(&ctx, &psib)[0].value();
        let inner = plus_inner(&ctx, &psib);
        let rest = ((ctx.d() - 2.0 * ctx.bg.rho) * ctx.d()).apply(&inner.mmh).value()
            - (ctx.d() - 2.0 * ctx.bg.rho).apply(&inner.lmh_proj).value();
        assert!((full - rest - 1.0 / 24.0).norm() < 1e-14);
    }

    #[test]
    fn zero_potentials_give_zero_fields() {
        let p = p211();
        let mode = ModeSpec::new(3, 1, 0.3).unwrap();
        let z = [Jet::zero(4); 5];
        let v = decoupled_plus(&z, &p, &mode, 5.0).unwrap();
        assert!(v.to_array().iter().all(|c| c.norm() == 0.0));
        let fv = fields_from_potentials(&z, &z, &p, &mode, 5.0).unwrap();
        assert_eq!(fv, FieldVariationRadial::default());
    }

    #[test]
    fn algebraic_relations_symmetric_case_is_exact() {
        let p = p211();
        let mode = ModeSpec::new(2, 0, 0.3).unwrap();
        let one = C::new(1.0, 0.0);
        let z = C::new(0.0, 0.0);
        let r = verify_algebraic_relations(&[one, one, z, z, z], &p, &mode, 4.0).unwrap();
        assert_eq!(r[0], 0.0);
    }
}
