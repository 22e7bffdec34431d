//! Spin-weighted spherical harmonics and the edth ladder.
//!
//! Convention: `sYlm(θ,φ) = sqrt((2l+1)/4π) d^l_{m,−s}(θ) e^{imφ}` with the
//! Wigner small-d matrix in its standard sum form. With the edth operators
//! `ð = sinˢθ (∂_θ + i cscθ ∂_φ) sin⁻ˢθ` and
//! `ð' = sin⁻ˢθ (∂_θ − i cscθ ∂_φ) sinˢθ` (the `1/(√2R)` factor stripped),
//! `ð sYlm = +[(l−s)(l+s+1)]^{1/2} s+1Ylm` and
//! `ð' sYlm = −[(l+s)(l−s+1)]^{1/2} s−1Ylm`.

use crate::background::BlackHoleParams;
use crate::error::{Error, Result};
use crate::opalg::Jet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub l: u32,
    pub m: i32,
    pub omega: f64,
}

impl ModeSpec {
    pub fn new(l: u32, m: i32, omega: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::IndexRange(format!("l = {l} < 2")));
        }
        if m.unsigned_abs() > l {
            return Err(Error::IndexRange(format!("|m| = {} > l = {l}", m.abs())));
        }
        if !omega.is_finite() {
            return Err(Error::Invalid(format!("omega = {omega}")));
        }
        Ok(ModeSpec { l, m, omega })
    }

    /// `L² = (l−1)(l+2)`.
    pub fn l2(&self) -> f64 {
        angular_eigenvalue(self.l).expect("l validated at construction")
    }

    /// `L² l(l+1)`, the weight that recurs in every reconstructed component.
    pub fn weight(&self) -> f64 {
        let l = self.l as f64;
        self.l2() * l * (l + 1.0)
    }

    /// The same mode at `−ω`; its solutions are the conjugates of this one's.
    pub fn conjugate(&self) -> Self {
        ModeSpec { omega: -self.omega, ..*self }
    }
}

pub fn angular_eigenvalue(l: u32) -> Result<f64> {
    if l < 2 {
        return Err(Error::IndexRange(format!("l = {l} < 2")));
    }
    let l = l as f64;
    Ok((l - 1.0) * (l + 2.0))
}

fn check_indices(s: i32, l: u32, m: i32) -> Result<()> {
    if s.unsigned_abs() > l || m.unsigned_abs() > l {
        return Err(Error::IndexRange(format!("s = {s}, l = {l}, m = {m}")));
    }
    Ok(())
}

fn ln_fact(n: i64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner small-d matrix element `d^j_{m'm}(β)` for integer `j`.
pub fn wigner_d(j: i32, mp: i32, m: i32, beta: f64) -> f64 {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pre = 0.5
        * (ln_fact((j + mp) as i64) + ln_fact((j - mp) as i64) + ln_fact((j + m) as i64) + ln_fact((j - m) as i64));
    let kmin = 0.max(m - mp);
    let kmax = (j + m).min(j - mp);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = ln_fact((j + m - k) as i64) + ln_fact(k as i64) + ln_fact((mp - m + k) as i64) + ln_fact((j - mp - k) as i64);
        let sign = if (mp - m + k) % 2 == 0 { 1.0 } else { -1.0 };
        let pc = (2 * j + m - mp - 2 * k) as i32;
        let ps = (mp - m + 2 * k) as i32;
        sum += sign * (pre - den).exp() * c.powi(pc) * s.powi(ps);
    }
    sum
}

pub fn swsh(s: i32, l: u32, m: i32, theta: f64, varphi: f64) -> Result<Complex64> {
    check_indices(s, l, m)?;
    let norm = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
    let d = wigner_d(l as i32, m, -s, theta);
    Ok(Complex64::from_polar(norm * d, m as f64 * varphi))
}

pub fn edth_raise_coeff(s: i32, l: u32) -> Result<f64> {
    check_indices(s, l, 0)?;
    let (l, s) = (l as f64, s as f64);
    Ok(((l - s) * (l + s + 1.0)).sqrt())
}

pub fn edth_lower_coeff(s: i32, l: u32) -> Result<f64> {
    check_indices(s, l, 0)?;
    let (l, s) = (l as f64, s as f64);
    Ok(-((l + s) * (l - s + 1.0)).sqrt())
}

/// Fourth-order central difference in θ.
fn d_theta(f: impl Fn(f64) -> Complex64, th: f64, h: f64) -> Complex64 {
    (f(th - 2.0 * h) - 8.0 * f(th - h) + 8.0 * f(th + h) - f(th + 2.0 * h)) / (12.0 * h)
}

/// `ð` (without the `1/(√2R)` factor) applied to `sYlm` by finite differences.
fn edth_numeric(s: i32, l: u32, m: i32, th: f64, h: f64) -> Complex64 {
    let f = |t: f64| swsh(s, l, m, t, 0.0).unwrap() * t.sin().powi(-s);
    // ∂_φ → im, so i cscθ ∂_φ → −m cscθ
    th.sin().powi(s) * (d_theta(f, th, h) - f(th) * (m as f64) / th.sin())
}

fn edth_prime_numeric(s: i32, l: u32, m: i32, th: f64, h: f64) -> Complex64 {
    let f = |t: f64| swsh(s, l, m, t, 0.0).unwrap() * t.sin().powi(s);
    let y = f(th);
    // ∂_φ → im, so −i cscθ ∂_φ → m cscθ
    th.sin().powi(-s) * (d_theta(f, th, h) + y * (m as f64) / th.sin())
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `∫ conj(sY_{l'm'}) sY_{lm} dΩ` by Gauss–Legendre in cos θ and a uniform
/// rule in φ.
pub fn inner_product(s: i32, l1: u32, m1: i32, l2: u32, m2: i32, n_theta: usize) -> Result<Complex64> {
    check_indices(s, l1, m1)?;
    check_indices(s, l2, m2)?;
    let (x, w) = gauss_legendre(n_theta);
    let n_phi = 2 * (l1 + l2) as usize + 4;
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let th = xi.acos();
        for k in 0..n_phi {
            let ph = 2.0 * PI * k as f64 / n_phi as f64;
            acc += swsh(s, l1, m1, th, ph)?.conj() * swsh(s, l2, m2, th, ph)? * *wi * (2.0 * PI / n_phi as f64);
        }
    }
    Ok(acc)
}

/// Apply both edth operators to `sYlm` numerically on `grid_size` interior
/// colatitudes and compare with the ladder coefficients. Returns the largest
/// absolute deviation.
pub fn ladder_numeric_check(s: i32, l: u32, m: i32, grid_size: usize) -> Result<f64> {
    if s.unsigned_abs() + 1 > l {
        return Err(Error::IndexRange(format!("|s| = {} must be ≤ l − 1 = {}", s.abs(), l as i64 - 1)));
    }
    check_indices(s, l, m)?;
    let up = edth_raise_coeff(s, l)?;
    let down = edth_lower_coeff(s, l)?;
    let mut worst: f64 = 0.0;
    for i in 0..grid_size {
        let th = PI * (i as f64 + 0.5) / grid_size as f64;
        if th < 0.05 || th > PI - 0.05 {
            continue;
        }
        // sin^{±s} factors vary on the scale of the distance to the pole
        let h = 1e-3 * (2.0 * th.min(PI - th)).min(1.0);
        let raised = edth_numeric(s, l, m, th, h) - up * swsh(s + 1, l, m, th, 0.0)?;
        let lowered = edth_prime_numeric(s, l, m, th, h) - down * swsh(s - 1, l, m, th, 0.0)?;
        worst = worst.max(raised.norm()).max(lowered.norm());
    }
    Ok(worst)
}

/// `(δ̄ − 2β̄)(δ + 4β)` on a spin −2 harmonic, in units of `1/(2R²)`, computed
/// by two numeric edth steps; the exact value is `−L²`.
pub fn composite_eigenvalue_numeric(l: u32, m: i32, theta: f64) -> Result<Complex64> {
    check_indices(-2, l, m)?;
    let h = 1e-3;
    let g = |t: f64| edth_numeric(-2, l, m, t, h);
    // ð' on the spin −1 function g
    let f = |t: f64| g(t) * t.sin().powi(-1);
    let val = theta.sin().powi(1) * (d_theta(f, theta, h) + f(theta) * (m as f64) / theta.sin());
    Ok(val / swsh(-2, l, m, theta, 0.0)?)
}

/// `(δ − 2β)(δ̄ + 4β̄)` on a spin +2 harmonic, in units of `1/(2R²)`.
pub fn composite_eigenvalue_spin2_numeric(l: u32, m: i32, theta: f64) -> Result<Complex64> {
    check_indices(2, l, m)?;
    let h = 1e-3;
    let g = |t: f64| edth_prime_numeric(2, l, m, t, h);
    // ð on the spin +1 function g
    let f = |t: f64| g(t) * t.sin().powi(-1);
    let val = theta.sin() * (d_theta(f, theta, h) - f(theta) * (m as f64) / theta.sin());
    Ok(val / swsh(2, l, m, theta, 0.0)?)
}

/// Radial test function for the commutation check.
#[derive(Clone, Copy, Debug)]
pub enum RadialTestFn {
    Zero,
    One,
    /// `exp(−r/r₊)`
    DecayingExp,
}

impl RadialTestFn {
    fn jet(&self, r: f64, r_plus: f64, order: usize) -> Jet {
        match self {
            RadialTestFn::Zero => Jet::zero(order),
            RadialTestFn::One => Jet::constant(1.0, order),
            RadialTestFn::DecayingExp => (Jet::variable(r, order) * (-1.0 / r_plus)).exp(),
        }
    }
}

/// Check `(D + pρ)(δ + qβ) = (δ + qβ)[D + (p+1)ρ]` and
/// `(Δ + pγ + p'μ)(δ + qβ) = (δ + qβ)[Δ + pγ + (p'−1)μ]` on `f(r) sYlm` for a
/// static field. Returns the largest relative residual over the samples.
#[allow(clippy::too_many_arguments)]
pub fn commutation_check(
    bh: &BlackHoleParams,
    p: f64,
    q: f64,
    pprime: f64,
    f: RadialTestFn,
    s: i32,
    l: u32,
    m: i32,
    samples: usize,
) -> Result<f64> {
    check_indices(s, l, m)?;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let t = (i as f64 + 0.5) / samples as f64;
        let r = bh.r_plus() * (1.05 + 15.0 * t);
        let th = 0.2 + 2.7 * t;
        let bg = crate::background::background_jets(bh, r, 2)?;
        let fj = f.jet(r, bh.r_plus(), 2);
        // Angular factor of (δ + qβ) Y, with 1/(√2 R) separated out.
        let y = |t: f64| swsh(s, l, m, t, 0.3).unwrap();
        // ∂_φ → im, so i cscθ ∂_φ → −m cscθ; β = cotθ/(2√2R)
        let ang = d_theta(y, th, h) - (m as f64) / th.sin() * y(th) + 0.5 * q * th.cos() / th.sin() * y(th);
        let inv_r = bg.rr.recip();
        let (rho, mu, gam, chi2) = (bg.rho.value(), bg.mu.value(), bg.gamma.value(), bg.chi2.value());
        let g = fj * inv_r;
        // D on static fields is ∂_r, Δ is −(χ²/2)∂_r.
        let lhs1 = (g.derivative(1) + p * rho * g.value()) * ang;
        let rhs1 = inv_r.value() * (fj.derivative(1) + (p + 1.0) * rho * fj.value()) * ang;
        let lhs2 = (-0.5 * chi2 * g.derivative(1) + (p * gam + pprime * mu) * g.value()) * ang;
        let rhs2 = inv_r.value() * (-0.5 * chi2 * fj.derivative(1) + (p * gam + (pprime - 1.0) * mu) * fj.value()) * ang;
        for (a, b) in [(lhs1, rhs1), (lhs2, rhs2)] {
            let scale = a.norm().max(b.norm());
            if scale > 0.0 {
                worst = worst.max((a - b).norm() / scale);
            }
        }
    }
    Ok(worst)
}
