//! Executable form of the differential identities relating `O` and `O†`.
//!
//! Each identity is an equality of radial operators acting on one function;
//! both sides are applied to random polynomial jets at random radii.

use super::entries::{build_o_ctx, build_o_dagger_ctx, EntryPerturbation, OperatorMatrix, SeparatedContext, DEFAULT_DEPTH};
use super::jet::Jet;
use crate::background::BlackHoleParams;
use crate::error::{Error, Result};
use crate::harmonics::ModeSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Floor in the relative residual denominator.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// Number of identities checked.
pub const IDENTITY_COUNT: usize = 15;

pub const IDENTITY_NAMES: [&str; IDENTITY_COUNT] = [
    "R4 O11 R-4 = O†22",
    "(O13 - F1 Dltaphi) / (8 xi phi1^2) = O†42",
    "R4 O22 R-4 = O†11",
    "-(O24 + chi4 F1 Dphi / 4) / (8 xi phi1^2) = O†31",
    "2 Q2 xi O31 R-4 = O†24 + chi4 F1 Dphi / 4",
    "-a F1 / 2 = O†34 + Dphi O†35",
    "xi (O33 - O35 Dltaphi) xi-1 = -(O†44 + Dphi O†45)",
    "Q2 xi O35 R-4 = O†54 + Dphi O†55",
    "-2 Q2 xi O42 R-4 = O†13 - F1 Dltaphi",
    "a chi4 F1 / 8 = O†43 - Dltaphi O†45",
    "xi (O44 + O45 Dphi) xi-1 = -(O†33 - Dltaphi O†35)",
    "-Q2 xi O45 R-4 = O†53 - Dltaphi O†55",
    "R4 O55 R-4 = O†55",
    "(O54 + O55 Dphi) / (4 xi phi1^2) = -O†35",
    "(O53 - O55 Dltaphi) / (4 xi phi1^2) = O†45",
];

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub max_residual: f64,
    /// Radius of the worst trial.
    pub worst_r: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub results: Vec<IdentityResult>,
    pub trials: usize,
    pub seed: u64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.results.iter().map(|r| r.max_residual).fold(0.0, f64::max)
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.results.iter().all(|r| r.max_residual < tol)
    }
}

/// Both sides of one identity, kept as lists of their additive terms so the
/// residual can be scaled by the largest term.
#[derive(Clone, Debug)]
pub struct IdentitySides {
    pub lhs: Vec<Jet>,
    pub rhs: Vec<Jet>,
}

impl IdentitySides {
    fn new(lhs: Vec<Jet>, rhs: Vec<Jet>) -> Self {
        let n = lhs.iter().chain(&rhs).map(Jet::order).min().unwrap_or(0);
        let cut = |v: Vec<Jet>| v.into_iter().map(|j| j.truncate(n)).collect();
        IdentitySides { lhs: cut(lhs), rhs: cut(rhs) }
    }

    fn total(v: &[Jet]) -> Jet {
        v.iter().skip(1).fold(v[0], |acc, j| acc + *j)
    }

    /// `|L − R| / max(|L|, |R|, largest term, ε)` over all jet coefficients.
    pub fn relative_residual(&self) -> f64 {
        let (l, r) = (Self::total(&self.lhs), Self::total(&self.rhs));
        let terms = self.lhs.iter().chain(&self.rhs).map(Jet::max_abs).fold(0.0, f64::max);
        let scale = l.max_abs().max(r.max_abs()).max(terms).max(RESIDUAL_FLOOR);
        (l - r).max_abs() / scale
    }
}

/// Both sides of every identity applied to `g` at the context radius.
pub fn identity_sides(ctx: &SeparatedContext, o: &OperatorMatrix, od: &OperatorMatrix, g: &Jet) -> Vec<IdentitySides> {
    let b = &ctx.bg;
    let (a, q2) = (ctx.a, ctx.q * ctx.q);
    let r4 = b.rr.powi(4);
    let gx = *g / b.xi;
    let gr = r4.recip() * *g;
    let chi4 = b.chi2 * b.chi2;
    let ap = |m: &OperatorMatrix, i: usize, j: usize, f: &Jet| m.label(i, j).apply(f);
    let (f1, dp, dl) = (b.f1, b.dphi, b.dltaphi);
    let e8 = (8.0 * b.phi1sq).recip();
    let e4 = (4.0 * b.phi1sq).recip();
    let qx = q2 * b.xi;
    let sides = IdentitySides::new;

    vec![
        sides(vec![r4 * ap(o, 1, 1, &gr)], vec![ap(od, 2, 2, g)]),
        sides(vec![e8 * ap(o, 1, 3, &gx), -(e8 * f1 * dl * gx)], vec![ap(od, 4, 2, g)]),
        sides(vec![r4 * ap(o, 2, 2, &gr)], vec![ap(od, 1, 1, g)]),
        sides(vec![-(e8 * ap(o, 2, 4, &gx)), -(e8 * 0.25 * chi4 * f1 * dp * gx)], vec![ap(od, 3, 1, g)]),
        sides(vec![2.0 * qx * ap(o, 3, 1, &gr)], vec![ap(od, 2, 4, g), 0.25 * chi4 * f1 * dp * *g]),
        sides(vec![(-0.5 * a) * f1 * *g], vec![ap(od, 3, 4, g), dp * ap(od, 3, 5, g)]),
        sides(
            vec![b.xi * ap(o, 3, 3, &gx), -(b.xi * ap(o, 3, 5, &(dl * gx)))],
            vec![-ap(od, 4, 4, g), -(dp * ap(od, 4, 5, g))],
        ),
        sides(vec![qx * ap(o, 3, 5, &gr)], vec![ap(od, 5, 4, g), dp * ap(od, 5, 5, g)]),
        sides(vec![-2.0 * qx * ap(o, 4, 2, &gr)], vec![ap(od, 1, 3, g), -(f1 * dl * *g)]),
        sides(vec![(0.125 * a) * chi4 * f1 * *g], vec![ap(od, 4, 3, g), -(dl * ap(od, 4, 5, g))]),
        sides(
            vec![b.xi * ap(o, 4, 4, &gx), b.xi * ap(o, 4, 5, &(dp * gx))],
            vec![-ap(od, 3, 3, g), dl * ap(od, 3, 5, g)],
        ),
        sides(vec![-qx * ap(o, 4, 5, &gr)], vec![ap(od, 5, 3, g), -(dl * ap(od, 5, 5, g))]),
        sides(vec![r4 * ap(o, 5, 5, &gr)], vec![ap(od, 5, 5, g)]),
        sides(vec![e4 * ap(o, 5, 4, &gx), e4 * ap(o, 5, 5, &(dp * gx))], vec![-ap(od, 3, 5, g)]),
        sides(vec![e4 * ap(o, 5, 3, &gx), -(e4 * ap(o, 5, 5, &(dl * gx)))], vec![ap(od, 4, 5, g)]),
    ]
}

/// Random order-4 polynomial jet with Taylor coefficients in the unit disk.
pub fn random_poly_jet(rng: &mut impl Rng) -> Jet {
    let c: Vec<Complex64> = (0..5)
        .map(|_| {
            let rad = rng.random::<f64>().sqrt();
            let th = rng.random::<f64>() * std::f64::consts::TAU;
            Complex64::from_polar(rad, th)
        })
        .collect();
    Jet::polynomial(&c, 4)
}

/// Log-uniform radius on `[r₊(1+eps_h), r_max_factor·r₊]`.
pub fn random_radius(p: &BlackHoleParams, rng: &mut impl Rng, eps_h: f64, r_max_factor: f64) -> f64 {
    let lo = (p.r_plus() * (1.0 + eps_h)).ln();
    let hi = (p.r_plus() * r_max_factor).ln();
    (lo + (hi - lo) * rng.random::<f64>()).exp()
}

pub fn verify_identities(p: &BlackHoleParams, mode: &ModeSpec, trials: usize, seed: u64) -> Result<IdentityReport> {
    verify_identities_with(p, mode, trials, seed, None, None)
}

/// As [`verify_identities`], optionally with a perturbed entry and a
/// replacement test function (the zero jet, for instance).
pub fn verify_identities_with(
    p: &BlackHoleParams,
    mode: &ModeSpec,
    trials: usize,
    seed: u64,
    probe: Option<&EntryPerturbation>,
    fixed_jet: Option<Jet>,
) -> Result<IdentityReport> {
    if trials == 0 {
        return Err(Error::Invalid("identity trial count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results: Vec<IdentityResult> = IDENTITY_NAMES
        .iter()
        .map(|n| IdentityResult { name: n.to_string(), max_residual: 0.0, worst_r: f64::NAN })
        .collect();
    for _ in 0..trials {
        let r = random_radius(p, &mut rng, 0.05, 20.0);
        let g = random_poly_jet(&mut rng);
        let g = fixed_jet.unwrap_or(g);
        let ctx = SeparatedContext::new(p, mode, r, DEFAULT_DEPTH)?;
        let o = build_o_ctx(&ctx, probe);
        let od = build_o_dagger_ctx(&ctx, probe);
        for (res, sides) in results.iter_mut().zip(identity_sides(&ctx, &o, &od, &g)) {
            let e = sides.relative_residual();
            if e > res.max_residual || res.worst_r.is_nan() {
                res.max_residual = res.max_residual.max(e);
                res.worst_r = r;
            }
        }
    }
    Ok(IdentityReport { results, trials, seed })
}
