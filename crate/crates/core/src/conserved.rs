//! The bilinear current of a potential solution and a decoupled vector,
//! the radial conserved quantities `K±`, the continuity residual and the
//! symplectic density.
//!
//! The current `J = V_l l + V_n n + V_m m + V_m̄ m̄` is evaluated on separated
//! fields. Products of `ψ ₋₂Y e^{−iωt}` with the plus sector are static; with
//! the minus sector they carry `e^{−2iωt}`. Time derivatives inside `V_l` and
//! `V_n` are split off into the `G±` terms, so that on the full fields
//!
//! * plus:  `V_l = V_l⁺ + (iω/2) G⁺`, `V_n = V_n⁺ + (iω/χ²) G⁺`
//! * minus: `V_l = V_l⁻ − (iω/2) G⁻`, `V_n = V_n⁻ + (iω/χ²) G⁻`
//!
//! The angular components drop out of the divergence identically and are
//! never computed.

use crate::background::{background_jets, BackgroundJets, BlackHoleParams};
use crate::error::{Error, Result};
use crate::harmonics::{composite_eigenvalue_numeric, composite_eigenvalue_spin2_numeric, ModeSpec};
use crate::opalg::entries::{build_o_ctx, build_o_dagger_ctx, SeparatedContext};
use crate::opalg::identities::{random_poly_jet, random_radius};
use crate::opalg::Jet;
use crate::reconstruct::{minus_sector_jets, plus_sector_jets, unit_map_jets, Sector};
use crate::solver::{jet_extend, SolutionTrace};
use crate::harmonics::gauss_legendre;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// Floor for the denominator of constancy metrics.
pub const CONSTANCY_FLOOR: f64 = 1e-20;

/// Which spin coefficient multiplies `V_n` in the reduced continuity law
/// `(D − 2ρ)V_l + (Δ + 2μ − 2x)V_n = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContinuityVariant {
    Gamma,
    Rho,
}

impl ContinuityVariant {
    pub const ALL: [ContinuityVariant; 2] = [ContinuityVariant::Gamma, ContinuityVariant::Rho];

    pub fn name(&self) -> &'static str {
        match self {
            ContinuityVariant::Gamma => "gamma",
            ContinuityVariant::Rho => "rho",
        }
    }
}

/// Radial parts of `V_l`, `V_n` and `G` for one sector, as jets.
#[derive(Clone, Copy, Debug)]
pub struct SectorCurrent {
    pub vl: Jet,
    pub vn: Jet,
    pub g: Jet,
}

impl SectorCurrent {
    /// `R²[V_l − (χ²/2)V_n]`
    pub fn k(&self, bg: &BackgroundJets) -> Jet {
        bg.rr * bg.rr * (self.vl - 0.5 * bg.chi2 * self.vn)
    }

    /// `V_l` and `V_n` including the time-derivative terms.
    fn full(&self, bg: &BackgroundJets, omega: f64, sector: Sector) -> (Jet, Jet) {
        let iw = C::new(0.0, omega);
        let vl = match sector {
            Sector::Plus => self.vl + 0.5 * iw * self.g,
            Sector::Minus => self.vl - 0.5 * iw * self.g,
        };
        (vl, self.vn + iw * self.g / bg.chi2)
    }
}

/// `G±` for one sector.
pub fn g_term(bg: &BackgroundJets, psi: &[Jet; 5], v: &[Jet; 5], sector: Sector) -> Jet {
    let [g, h, e, f, d] = *psi;
    let [p0, p4, s, lm, ph] = *v;
    let dilaton = d * (bg.dltaphi * s - bg.dphi * lm + ph);
    match sector {
        Sector::Plus => g * p0 + h * p4 + e * s - f * lm + dilaton,
        Sector::Minus => g * p0 - h * p4 - e * s - f * lm + dilaton,
    }
}

/// `V_l` and `V_n` radial parts for one sector, obtained from the tetrad
/// form of the current by `D → ∂_r`, `Δ → −(χ²/2)∂_r` once the time
/// derivatives are moved into `G`. Inputs need order ≥ 1; the result is one
/// order shorter.
pub fn sector_current(bg: &BackgroundJets, a: f64, psi: &[Jet; 5], v: &[Jet; 5], sector: Sector) -> SectorCurrent {
    let [g, h, e, f, d] = *psi;
    let [p0, p4, s, lm, ph] = *v;
    let (rho, mu, gam) = (bg.rho, bg.mu, bg.gamma);
    let (dp, dl) = (bg.dphi, bg.dltaphi);
    let xf = bg.xi * bg.phi1sq;
    let x2 = 2.0 * bg.axi_over_dphi;
    let dr = |j: &Jet| j.diff();
    let del = |j: &Jet| -0.5 * bg.chi2 * j.diff();

    let vn = -(p0 * (dr(&g) + 3.0 * rho * g)) + h * (dr(&p4) - rho * p4) + 8.0 * xf * h * lm
        + e * p0
        + e * (dr(&s) - 2.0 * rho * s - a * dp * s)
        + a * dl * f * s
        + lm * (dr(&f) - 2.0 * rho * f)
        + a * f * ph
        - s * (4.0 * a * xf * d - mu * dp * d + dl * dr(&d))
        + dp * lm * (dr(&d) + rho * d)
        - (dr(&d) + rho * d) * ph;

    let vl = g * (del(&p0) - 4.0 * gam * p0 + mu * p0) - 8.0 * xf * g * s
        - p4 * (del(&h) - 4.0 * gam * h - 3.0 * mu * h)
        - s * (del(&e) + 2.0 * gam * e + 2.0 * mu * e)
        - a * dp * e * lm
        + a * e * ph
        + f * p4
        - f * (del(&lm) + 2.0 * gam * lm + 2.0 * mu * lm - a * dl * lm)
        + dl * d * (del(&s) + mu * s + x2 * s)
        - dp * d * (del(&lm) + 2.0 * gam * lm + mu * lm - x2 * lm)
        + d * (del(&ph) + 3.0 * mu * ph);

    let n = vl.order().min(vn.order());
    SectorCurrent { vl: vl.truncate(n), vn: vn.truncate(n), g: g_term(bg, psi, v, sector).truncate(n) }
}

/// Reading of the grouped radial expressions for `V_l`, `V_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentForm {
    /// Grouped terms taken literally.
    Literal,
    /// With `λR²∂(R²ψ_f) → λR⁻²∂(R²ψ_f)`, `∂(χ²ψ_h/R³) → ∂(χ⁴ψ_h/R³)` and
    /// `aψ_eΔφλ → aψ_eDφλ`. Agrees with [`sector_current`] identically.
    Corrected,
}

/// `V_l`, `V_n` radial parts in the grouped form `R^k ∂_r(R^{−k} ·)`.
pub fn sector_current_grouped(
    bg: &BackgroundJets,
    a: f64,
    psi: &[Jet; 5],
    v: &[Jet; 5],
    sector: Sector,
    form: CurrentForm,
) -> SectorCurrent {
    let [g, h, e, f, d] = *psi;
    let [p0, p4, s, lm, ph] = *v;
    let r = bg.rr;
    let (chi2, xi) = (bg.chi2, bg.xi);
    let chi4 = chi2 * chi2;
    let (dp, dl) = (bg.dphi, bg.dltaphi);
    let xf = xi * bg.phi1sq;
    let x2 = 2.0 * bg.axi_over_dphi;
    let half_dlnxi = 0.5 * xi.diff() / xi;
    let r2 = r * r;
    let r3 = r2 * r;
    let dr = |j: Jet| j.diff();

    let vn = p0 * (e - r3 * dr(g / r3)) + h * (dr(r * p4) / r + 8.0 * xf * lm)
        + e * (dr(r2 * s) / r2 + half_dlnxi * s)
        + a * f * (dl * s + ph)
        + match form {
            CurrentForm::Literal => lm * r2 * dr(r2 * f),
            CurrentForm::Corrected => lm * dr(r2 * f) / r2,
        }
        - s * (dl * r * dr(d / r) + 4.0 * a * xf * d)
        + r * (dp * lm - ph) * dr(d / r);

    let (h_weight, e_lambda) = match form {
        CurrentForm::Literal => (chi2, dl),
        CurrentForm::Corrected => (chi4, dp),
    };
    let vl = p4 * (f + 0.5 * r3 * dr(h_weight * h / r3) / chi2) - g * (0.5 * dr(r * chi4 * p0) / (chi2 * r) + 8.0 * xf * s)
        + 0.5 * f * chi4 * (dr(r2 * lm / chi2) / r2 + half_dlnxi * r2 * lm / chi2 / r2)
        + a * e * (ph - e_lambda * lm)
        + 0.5 * s * chi4 * dr(r2 * e / chi2) / r2
        + dl * d * (-0.5 * chi2 * dr(r * s) / r + x2 * s)
        + dp * d * (0.5 * chi4 * dr(r * lm / chi2) / r + x2 * lm)
        - 0.5 * chi2 * d * dr(r3 * ph) / r3;

    let n = vl.order().min(vn.order());
    SectorCurrent { vl: vl.truncate(n), vn: vn.truncate(n), g: g_term(bg, psi, v, sector).truncate(n) }
}

/// Closed form of `K⁻`: `−(L²l(l+1)/4) χ² (∂_r ln R³) ψ_g ψ_h / R²`.
pub fn k_minus_closed(bg: &BackgroundJets, mode: &ModeSpec, psi: &[Jet; 5]) -> Jet {
    let dlnr3 = -3.0 * bg.rho;
    -(mode.weight() / 4.0) * bg.chi2 * dlnr3 / (bg.rr * bg.rr) * psi[0] * psi[1]
}

/// `L²l(l+1)ψ_d²/(8R⁴)`
pub fn g_minus_closed(bg: &BackgroundJets, mode: &ModeSpec, psi: &[Jet; 5]) -> Jet {
    mode.weight() / 8.0 * psi[4] * psi[4] / bg.rr.powi(4)
}

/// All current components at one radius.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurrentParts {
    pub r: f64,
    pub vl_plus: C,
    pub vl_minus: C,
    pub vn_plus: C,
    pub vn_minus: C,
    pub g_plus: C,
    pub g_minus: C,
    pub k_plus: C,
    pub k_minus: C,
}

/// Evaluate the current split at `r` from jets (order ≥ 1) of `ψ` and of
/// both sectors of the decoupled vector.
pub fn current_parts(
    psi: &[Jet; 5],
    plus: &[Jet; 5],
    minus: &[Jet; 5],
    p: &BlackHoleParams,
    _mode: &ModeSpec,
    r: f64,
) -> Result<CurrentParts> {
    let n = psi.iter().chain(plus).chain(minus).map(Jet::order).min().unwrap_or(0);
    if n < 1 {
        return Err(Error::Invalid("current parts need order-1 jets".into()));
    }
    let bg = background_jets(p, r, n)?;
    let cp = sector_current(&bg, p.a(), psi, plus, Sector::Plus);
    let cm = sector_current(&bg, p.a(), psi, minus, Sector::Minus);
    Ok(CurrentParts {
        r,
        vl_plus: cp.vl.value(),
        vl_minus: cm.vl.value(),
        vn_plus: cp.vn.value(),
        vn_minus: cm.vn.value(),
        g_plus: cp.g.value(),
        g_minus: cm.g.value(),
        k_plus: cp.k(&bg).value(),
        k_minus: cm.k(&bg).value(),
    })
}

fn rel(total: C, terms: &[C]) -> f64 {
    let scale = terms.iter().map(|t| t.norm()).fold(total.norm(), f64::max);
    if scale > 0.0 {
        total.norm() / scale
    } else {
        0.0
    }
}

/// Relative residuals of the two minus-sector relations
/// `V_n⁻ + 2χ⁻²V_l⁻ + R⁻²∂_r(R²G⁻) = 0` and
/// `V_l⁻ − (χ²/2)V_n⁻ = −L²l(l+1)χ²(∂_r ln R³)ψ_gψ_h/(4R⁴)`,
/// plus the residual of `G⁻` against its closed form. `psi` needs order ≥ 2.
pub fn verify_minus_relations(psi: &[Jet; 5], p: &BlackHoleParams, mode: &ModeSpec, r: f64) -> Result<[f64; 3]> {
    let n = psi.iter().map(Jet::order).min().unwrap_or(0);
    if n < 2 {
        return Err(Error::Invalid("minus-sector relations need order-2 jets".into()));
    }
    let bg = background_jets(p, r, n)?;
    let minus = minus_sector_jets(&bg, p.charge(), mode, psi);
    let c = sector_current(&bg, p.a(), psi, &minus, Sector::Minus);
    let r2 = bg.rr * bg.rr;
    let t1 = c.vn.value();
    let t2 = (2.0 * c.vl / bg.chi2).value();
    let t3 = ((r2 * c.g).diff() / r2).value();
    let line1 = rel(t1 + t2 + t3, &[t1, t2, t3]);
    let lhs = (c.vl - 0.5 * bg.chi2 * c.vn).value();
    let rhs = (k_minus_closed(&bg, mode, psi) / r2).value();
    let line2 = rel(lhs - rhs, &[c.vl.value(), (0.5 * bg.chi2 * c.vn).value(), rhs]);
    let gc = g_minus_closed(&bg, mode, psi).value();
    let [g, h, e, f, d] = psi.map(|j| j.value());
    let [p0, p4, sg, lm, ph] = minus.map(|j| j.value());
    let (dp, dl) = (bg.dphi.value(), bg.dltaphi.value());
    // the ψ_gψ_h and ψ_eψ_f products cancel pairwise, so scale by each term
    let g_terms = [g * p0, h * p4, e * sg, f * lm, d * dl * sg, d * dp * lm, d * ph, gc];
    let g_res = rel(c.g.value() - gc, &g_terms);
    Ok([line1, line2, g_res])
}

/// Currents of one trace at a radius.
struct TraceCurrents {
    bg: BackgroundJets,
    psi: [Jet; 5],
    plus: SectorCurrent,
    minus: SectorCurrent,
    /// Plus sector replaced by the unit map of `ψ̄`.
    plus_unit: SectorCurrent,
}

/// Currents at `r` from `ψ` jets of order `k` and `ψ̄` jets of order `k + 4`.
fn trace_currents(trace: &SolutionTrace, conj: &SolutionTrace, r: f64, k: usize) -> Result<TraceCurrents> {
    let p = &trace.params;
    let psi = jet_extend(trace, r, k)?;
    let psib = jet_extend(conj, r, k + 4)?;
    let ctx = SeparatedContext::new(p, &trace.mode.conjugate(), r, k + 6)?;
    let plus = plus_sector_jets(&ctx, &psib);
    let bg = background_jets(p, r, k)?;
    let minus = minus_sector_jets(&bg, p.charge(), &trace.mode, &psi);
    let unit = unit_map_jets(&bg, p.charge(), &psib);
    Ok(TraceCurrents {
        plus: sector_current(&bg, p.a(), &psi, &plus, Sector::Plus),
        minus: sector_current(&bg, p.a(), &psi, &minus, Sector::Minus),
        plus_unit: sector_current(&bg, p.a(), &psi, &unit, Sector::Plus),
        bg,
        psi,
    })
}

/// `max |K(rᵢ) − K(r₀)| / max(|K(r₀)|, floor)`
pub fn constancy_metric(values: &[C]) -> f64 {
    let Some(&k0) = values.first() else { return 0.0 };
    let dev = values.iter().map(|k| (k - k0).norm()).fold(0.0, f64::max);
    dev / k0.norm().max(CONSTANCY_FLOOR)
}

/// Sampled `K±` along a trace.
#[derive(Clone, Debug, Serialize)]
pub struct ConservationReport {
    pub radii: Vec<f64>,
    pub k_plus: Vec<C>,
    pub k_minus: Vec<C>,
    /// `K⁻` from the closed form.
    pub k_minus_closed: Vec<C>,
    /// `K⁺` with the plus sector replaced by the unit map of `ψ̄`, which
    /// solves the conjugate decoupled system; a check on the current itself.
    pub k_plus_unit_map: Vec<C>,
    pub constancy_plus: f64,
    pub constancy_minus: f64,
    pub constancy_plus_unit_map: f64,
    /// Largest relative gap between `K⁻` and its closed form.
    pub closed_form_gap: f64,
}

/// Evaluate `K±` at `n_samples` radii spread over the trace.
pub fn conservation_trace(trace: &SolutionTrace, n_samples: usize) -> Result<ConservationReport> {
    conservation_at(trace, &trace.sample_radii(n_samples))
}

pub fn conservation_at(trace: &SolutionTrace, radii: &[f64]) -> Result<ConservationReport> {
    let conj = trace.conjugate();
    let mut rep = ConservationReport {
        radii: radii.to_vec(),
        k_plus: Vec::new(),
        k_minus: Vec::new(),
        k_minus_closed: Vec::new(),
        k_plus_unit_map: Vec::new(),
        constancy_plus: 0.0,
        constancy_minus: 0.0,
        constancy_plus_unit_map: 0.0,
        closed_form_gap: 0.0,
    };
    for &r in radii {
        let tc = trace_currents(trace, &conj, r, 1)?;
        rep.k_plus.push(tc.plus.k(&tc.bg).value());
        let km = tc.minus.k(&tc.bg).value();
        let kc = k_minus_closed(&tc.bg, &trace.mode, &tc.psi).value();
        rep.closed_form_gap = rep.closed_form_gap.max(rel(km - kc, &[km, kc]));
        rep.k_minus.push(km);
        rep.k_minus_closed.push(kc);
        rep.k_plus_unit_map.push(tc.plus_unit.k(&tc.bg).value());
    }
    rep.constancy_plus = constancy_metric(&rep.k_plus);
    rep.constancy_minus = constancy_metric(&rep.k_minus);
    rep.constancy_plus_unit_map = constancy_metric(&rep.k_plus_unit_map);
    Ok(rep)
}

/// Divergence of the separated current for one sector, returned as its
/// additive terms.
fn divergence_terms(bg: &BackgroundJets, c: &SectorCurrent, omega: f64, sector: Sector, variant: ContinuityVariant) -> Vec<Jet> {
    let (vl, vn) = c.full(bg, omega, sector);
    let x = match variant {
        ContinuityVariant::Gamma => bg.gamma,
        ContinuityVariant::Rho => bg.rho,
    };
    let iw = C::new(0.0, omega);
    let mut t = vec![vl.diff(), -2.0 * bg.rho * vl, -0.5 * bg.chi2 * vn.diff(), 2.0 * bg.mu * vn, -2.0 * x * vn];
    if sector == Sector::Minus {
        t.push(-2.0 * iw * vl / bg.chi2);
        t.push(-iw * vn);
    }
    let n = t.iter().map(Jet::order).min().unwrap_or(0);
    t.into_iter().map(|j| j.truncate(n)).collect()
}

fn relative_sum(terms: &[Jet]) -> (C, f64) {
    let total: C = terms.iter().map(Jet::value).sum();
    let vals: Vec<C> = terms.iter().map(Jet::value).collect();
    (total, rel(total, &vals))
}

/// Continuity residual of one variant, per sector.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContinuityResidual {
    pub variant: ContinuityVariant,
    pub r: f64,
    pub plus: C,
    pub minus: C,
    pub plus_unit: C,
    /// Residuals divided by the largest term of the divergence.
    pub plus_rel: f64,
    pub minus_rel: f64,
    pub plus_unit_rel: f64,
}

/// `(D − 2ρ)V_l + (Δ + 2μ − 2x)V_n` for both sectors at `r`.
pub fn continuity_residual(trace: &SolutionTrace, r: f64, variant: ContinuityVariant) -> Result<ContinuityResidual> {
    let conj = trace.conjugate();
    continuity_with(trace, &conj, r, variant)
}

fn continuity_with(trace: &SolutionTrace, conj: &SolutionTrace, r: f64, variant: ContinuityVariant) -> Result<ContinuityResidual> {
    let tc = trace_currents(trace, conj, r, 2)?;
    let w = trace.mode.omega;
    let (plus, plus_rel) = relative_sum(&divergence_terms(&tc.bg, &tc.plus, w, Sector::Plus, variant));
    let (minus, minus_rel) = relative_sum(&divergence_terms(&tc.bg, &tc.minus, w, Sector::Minus, variant));
    let (plus_unit, plus_unit_rel) = relative_sum(&divergence_terms(&tc.bg, &tc.plus_unit, w, Sector::Plus, variant));
    Ok(ContinuityResidual { variant, r, plus, minus, plus_unit, plus_rel, minus_rel, plus_unit_rel })
}

/// Worst relative continuity residuals of each variant over `radii`, as
/// `[plus, minus, plus from the unit map]`.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub radii: Vec<f64>,
    pub gamma: [f64; 3],
    pub rho: [f64; 3],
}

impl ContinuityReport {
    fn slots(&self, v: ContinuityVariant) -> [f64; 3] {
        match v {
            ContinuityVariant::Gamma => self.gamma,
            ContinuityVariant::Rho => self.rho,
        }
    }

    /// Worst residual over the sector pairs that solve both systems: the
    /// minus sector and the unit-map plus sector.
    pub fn worst_exact(&self, v: ContinuityVariant) -> f64 {
        let s = self.slots(v);
        s[1].max(s[2])
    }

    /// Worst residual including the reconstructed plus sector.
    pub fn worst(&self, v: ContinuityVariant) -> f64 {
        let s = self.slots(v);
        s[0].max(s[1]).max(s[2])
    }

    /// The variant whose exact-pair residual is below `tol` while the other
    /// exceeds it by at least `factor`.
    pub fn winner(&self, tol: f64, factor: f64) -> Option<ContinuityVariant> {
        let g = self.worst_exact(ContinuityVariant::Gamma);
        let r = self.worst_exact(ContinuityVariant::Rho);
        if g < tol && r >= factor * g.max(tol) {
            Some(ContinuityVariant::Gamma)
        } else if r < tol && g >= factor * r.max(tol) {
            Some(ContinuityVariant::Rho)
        } else {
            None
        }
    }
}

/// Worst relative residuals of both variants over `radii`.
pub fn continuity_scan(trace: &SolutionTrace, radii: &[f64]) -> Result<ContinuityReport> {
    let conj = trace.conjugate();
    let mut rep = ContinuityReport { radii: radii.to_vec(), gamma: [0.0; 3], rho: [0.0; 3] };
    for &r in radii {
        for v in ContinuityVariant::ALL {
            let c = continuity_with(trace, &conj, r, v)?;
            let slot = match v {
                ContinuityVariant::Gamma => &mut rep.gamma,
                ContinuityVariant::Rho => &mut rep.rho,
            };
            slot[0] = slot[0].max(c.plus_rel);
            slot[1] = slot[1].max(c.minus_rel);
            slot[2] = slot[2].max(c.plus_unit_rel);
        }
    }
    Ok(rep)
}

/// Off-shell check of `ψ·OΨ − (O†ψ)·Ψ = (D − 2ρ)V_l + (Δ + 2μ − 2x)V_n`
/// with random polynomial jets for `ψ` and `Ψ`, using [`sector_current`] or
/// the grouped form. Returns the worst relative residual for `[plus, minus]`
/// sectors.
pub fn verify_current_identity(
    p: &BlackHoleParams,
    mode: &ModeSpec,
    variant: ContinuityVariant,
    trials: usize,
    seed: u64,
    form: Option<CurrentForm>,
) -> Result<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 2];
    for _ in 0..trials {
        let r = random_radius(p, &mut rng, 0.05, 20.0);
        let psi: [Jet; 5] = std::array::from_fn(|_| random_poly_jet(&mut rng));
        let big: [Jet; 5] = std::array::from_fn(|_| random_poly_jet(&mut rng));
        let ctx = SeparatedContext::new(p, mode, r, 6)?;
        let odag = build_o_dagger_ctx(&ctx, None).apply(&psi);
        for (k, sector) in [Sector::Plus, Sector::Minus].into_iter().enumerate() {
            let octx = match sector {
                Sector::Plus => SeparatedContext::new(p, &mode.conjugate(), r, 6)?,
                Sector::Minus => ctx.clone(),
            };
            let ob = build_o_ctx(&octx, None).apply(&big);
            let mut lhs: Vec<Jet> = Vec::new();
            for i in 0..5 {
                lhs.push(psi[i] * ob[i]);
                lhs.push(-(odag[i] * big[i]));
            }
            let bg = &ctx.bg;
            let cur = match form {
                Some(f) => sector_current_grouped(bg, p.a(), &psi, &big, sector, f),
                None => sector_current(bg, p.a(), &psi, &big, sector),
            };
            let rhs = divergence_terms(bg, &cur, mode.omega, sector, variant);
            let (l, lr): (C, Vec<C>) = (lhs.iter().map(Jet::value).sum(), lhs.iter().map(Jet::value).collect());
            let (rv, rr): (C, Vec<C>) = (rhs.iter().map(Jet::value).sum(), rhs.iter().map(Jet::value).collect());
            let all: Vec<C> = lr.into_iter().chain(rr).collect();
            worst[k] = worst[k].max(rel(l - rv, &all));
        }
    }
    Ok(worst)
}

/// `J^t` radial densities `χ⁻¹R²(χ⁻²V_l + ½V_n)` for `[plus, minus]`.
pub fn symplectic_density(trace: &SolutionTrace, r: f64) -> Result<[C; 2]> {
    let conj = trace.conjugate();
    density_with(trace, &conj, r)
}

fn density_with(trace: &SolutionTrace, conj: &SolutionTrace, r: f64) -> Result<[C; 2]> {
    let tc = trace_currents(trace, conj, r, 1)?;
    let (bg, cp, cm) = (&tc.bg, &tc.plus, &tc.minus);
    let w = trace.mode.omega;
    let weight = (bg.rr * bg.rr / bg.chi2.powf(0.5)).value();
    let chi2 = bg.chi2.value();
    let one = |c: &SectorCurrent, s: Sector| {
        let (vl, vn) = c.full(bg, w, s);
        weight * (vl.value() / chi2 + 0.5 * vn.value())
    };
    Ok([one(cp, Sector::Plus), one(cm, Sector::Minus)])
}

/// Composite Gauss–Legendre integral of the symplectic densities over
/// `[r0, r1]` with `panels` equal panels of `nodes` points.
pub fn symplectic_integral(trace: &SolutionTrace, r0: f64, r1: f64, panels: usize, nodes: usize) -> Result<[C; 2]> {
    if panels == 0 || nodes == 0 || r1 <= r0 {
        return Err(Error::Invalid("quadrature needs panels ≥ 1, nodes ≥ 1 and r1 > r0".into()));
    }
    let conj = trace.conjugate();
    let (x, wts) = gauss_legendre(nodes);
    let h = (r1 - r0) / panels as f64;
    let mut acc = [C::new(0.0, 0.0); 2];
    for k in 0..panels {
        let mid = r0 + (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&wts) {
            let d = density_with(trace, &conj, mid + 0.5 * h * xi)?;
            for s in 0..2 {
                acc[s] += d[s] * (0.5 * h * wi);
            }
        }
    }
    Ok(acc)
}

/// The eigenvalues of `(δ̄ − 2β̄)(δ + 4β)` on spin −2 and of
/// `(δ − 2β)(δ̄ + 4β̄)` on spin +2, in units of `1/(2R²)`, both evaluated
/// numerically. The angular part of the divergence cancels because they
/// coincide.
pub fn angular_eigenvalue_pair(l: u32, m: i32, theta: f64) -> Result<(C, C)> {
    Ok((composite_eigenvalue_numeric(l, m, theta)?, composite_eigenvalue_spin2_numeric(l, m, theta)?))
}
