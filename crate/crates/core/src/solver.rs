//! Radial integration of the adjoint system `O†ψ = 0` for the five Debye
//! potentials `(ψ_g, ψ_h, ψ_e, ψ_f, ψ_d)`.
//!
//! The system is written as `A ψ″ + B ψ′ + C ψ = 0` with `A, B, C` the
//! second-, first- and zeroth-order coefficient matrices of `O†`, integrated
//! with an adaptive Dormand–Prince 5(4) scheme and its quartic dense output.

use crate::background::BlackHoleParams;
use crate::error::{Error, Result};
use crate::harmonics::ModeSpec;
use crate::opalg::entries::{build_o_dagger_ctx, EntryPerturbation, OperatorMatrix, SeparatedContext};
use crate::opalg::Jet;
use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

type C = Complex64;
type Mat5 = SMatrix<C, 5, 5>;
type Vec5 = SVector<C, 5>;

/// Highest derivative order `jet_extend` can deliver.
pub const MAX_EXTEND_ORDER: usize = 9;

pub const POTENTIAL_NAMES: [&str; 5] = ["g", "h", "e", "f", "d"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialState {
    pub psi: [C; 5],
    pub dpsi: [C; 5],
}

impl PotentialState {
    pub fn zero() -> Self {
        Self::default()
    }

    fn to_array(self) -> [C; 10] {
        let mut y = [C::default(); 10];
        y[..5].copy_from_slice(&self.psi);
        y[5..].copy_from_slice(&self.dpsi);
        y
    }

    fn from_array(y: &[C; 10]) -> Self {
        let mut s = Self::default();
        s.psi.copy_from_slice(&y[..5]);
        s.dpsi.copy_from_slice(&y[5..]);
        s
    }

    pub fn conj(&self) -> Self {
        PotentialState { psi: self.psi.map(|c| c.conj()), dpsi: self.dpsi.map(|c| c.conj()) }
    }

    pub fn scale(&self, s: C) -> Self {
        PotentialState { psi: self.psi.map(|c| c * s), dpsi: self.dpsi.map(|c| c * s) }
    }

    pub fn add(&self, o: &Self) -> Self {
        PotentialState {
            psi: std::array::from_fn(|i| self.psi[i] + o.psi[i]),
            dpsi: std::array::from_fn(|i| self.dpsi[i] + o.dpsi[i]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.psi.iter().chain(&self.dpsi).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.psi.iter().chain(&self.dpsi).map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Adaptive integration settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel_tol: 1e-10, abs_tol: 1e-12 }
    }
}

/// Coefficient matrices of `O†` at `r` as matrix-valued jets.
#[derive(Clone, Debug)]
pub struct CoefficientJets {
    /// `by_order[k][(row, col)]` is the jet of the coefficient of `∂^k`.
    pub by_order: [[[Jet; 5]; 5]; 3],
    pub order: usize,
}

impl CoefficientJets {
    fn from_matrix(m: &OperatorMatrix) -> Self {
        let mut depth = usize::MAX;
        for row in 0..5 {
            for col in 0..5 {
                depth = depth.min(m.at(row, col).depth());
            }
        }
        let by_order = std::array::from_fn(|k| {
            std::array::from_fn(|row| {
                std::array::from_fn(|col| {
                    m.at(row, col).coeff(k).map(|j| j.truncate(depth)).unwrap_or_else(|| Jet::zero(depth))
                })
            })
        });
        CoefficientJets { by_order, order: depth }
    }

    /// Taylor coefficient `j` of the `∂^k` coefficient matrix.
    fn taylor_matrix(&self, k: usize, j: usize) -> Mat5 {
        Mat5::from_fn(|row, col| self.by_order[k][row][col].taylor()[j])
    }
}

/// The first-order system data for one parameter set and mode.
#[derive(Clone, Debug)]
pub struct AdjointSystem {
    pub params: BlackHoleParams,
    pub mode: ModeSpec,
    pub probe: Option<EntryPerturbation>,
}

impl AdjointSystem {
    pub fn new(params: BlackHoleParams, mode: ModeSpec) -> Self {
        AdjointSystem { params, mode, probe: None }
    }

    pub fn with_probe(mut self, probe: EntryPerturbation) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn matrix(&self, r: f64, depth: usize) -> Result<OperatorMatrix> {
        let ctx = SeparatedContext::new(&self.params, &self.mode, r, depth)?;
        Ok(build_o_dagger_ctx(&ctx, self.probe.as_ref()))
    }

    /// Coefficient jets good to `order` Taylor terms.
    pub fn coefficient_jets(&self, r: f64, order: usize) -> Result<CoefficientJets> {
        // Two nested compositions inside the entries consume two orders.
        let m = self.matrix(r, order + 2)?;
        let cj = CoefficientJets::from_matrix(&m);
        debug_assert!(cj.order >= order);
        Ok(cj)
    }

    fn abc(&self, r: f64) -> Result<(Mat5, Mat5, Mat5)> {
        let cj = self.coefficient_jets(r, 0)?;
        Ok((cj.taylor_matrix(2, 0), cj.taylor_matrix(1, 0), cj.taylor_matrix(0, 0)))
    }

    pub fn rhs(&self, r: f64, s: &PotentialState) -> Result<PotentialState> {
        let (a, b, c) = self.abc(r)?;
        let lu = checked_lu(a)?;
        let psi = Vec5::from_column_slice(&s.psi);
        let dpsi = Vec5::from_column_slice(&s.dpsi);
        let forcing = -(b * dpsi + c * psi);
        let d2 = lu.solve(&forcing).ok_or(Error::SingularPrincipalPart(f64::INFINITY))?;
        let mut out = PotentialState { psi: s.dpsi, dpsi: [C::default(); 5] };
        out.dpsi.copy_from_slice(d2.as_slice());
        Ok(out)
    }
}

fn checked_lu(a: Mat5) -> Result<nalgebra::LU<C, nalgebra::U5, nalgebra::U5>> {
    let sv = a.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::SingularPrincipalPart(cond));
    }
    Ok(a.lu())
}

/// `ψ″ = −A⁻¹(Bψ′ + Cψ)` for the adjoint system.
pub fn rhs(p: &BlackHoleParams, mode: &ModeSpec, r: f64, state: &PotentialState) -> Result<PotentialState> {
    AdjointSystem::new(*p, *mode).rhs(r, state)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type Y = [C; 10];

fn lin(y: &Y, terms: &[(f64, &Y)], h: f64) -> Y {
    std::array::from_fn(|i| {
        let mut acc = C::default();
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        y[i] + acc * h
    })
}

/// One accepted step with its quartic interpolation coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Segment {
    r0: f64,
    h: f64,
    rcont: [Y; 5],
}

impl Segment {
    fn eval(&self, r: f64) -> Y {
        let th = (r - self.r0) / self.h;
        let th1 = 1.0 - th;
        let [c1, c2, c3, c4, c5] = &self.rcont;
        std::array::from_fn(|i| c1[i] + (c2[i] + (c3[i] + (c4[i] + c5[i] * th1) * th) * th1) * th)
    }
}

/// Dense solution of the adjoint system over `[r0, r1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionTrace {
    pub mode: ModeSpec,
    pub params: BlackHoleParams,
    pub tolerances: Tolerances,
    pub r0: f64,
    pub r1: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    init: PotentialState,
    segments: Vec<Segment>,
    #[serde(skip)]
    probe: Option<EntryPerturbation>,
}

impl SolutionTrace {
    pub fn initial_state(&self) -> PotentialState {
        self.init
    }

    pub fn r_min(&self) -> f64 {
        self.r0.min(self.r1)
    }

    pub fn r_max(&self) -> f64 {
        self.r0.max(self.r1)
    }

    pub fn system(&self) -> AdjointSystem {
        AdjointSystem { params: self.params, mode: self.mode, probe: self.probe }
    }

    /// Dense state at any `r` in the trace interval.
    pub fn eval(&self, r: f64) -> Result<PotentialState> {
        let tol = 1e-12 * self.r_max();
        if r < self.r_min() - tol || r > self.r_max() + tol {
            return Err(Error::Invalid(format!("r = {r} outside trace [{}, {}]", self.r_min(), self.r_max())));
        }
        if self.segments.is_empty() {
            return Ok(self.init);
        }
        let fwd = self.r1 >= self.r0;
        // segments are ordered along the integration direction
        let idx = self.segments.partition_point(|s| if fwd { s.r0 + s.h < r } else { s.r0 + s.h > r });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Ok(PotentialState::from_array(&seg.eval(r)))
    }

    pub fn end_state(&self) -> Result<PotentialState> {
        self.eval(self.r1)
    }

    /// Accepted step boundaries.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m = vec![self.r0];
        m.extend(self.segments.iter().map(|s| s.r0 + s.h));
        m
    }

    /// Evenly spaced samples, both ends included.
    pub fn sample_radii(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.r_min(), self.r_max());
        if n <= 1 {
            return vec![a];
        }
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    /// Write `r, Re/Im ψ_i, Re/Im ψ_i′` rows at the given radii.
    pub fn write_csv<W: Write>(&self, out: W, radii: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["r".to_string()];
        for part in ["psi", "dpsi"] {
            for n in POTENTIAL_NAMES {
                header.push(format!("re_{part}_{n}"));
                header.push(format!("im_{part}_{n}"));
            }
        }
        w.write_record(&header).map_err(csv_err)?;
        for &r in radii {
            let s = self.eval(r)?;
            let mut rec = vec![fmt17(r)];
            for c in s.psi.iter().chain(&s.dpsi) {
                rec.push(fmt17(c.re));
                rec.push(fmt17(c.im));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }

    /// The trace of `(−ω, conj(init))`, i.e. the pointwise conjugate.
    pub fn conjugate(&self) -> SolutionTrace {
        let conj_y = |y: &Y| y.map(|c| c.conj());
        SolutionTrace {
            mode: self.mode.conjugate(),
            init: self.init.conj(),
            segments: self
                .segments
                .iter()
                .map(|s| Segment { r0: s.r0, h: s.h, rcont: s.rcont.each_ref().map(conj_y) })
                .collect(),
            probe: self.probe,
            ..self.clone()
        }
    }
}

/// Format a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(e.to_string())
}

/// Integrate `O†ψ = 0` from `r0` to `r1` starting at `init`.
pub fn integrate(
    p: &BlackHoleParams,
    mode: &ModeSpec,
    init: &PotentialState,
    r0: f64,
    r1: f64,
    tol: Tolerances,
) -> Result<SolutionTrace> {
    integrate_system(&AdjointSystem::new(*p, *mode), init, r0, r1, tol)
}

pub fn integrate_system(
    sys: &AdjointSystem,
    init: &PotentialState,
    r0: f64,
    r1: f64,
    tol: Tolerances,
) -> Result<SolutionTrace> {
    if !(tol.rel_tol > 0.0 && tol.abs_tol > 0.0) {
        return Err(Error::Invalid("tolerances must be positive".into()));
    }
    if !init.is_finite() {
        return Err(Error::Invalid("non-finite initial data".into()));
    }
    sys.params.check_radius(r0)?;
    sys.params.check_radius(r1)?;
    let mut trace = SolutionTrace {
        mode: sys.mode,
        params: sys.params,
        tolerances: tol,
        r0,
        r1,
        steps_accepted: 0,
        steps_rejected: 0,
        init: *init,
        segments: Vec::new(),
        probe: sys.probe,
    };
    let span = r1 - r0;
    if span == 0.0 {
        return Ok(trace);
    }
    let dir = span.signum();
    let f = |r: f64, y: &Y| -> Result<Y> { Ok(sys.rhs(r, &PotentialState::from_array(y))?.to_array()) };

    let mut r = r0;
    let mut y = init.to_array();
    let mut k1 = f(r, &y)?;
    let mut h = initial_step(&f, r, &y, &k1, dir, tol, span.abs())?;
    let h_min = 1e-13 * r0.abs().max(r1.abs());
    let mut last_rejected = false;

    while (r1 - r) * dir > 0.0 {
        if (r + h - r1) * dir > 0.0 {
            h = r1 - r;
        }
        let k2 = f(r + C2 * h, &lin(&y, &[(A21, &k1)], h))?;
        let k3 = f(r + C3 * h, &lin(&y, &[(A31, &k1), (A32, &k2)], h))?;
        let k4 = f(r + C4 * h, &lin(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h))?;
        let k5 = f(r + C5 * h, &lin(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h))?;
        let k6 = f(r + h, &lin(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h))?;
        let y1 = lin(&y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
        let k7 = f(r + h, &y1)?;
        let err_vec = lin(
            &[C::default(); 10],
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            h,
        );
        let mut err = 0.0;
        for i in 0..10 {
            let sc_re = tol.abs_tol + tol.rel_tol * y[i].re.abs().max(y1[i].re.abs());
            let sc_im = tol.abs_tol + tol.rel_tol * y[i].im.abs().max(y1[i].im.abs());
            err += (err_vec[i].re / sc_re).powi(2) + (err_vec[i].im / sc_im).powi(2);
        }
        let err = (err / 20.0).sqrt();
        if !err.is_finite() {
            return Err(Error::StepFailure { r, h });
        }

        if err <= 1.0 {
            let rc2: Y = std::array::from_fn(|i| y1[i] - y[i]);
            let rc3: Y = std::array::from_fn(|i| k1[i] * h - rc2[i]);
            let rc4: Y = std::array::from_fn(|i| rc2[i] - k7[i] * h - rc3[i]);
            let rc5: Y = std::array::from_fn(|i| {
                (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h
            });
            trace.segments.push(Segment { r0: r, h, rcont: [y, rc2, rc3, rc4, rc5] });
            trace.steps_accepted += 1;
            r += h;
            if (r1 - r) * dir <= 0.0 {
                r = r1;
            }
            y = y1;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if last_rejected { fac.min(1.0) } else { fac };
            last_rejected = false;
        } else {
            trace.steps_rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            last_rejected = true;
        }
        if h.abs() < h_min {
            return Err(Error::StepFailure { r, h });
        }
    }
    Ok(trace)
}

fn initial_step(
    f: &impl Fn(f64, &Y) -> Result<Y>,
    r: f64,
    y: &Y,
    k1: &Y,
    dir: f64,
    tol: Tolerances,
    span: f64,
) -> Result<f64> {
    let sc: Vec<f64> = y.iter().map(|c| tol.abs_tol + tol.rel_tol * c.norm()).collect();
    let norm = |v: &Y| (v.iter().zip(&sc).map(|(c, s)| (c.norm() / s).powi(2)).sum::<f64>() / 10.0).sqrt();
    let (d0, d1) = (norm(y), norm(k1));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = lin(y, &[(1.0, k1)], h0 * dir);
    let k2 = f(r + h0 * dir, &y1)?;
    let diff: Y = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(span) * dir)
}

/// Taylor coefficients `ψ^(k)/k!`, `k = 0..=order`, of each potential at `r`,
/// from the dense `ψ, ψ′` and the Taylor-mode recursion of the adjoint system.
pub fn jet_extend(trace: &SolutionTrace, r: f64, order: usize) -> Result<[Jet; 5]> {
    let s = trace.eval(r)?;
    extend_state(&trace.system(), r, &s, order)
}

/// Jets of a solution through the given `(ψ, ψ′)` at `r`.
pub fn extend_state(sys: &AdjointSystem, r: f64, s: &PotentialState, order: usize) -> Result<[Jet; 5]> {
    if order > MAX_EXTEND_ORDER {
        return Err(Error::OrderOverflow(order));
    }
    let mut p: Vec<Vec5> = vec![Vec5::from_column_slice(&s.psi), Vec5::from_column_slice(&s.dpsi)];
    if order >= 2 {
        let cj = sys.coefficient_jets(r, order - 2)?;
        let a: Vec<Mat5> = (0..=order - 2).map(|j| cj.taylor_matrix(2, j)).collect();
        let b: Vec<Mat5> = (0..=order - 2).map(|j| cj.taylor_matrix(1, j)).collect();
        let c: Vec<Mat5> = (0..=order - 2).map(|j| cj.taylor_matrix(0, j)).collect();
        let lu = checked_lu(a[0])?;
        for k in 0..=order - 2 {
            let mut acc = Vec5::zeros();
            for j in 0..=k {
                let m = k - j;
                if j >= 1 {
                    acc += a[j] * p[m + 2] * C::from(((m + 2) * (m + 1)) as f64);
                }
                acc += b[j] * p[m + 1] * C::from((m + 1) as f64);
                acc += c[j] * p[m];
            }
            let rhs = -acc / C::from(((k + 2) * (k + 1)) as f64);
            p.push(lu.solve(&rhs).ok_or(Error::SingularPrincipalPart(f64::INFINITY))?);
        }
    }
    p.truncate(order + 1);
    Ok(std::array::from_fn(|i| {
        let t: Vec<C> = p.iter().map(|v| v[i]).collect();
        Jet::from_taylor(&t)
    }))
}

/// Max relative residual of the five `O†` rows on the solution jets at `r`.
pub fn adjoint_residual(trace: &SolutionTrace, r: f64) -> Result<f64> {
    let jets = jet_extend(trace, r, 4)?;
    let m = trace.system().matrix(r, 6)?;
    let rows = m.apply(&jets);
    let terms = m.apply_terms(&jets);
    let mut worst: f64 = 0.0;
    for (row, t) in rows.iter().zip(terms.iter()) {
        let scale = t.iter().copied().fold(0.0, f64::max);
        if scale > 0.0 {
            worst = worst.max(row.value().norm() / scale);
        }
    }
    Ok(worst)
}
