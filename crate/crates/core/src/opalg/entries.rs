//! The separated 5×5 operator matrices of the decoupled system and of the
//! adjoint (Debye-potential) system.
//!
//! Index convention: components of the decoupled vector are
//! `(Ψ₀, Ψ̄₄, σ̃, λ̃, (δ−2β)φ̃)` and potentials are ordered `(g, h, e, f, d)`.
//! `O_ij` couples decoupled equation `i` to component `j`. The adjoint entry
//! labelled `O†_ij` is the formal adjoint of `O_ij`; in the potential system
//! it sits in row `j`, column `i`.

use super::jet::Jet;
use super::operator::RadialOperator;
use crate::background::{background_jets, BackgroundJets, BlackHoleParams};
use crate::error::{Error, Result};
use crate::harmonics::ModeSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficient-jet order used when assembling entries. Compositions inside
/// the entries and the identity checks consume at most four orders.
pub const DEFAULT_DEPTH: usize = 8;

/// Pointwise separated building blocks at one radius.
#[derive(Clone, Debug)]
pub struct SeparatedContext {
    pub bg: BackgroundJets,
    pub mode: ModeSpec,
    pub a: f64,
    pub q: f64,
    depth: usize,
}

impl SeparatedContext {
    pub fn new(p: &BlackHoleParams, mode: &ModeSpec, r: f64, depth: usize) -> Result<Self> {
        let bg = background_jets(p, r, depth)?;
        Ok(SeparatedContext { bg, mode: *mode, a: p.a(), q: p.charge(), depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn iw(&self) -> Complex64 {
        Complex64::new(0.0, self.mode.omega)
    }

    /// `𝒟 = ∂_r − iω/χ²`, the image of `D` on `e^{−iωt}` fields.
    pub fn d(&self) -> RadialOperator {
        RadialOperator::d_r(self.depth) - (self.iw() / self.bg.chi2)
    }

    /// `𝒟̄ = ∂_r + iω/χ²`.
    pub fn d_bar(&self) -> RadialOperator {
        RadialOperator::d_r(self.depth) + (self.iw() / self.bg.chi2)
    }

    /// `−(χ²/2) 𝒟̄`, the image of `Δ` on `e^{−iωt}` fields.
    pub fn delta(&self) -> RadialOperator {
        (-0.5 * self.bg.chi2) * self.d_bar()
    }

    /// `−(χ²/2) 𝒟`, the image of `Δ` on `e^{+iωt}` fields.
    pub fn delta_bar(&self) -> RadialOperator {
        (-0.5 * self.bg.chi2) * self.d()
    }

    /// `D` acting on a static background function.
    pub fn d_static(&self, f: &Jet) -> Jet {
        f.diff()
    }

    /// `Δ` acting on a static background function.
    pub fn delta_static(&self, f: &Jet) -> Jet {
        -0.5 * self.bg.chi2.truncate(f.order() - 1) * f.diff()
    }

    /// `(δ̄ − 2β̄)(δ + 4β) → −L²/(2R²)` on spin-weight −2 quantities.
    pub fn angular(&self) -> Jet {
        -self.mode.l2() / (2.0 * self.bg.rr * self.bg.rr)
    }

    pub fn m(&self, f: Jet) -> RadialOperator {
        RadialOperator::mul(f)
    }

    pub fn c(&self, x: impl Into<Complex64>) -> Jet {
        Jet::constant(x, self.depth)
    }
}

/// Which matrix an entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    Decoupled,
    Adjoint,
}

/// Optional additive probe `ε·ρ` on one labelled entry, used to show that
/// the checks are sensitive to transcription errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryPerturbation {
    pub kind: MatrixKind,
    pub i: usize,
    pub j: usize,
    pub eps: f64,
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: MatrixKind,
    entries: Vec<Vec<RadialOperator>>,
    tags: Vec<Vec<String>>,
}

impl OperatorMatrix {
    fn new(kind: MatrixKind) -> Self {
        OperatorMatrix {
            kind,
            entries: vec![vec![RadialOperator::zero(); 5]; 5],
            tags: vec![vec![String::from("0"); 5]; 5],
        }
    }

    /// Entry at matrix position (row, col), zero-based.
    pub fn at(&self, row: usize, col: usize) -> &RadialOperator {
        &self.entries[row][col]
    }

    pub fn tag(&self, row: usize, col: usize) -> &str {
        &self.tags[row][col]
    }

    /// Entry by its one-based label `ij` (`O_ij` or `O†_ij`).
    pub fn label(&self, i: usize, j: usize) -> &RadialOperator {
        let (row, col) = self.position(i, j);
        &self.entries[row][col]
    }

    fn position(&self, i: usize, j: usize) -> (usize, usize) {
        match self.kind {
            MatrixKind::Decoupled => (i - 1, j - 1),
            MatrixKind::Adjoint => (j - 1, i - 1),
        }
    }

    fn set(&mut self, i: usize, j: usize, op: RadialOperator) {
        let (row, col) = self.position(i, j);
        let name = match self.kind {
            MatrixKind::Decoupled => format!("O_{i}{j}"),
            MatrixKind::Adjoint => format!("O†_{i}{j}"),
        };
        self.entries[row][col] = op;
        self.tags[row][col] = name;
    }

    /// Apply to five jets: `out[row] = Σ_col M[row][col](v[col])`.
    pub fn apply(&self, v: &[Jet; 5]) -> [Jet; 5] {
        std::array::from_fn(|row| {
            let mut acc: Option<Jet> = None;
            for (col, vj) in v.iter().enumerate() {
                let e = &self.entries[row][col];
                if e.is_zero() {
                    continue;
                }
                let t = e.apply(vj);
                acc = Some(match acc {
                    Some(a) => a + t,
                    None => t,
                });
            }
            acc.unwrap_or_else(|| Jet::zero(v.iter().map(Jet::order).min().unwrap_or(0).saturating_sub(2)))
        })
    }

    /// Per-row magnitudes of the individual products `c_k(r) ∂^k v_col`,
    /// the natural scale for relative residuals.
    pub fn apply_terms(&self, v: &[Jet; 5]) -> [Vec<f64>; 5] {
        std::array::from_fn(|row| {
            let mut out = Vec::new();
            for (col, vj) in v.iter().enumerate() {
                let e = &self.entries[row][col];
                for k in 0..=e.max_order() {
                    if let Some(c) = e.coeff(k) {
                        out.push((c.value() * vj.derivative(k)).norm());
                    }
                }
            }
            out
        })
    }

    fn perturb(&mut self, p: &EntryPerturbation, ctx: &SeparatedContext) {
        if p.kind == self.kind {
            let (row, col) = self.position(p.i, p.j);
            let e = std::mem::replace(&mut self.entries[row][col], RadialOperator::zero());
            self.entries[row][col] = e + p.eps * ctx.bg.rho;
        }
    }
}

/// Build the separated decoupled operator `O` at `r`.
pub fn build_o(p: &BlackHoleParams, mode: &ModeSpec, r: f64) -> Result<OperatorMatrix> {
    let ctx = SeparatedContext::new(p, mode, r, DEFAULT_DEPTH)?;
    Ok(build_o_ctx(&ctx, None))
}

/// Build the separated adjoint operator `O†` at `r`.
pub fn build_o_dagger(p: &BlackHoleParams, mode: &ModeSpec, r: f64) -> Result<OperatorMatrix> {
    let ctx = SeparatedContext::new(p, mode, r, DEFAULT_DEPTH)?;
    Ok(build_o_dagger_ctx(&ctx, None))
}

pub fn build_o_ctx(ctx: &SeparatedContext, probe: Option<&EntryPerturbation>) -> OperatorMatrix {
    let b = &ctx.bg;
    let a = ctx.a;
    let (d, dl) = (ctx.d(), ctx.delta());
    let (rho, mu, gam) = (b.rho, b.mu, b.gamma);
    let (dphi, dlphi) = (b.dphi, b.dltaphi);
    let xf = b.xi * b.phi1sq;
    let ang = ctx.angular();
    let chi4 = b.chi2 * b.chi2;
    let drho = ctx.d_static(&rho);
    let mut o = OperatorMatrix::new(MatrixKind::Decoupled);

    o.set(
        1,
        1,
        (d.clone() - 5.0 * rho) * (dl.clone() - 4.0 * gam + mu) - ang - (3.0 * b.psi2 - 2.0 * b.phi11 + 2.0 * dphi * dlphi),
    );
    o.set(1, 3, (-8.0 * xf) * d.clone() - 4.0 * dphi * (gam * dphi - 3.0 * a * xf));
    o.set(1, 4, ctx.m(-(b.f1 * dphi)));
    o.set(1, 5, ctx.m(b.f1));

    o.set(
        2,
        2,
        (dl.clone() + 2.0 * gam + 5.0 * mu) * (d.clone() - rho) - ang - (3.0 * b.psi2 + 2.0 * dphi * dlphi - 2.0 * b.phi11),
    );
    o.set(2, 3, ctx.m(0.25 * chi4 * dlphi * b.f1));
    o.set(2, 4, (8.0 * xf) * (dl.clone() + 2.0 * gam) + 4.0 * dlphi * (gam * dphi - 3.0 * a * xf));
    o.set(2, 5, ctx.m(0.25 * chi4 * b.f1));

    o.set(3, 1, dl.clone() - 4.0 * gam + 2.0 * mu);
    o.set(
        3,
        3,
        (dl.clone() - 4.0 * gam) * (d.clone() - 2.0 * rho) - (a * dphi) * (dl.clone() - 2.0 * gam)
            - ang
            - 2.0 * (3.0 * b.psi2 + 2.0 * b.phi11),
    );
    o.set(3, 4, (-a * dphi) * d.clone() - 2.0 * b.phi00);
    o.set(3, 5, a * (d.clone() - 2.0 * rho) - 2.0 * dphi);

    o.set(4, 2, d.clone() - 2.0 * rho);
    o.set(4, 3, (a * dlphi) * (dl.clone() - 2.0 * gam) + 2.0 * b.phi22);
    o.set(
        4,
        4,
        -(d.clone() * (dl.clone() + 2.0 * gam + 2.0 * mu)) + (a * dlphi) * d.clone() + ang + 2.0 * (3.0 * b.psi2 + 2.0 * b.phi11),
    );
    o.set(4, 5, a * (dl.clone() + 2.0 * mu) - 2.0 * dlphi);

    o.set(5, 1, ctx.m(0.125 * chi4 * b.f1));
    o.set(5, 2, ctx.m(0.5 * b.f1));
    let dl53 = dl.clone() - 2.0 * gam + mu;
    o.set(
        5,
        3,
        (-0.125 * chi4 * b.f1) * (d.clone() - 2.0 * rho) + dlphi * ((d.clone() - rho) * dl53.clone())
            - (2.0 * a * xf) * dl53
            - dlphi * ang
            - mu * b.f2
            + b.phi22 * dphi,
    );
    o.set(
        5,
        4,
        (b.f2 - mu * dphi) * (d.clone() - rho) - (d.clone() - 3.0 * rho) * (dphi * (dl.clone() + 2.0 * gam + 2.0 * mu))
            + dphi * ang
            + (dlphi * drho - 2.0 * a * xf * rho)
            + dphi * (3.0 * b.psi2 - 2.0 * b.phi11),
    );
    o.set(
        5,
        5,
        (d.clone() - 3.0 * rho) * (dl.clone() + 3.0 * mu) - ang - 3.0 * b.psi2 + 2.0 * mu * rho - 3.0 * dphi * dlphi
            - 4.0 * (a * a - 1.0) * xf,
    );

    if let Some(pp) = probe {
        o.perturb(pp, ctx);
    }
    o
}

pub fn build_o_dagger_ctx(ctx: &SeparatedContext, probe: Option<&EntryPerturbation>) -> OperatorMatrix {
    let b = &ctx.bg;
    let a = ctx.a;
    let (d, dl) = (ctx.d(), ctx.delta());
    let (rho, mu, gam) = (b.rho, b.mu, b.gamma);
    let (dphi, dlphi) = (b.dphi, b.dltaphi);
    let xf = b.xi * b.phi1sq;
    let ang = ctx.angular();
    let chi4 = b.chi2 * b.chi2;
    let drho = ctx.d_static(&rho);
    let mut o = OperatorMatrix::new(MatrixKind::Adjoint);

    o.set(
        1,
        1,
        (dl.clone() + 2.0 * gam + mu) * (d.clone() + 3.0 * rho) - ang - (3.0 * b.psi2 - 2.0 * b.phi11 + 2.0 * dphi * dlphi),
    );
    o.set(1, 3, (8.0 * xf) * (d.clone() + 2.0 * rho) + b.f1 * dlphi);
    o.set(1, 4, ctx.m(-(b.f1 * dphi)));
    o.set(1, 5, ctx.m(b.f1));

    o.set(
        2,
        2,
        (d.clone() - rho) * (dl.clone() - 4.0 * gam - 3.0 * mu) - ang - (3.0 * b.psi2 - 2.0 * b.phi11 + 2.0 * dphi * dlphi),
    );
    o.set(2, 3, ctx.m(0.25 * chi4 * dlphi * b.f1));
    o.set(2, 4, (-8.0 * xf) * (dl.clone() - 4.0 * gam - 2.0 * mu) + 0.5 * b.chi2 * b.f1 * dlphi);
    o.set(2, 5, ctx.m(0.25 * chi4 * b.f1));

    o.set(3, 1, -(dl.clone() + 2.0 * gam));
    o.set(
        3,
        3,
        d.clone() * (dl.clone() + 2.0 * gam + 2.0 * mu) + (a * dphi) * (dl.clone() + 2.0 * mu) - ang
            - 2.0 * (3.0 * b.psi2 + 2.0 * b.phi11)
            + a * ctx.delta_static(&dphi),
    );
    o.set(3, 4, (a * dphi) * (d.clone() - 2.0 * rho) + a * ctx.d_static(&dphi) - 2.0 * b.phi00);
    o.set(3, 5, (-a) * d.clone() - 2.0 * dphi);

    o.set(4, 2, -d.clone());
    o.set(4, 3, (-a * dlphi) * (dl.clone() + 2.0 * mu) - a * ctx.delta_static(&dlphi) + 2.0 * b.phi22);
    o.set(
        4,
        4,
        -((dl.clone() - 4.0 * gam + a * dlphi) * (d.clone() - 2.0 * rho)) + ang + 2.0 * (3.0 * b.psi2 + 2.0 * b.phi11)
            - a * ctx.d_static(&dlphi),
    );
    o.set(4, 5, (-a) * (dl.clone() - 2.0 * gam) - 2.0 * dlphi);

    o.set(5, 1, ctx.m(0.125 * chi4 * b.f1));
    o.set(5, 2, ctx.m(0.5 * b.f1));
    o.set(
        5,
        3,
        d.clone().postmul(&(0.125 * chi4 * b.f1))
            + (dl.clone() + mu) * (ctx.m(4.0 * a * xf - mu * dphi) + dlphi * d.clone())
            - dlphi * ang
            + b.phi22 * dphi
            - mu * b.f2,
    );
    o.set(
        5,
        4,
        -(d.clone() - rho).postmul(&(b.f2 - mu * dphi)) - (dl.clone() - 4.0 * gam) * (dphi * (d.clone() + rho))
            + dphi * ang
            + (dlphi * drho - 2.0 * a * xf * rho)
            + dphi * (3.0 * b.psi2 - 2.0 * b.phi11),
    );
    o.set(
        5,
        5,
        (dl.clone() - 2.0 * gam - mu) * (d.clone() + rho) - ang - 3.0 * b.psi2 + 2.0 * mu * rho - 3.0 * dphi * dlphi
            - 4.0 * (a * a - 1.0) * xf,
    );

    if let Some(pp) = probe {
        o.perturb(pp, ctx);
    }
    o
}

/// Second-derivative coefficients of an operator matrix at its radius.
pub fn principal_part(m: &OperatorMatrix) -> Result<nalgebra::SMatrix<Complex64, 5, 5>> {
    let mut a = nalgebra::SMatrix::<Complex64, 5, 5>::zeros();
    for row in 0..5 {
        for col in 0..5 {
            let e = m.at(row, col);
            if e.max_order() > 2 {
                return Err(Error::OrderOverflow(e.max_order()));
            }
            a[(row, col)] = e.coeff_value(2);
        }
    }
    let sv = a.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::SingularPrincipalPart(cond));
    }
    Ok(a)
}
