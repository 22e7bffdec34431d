//! Linear radial differential operators `Σ_k c_k(r) ∂_r^k`, represented
//! locally at one radius by the Taylor jets of their coefficients.

use super::jet::Jet;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// Highest derivative order reachable through `compose`.
pub const MAX_OPERATOR_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialOperator {
    coeffs: Vec<Option<Jet>>,
}

impl RadialOperator {
    /// The literal zero operator.
    pub fn zero() -> Self {
        RadialOperator { coeffs: Vec::new() }
    }

    /// Multiplication by a function.
    pub fn mul(f: Jet) -> Self {
        RadialOperator { coeffs: vec![Some(f)] }
    }

    /// `∂_r` with coefficient jets of the given order.
    pub fn d_r(order: usize) -> Self {
        RadialOperator { coeffs: vec![None, Some(Jet::constant(1.0, order))] }
    }

    pub fn from_coeffs(coeffs: Vec<Jet>) -> Self {
        RadialOperator { coeffs: coeffs.into_iter().map(Some).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Option::is_none)
    }

    /// Highest derivative carried (0 for the zero operator).
    pub fn max_order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of `∂^k`, `None` when structurally absent.
    pub fn coeff(&self, k: usize) -> Option<&Jet> {
        self.coeffs.get(k).and_then(Option::as_ref)
    }

    pub fn coeff_value(&self, k: usize) -> Complex64 {
        self.coeff(k).map(Jet::value).unwrap_or_default()
    }

    /// Smallest coefficient-jet order; bounds how much further this
    /// operator can be composed or differentiated.
    pub fn depth(&self) -> usize {
        self.coeffs.iter().flatten().map(Jet::order).min().unwrap_or(usize::MAX)
    }

    /// Apply to a jet; the result has order `f.order() - max_order()` (or
    /// less if the coefficient jets are shallower).
    pub fn apply(&self, f: &Jet) -> Jet {
        let n = self.max_order();
        assert!(f.order() >= n, "jet of order {} too short for an order-{n} operator", f.order());
        let out_order = (f.order() - n).min(self.depth());
        let mut acc = Jet::zero(out_order);
        let mut fk = *f;
        for k in 0..self.coeffs.len() {
            if let Some(c) = &self.coeffs[k] {
                acc = acc + *c * fk;
            }
            if k + 1 < self.coeffs.len() {
                fk = fk.diff();
            }
        }
        acc
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        RadialOperator { coeffs: self.coeffs.iter().map(|c| c.map(|j| j.scale(s))).collect() }
    }

    /// Left multiplication `f ∘ A`.
    pub fn premul(&self, f: &Jet) -> Self {
        RadialOperator { coeffs: self.coeffs.iter().map(|c| c.map(|j| *f * j)).collect() }
    }

    /// Right multiplication `A ∘ f`, i.e. the operator `g ↦ A(f g)`.
    pub fn postmul(&self, f: &Jet) -> Self {
        self.compose(&RadialOperator::mul(*f)).expect("multiplication never raises order")
    }

    /// Leibniz expansion of `A ∘ B`.
    pub fn compose(&self, b: &RadialOperator) -> Result<Self> {
        if self.is_zero() || b.is_zero() {
            return Ok(RadialOperator::zero());
        }
        let order = self.max_order() + b.max_order();
        if order > MAX_OPERATOR_ORDER {
            return Err(Error::OrderOverflow(order));
        }
        let mut out: Vec<Option<Jet>> = vec![None; order + 1];
        for (k, ak) in self.coeffs.iter().enumerate() {
            let Some(ak) = ak else { continue };
            for (j, bj) in b.coeffs.iter().enumerate() {
                let Some(bj) = bj else { continue };
                // ∂^k (b_j ∂^j g) = Σ_i C(k,i) b_j^(i) ∂^(k-i+j) g
                let mut bji = *bj;
                let mut binom = 1.0;
                for i in 0..=k {
                    let term = (*ak * bji).scale(binom);
                    let slot = &mut out[k - i + j];
                    *slot = Some(match slot.take() {
                        Some(s) => s + term,
                        None => term,
                    });
                    if i < k {
                        binom = binom * (k - i) as f64 / (i + 1) as f64;
                        bji = bji.diff();
                    }
                }
            }
        }
        Ok(RadialOperator { coeffs: out })
    }
}

impl Add for RadialOperator {
    type Output = RadialOperator;
    fn add(self, o: RadialOperator) -> RadialOperator {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k).copied().flatten(), o.coeffs.get(k).copied().flatten()) {
                (Some(a), Some(b)) => Some(a + b),
                (a, b) => a.or(b),
            })
            .collect();
        RadialOperator { coeffs }
    }
}

impl Neg for RadialOperator {
    type Output = RadialOperator;
    fn neg(self) -> RadialOperator {
        self.scale(-1.0)
    }
}

impl Sub for RadialOperator {
    type Output = RadialOperator;
    fn sub(self, o: RadialOperator) -> RadialOperator {
        self + (-o)
    }
}

impl Add<Jet> for RadialOperator {
    type Output = RadialOperator;
    fn add(self, f: Jet) -> RadialOperator {
        self + RadialOperator::mul(f)
    }
}

impl Sub<Jet> for RadialOperator {
    type Output = RadialOperator;
    fn sub(self, f: Jet) -> RadialOperator {
        self + RadialOperator::mul(-f)
    }
}

impl Mul for RadialOperator {
    type Output = RadialOperator;
    /// Composition. Panics past the order budget; use [`RadialOperator::compose`]
    /// to handle that case.
    fn mul(self, b: RadialOperator) -> RadialOperator {
        self.compose(&b).expect("composition within order budget")
    }
}

impl Mul<RadialOperator> for Jet {
    type Output = RadialOperator;
    fn mul(self, a: RadialOperator) -> RadialOperator {
        a.premul(&self)
    }
}

impl Mul<RadialOperator> for f64 {
    type Output = RadialOperator;
    fn mul(self, a: RadialOperator) -> RadialOperator {
        a.scale(self)
    }
}
