//! Truncated Taylor jets with complex coefficients.
//!
//! A jet of order `n` carries `f(r), f'(r), …, f^(n)(r)`. Internally the
//! normalised Taylor coefficients `f^(k)(r)/k!` are stored, which turns
//! products into Cauchy convolutions.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of Taylor slots; the largest representable order is `JET_CAP - 1`.
pub const JET_CAP: usize = 13;

const FACT: [f64; JET_CAP] = {
    let mut f = [1.0; JET_CAP];
    let mut k = 1;
    while k < JET_CAP {
        f[k] = f[k - 1] * k as f64;
        k += 1;
    }
    f
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    t: [Complex64; JET_CAP],
}

impl Jet {
    fn blank(order: usize) -> Self {
        assert!(order < JET_CAP, "jet order {order} exceeds capacity");
        Jet { order, t: [Complex64::new(0.0, 0.0); JET_CAP] }
    }

    pub fn constant(c: impl Into<Complex64>, order: usize) -> Self {
        let mut j = Self::blank(order);
        j.t[0] = c.into();
        j
    }

    pub fn zero(order: usize) -> Self {
        Self::blank(order)
    }

    /// The identity function `x ↦ x` expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Self::blank(order);
        j.t[0] = x0.into();
        if order >= 1 {
            j.t[1] = 1.0.into();
        }
        j
    }

    /// Build from derivative values `[f, f', f'', …]`.
    pub fn from_derivatives(d: &[Complex64]) -> Self {
        assert!(!d.is_empty());
        let mut j = Self::blank(d.len() - 1);
        for (k, v) in d.iter().enumerate() {
            j.t[k] = v / FACT[k];
        }
        j
    }

    /// Build from normalised Taylor coefficients `f^(k)/k!`.
    pub fn from_taylor(t: &[Complex64]) -> Self {
        assert!(!t.is_empty());
        let mut j = Self::blank(t.len() - 1);
        j.t[..t.len()].copy_from_slice(t);
        j
    }

    /// Polynomial `Σ c_k (x - x0)^k` as a jet at `x0`.
    pub fn polynomial(coeffs: &[Complex64], order: usize) -> Self {
        let mut j = Self::blank(order);
        for (k, c) in coeffs.iter().enumerate().take(order + 1) {
            j.t[k] = *c;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> Complex64 {
        self.t[0]
    }

    pub fn re(&self) -> f64 {
        self.t[0].re
    }

    pub fn derivative(&self, k: usize) -> Complex64 {
        assert!(k <= self.order, "derivative {k} beyond jet order {}", self.order);
        self.t[k] * FACT[k]
    }

    pub fn derivatives(&self) -> Vec<Complex64> {
        (0..=self.order).map(|k| self.derivative(k)).collect()
    }

    pub fn taylor(&self) -> &[Complex64] {
        &self.t[..=self.order]
    }

    /// `d/dr`, lowering the order by one.
    pub fn diff(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut j = Self::blank(self.order - 1);
        for k in 0..self.order {
            j.t[k] = self.t[k + 1] * (k + 1) as f64;
        }
        j
    }

    pub fn diff_n(&self, n: usize) -> Self {
        (0..n).fold(*self, |j, _| j.diff())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut j = *self;
        j.order = order.min(self.order);
        for k in j.order + 1..JET_CAP {
            j.t[k] = Complex64::new(0.0, 0.0);
        }
        j
    }

    pub fn conj(&self) -> Self {
        let mut j = *self;
        for c in j.t.iter_mut() {
            *c = c.conj();
        }
        j
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        let mut j = *self;
        for v in j.t[..=j.order].iter_mut() {
            *v *= c;
        }
        j
    }

    pub fn recip(&self) -> Self {
        let a0 = self.t[0];
        assert!(a0.norm() > 0.0, "reciprocal of a jet with zero value");
        let mut q = Self::blank(self.order);
        q.t[0] = a0.inv();
        for k in 1..=self.order {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 1..=k {
                s += self.t[i] * q.t[k - i];
            }
            q.t[k] = -s / a0;
        }
        q
    }

    pub fn exp(&self) -> Self {
        let mut e = Self::blank(self.order);
        e.t[0] = self.t[0].exp();
        for k in 1..=self.order {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 1..=k {
                s += self.t[i] * e.t[k - i] * i as f64;
            }
            e.t[k] = s / k as f64;
        }
        e
    }

    pub fn ln(&self) -> Self {
        let a0 = self.t[0];
        let mut g = Self::blank(self.order);
        g.t[0] = a0.ln();
        for k in 1..=self.order {
            let mut s = self.t[k] * k as f64;
            for i in 1..k {
                s -= g.t[i] * self.t[k - i] * i as f64;
            }
            g.t[k] = s / (a0 * k as f64);
        }
        g
    }

    /// Real power of a jet whose value is a positive real number.
    pub fn powf(&self, p: f64) -> Self {
        let a0 = self.t[0];
        let mut g = Self::blank(self.order);
        g.t[0] = a0.powf(p);
        for k in 1..=self.order {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 1..=k {
                s += self.t[i] * g.t[k - i] * (p * i as f64 - (k - i) as f64);
            }
            g.t[k] = s / (a0 * k as f64);
        }
        g
    }

    pub fn powi(&self, n: i32) -> Self {
        let base = if n < 0 { self.recip() } else { *self };
        let mut acc = Jet::constant(1.0, self.order);
        for _ in 0..n.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.t[..=self.order].iter().enumerate().map(|(k, c)| c.norm() * FACT[k]).fold(0.0, f64::max)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut j = Self::blank(self.order.min(o.order));
        for k in 0..=j.order {
            j.t[k] = self.t[k] + o.t[k];
        }
        j
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut j = Self::blank(self.order.min(o.order));
        for k in 0..=j.order {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..=k {
                s += self.t[i] * o.t[k - i];
            }
            j.t[k] = s;
        }
        j
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

macro_rules! scalar_ops {
    ($t:ty) => {
        impl Add<$t> for Jet {
            type Output = Jet;
            fn add(self, c: $t) -> Jet {
                let mut j = self;
                j.t[0] += Complex64::from(c);
                j
            }
        }
        impl Sub<$t> for Jet {
            type Output = Jet;
            fn sub(self, c: $t) -> Jet {
                let mut j = self;
                j.t[0] -= Complex64::from(c);
                j
            }
        }
        impl Mul<$t> for Jet {
            type Output = Jet;
            fn mul(self, c: $t) -> Jet {
                self.scale(c)
            }
        }
        impl Div<$t> for Jet {
            type Output = Jet;
            fn div(self, c: $t) -> Jet {
                self.scale(Complex64::from(c).inv())
            }
        }
        impl Mul<Jet> for $t {
            type Output = Jet;
            fn mul(self, j: Jet) -> Jet {
                j.scale(self)
            }
        }
        impl Add<Jet> for $t {
            type Output = Jet;
            fn add(self, j: Jet) -> Jet {
                j + self
            }
        }
        impl Sub<Jet> for $t {
            type Output = Jet;
            fn sub(self, j: Jet) -> Jet {
                (-j) + self
            }
        }
        impl Div<Jet> for $t {
            type Output = Jet;
            fn div(self, j: Jet) -> Jet {
                j.recip().scale(self)
            }
        }
    };
}

scalar_ops!(f64);
scalar_ops!(Complex64);
