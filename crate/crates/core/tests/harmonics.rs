use dilaton_np::harmonics::*;
use dilaton_np::params_from_horizons;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

// Goldberg's explicit sum, an independent oracle for sYlm. The library phase
// (Wigner d with no extra sign) differs from it by (−1)^s.
fn goldberg(s: i64, l: i64, m: i64, th: f64, ph: f64) -> Complex64 {
    let f = |n: i64| (1..=n).map(|k| k as f64).product::<f64>();
    let pre = ((f(l + m) * f(l - m) * (2 * l + 1) as f64) / (4.0 * PI * f(l + s) * f(l - s))).sqrt();
    let cot = 1.0 / (th / 2.0).tan();
    let mut sum = 0.0;
    for r in 0..=(l - s) {
        let sign = if (l - r - s) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom(l - s, r) * binom(l + s, r + s - m) * cot.powi((2 * r + s - m) as i32);
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::from_polar(sign * pre * (th / 2.0).sin().powi((2 * l) as i32) * sum, m as f64 * ph)
}

#[test]
fn worked_values() {
    let y = swsh(0, 0, 0, 1.0, 2.0).unwrap();
    assert!((y.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y.im == 0.0);
    let y = swsh(0, 1, 0, 0.0, 0.0).unwrap();
    assert!((y.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
    assert_eq!(edth_raise_coeff(-2, 2).unwrap(), 2.0);
    assert_eq!(edth_raise_coeff(2, 2).unwrap(), 0.0);
    assert_eq!(edth_lower_coeff(-2, 2).unwrap(), 0.0);
    assert_eq!(angular_eigenvalue(2).unwrap(), 4.0);
    assert_eq!(angular_eigenvalue(3).unwrap(), 10.0);
    assert!(angular_eigenvalue(1).is_err());
}

#[test]
fn matches_goldberg_sum() {
    for (s, l, m) in [(-2, 2, 2), (-2, 3, -1), (1, 4, 0), (2, 5, 3), (0, 3, 2)] {
        for th in [0.3, 1.1, 2.0, 2.9] {
            let a = swsh(s, l as u32, m, th, 0.7).unwrap();
            let b = goldberg(s as i64, l, m as i64, th, 0.7) * if s % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a - b).norm() < 1e-12, "s={s} l={l} m={m} th={th}: {a} vs {b}");
        }
    }
}

#[test]
fn orthonormal_up_to_l5() {
    let mut worst: f64 = 0.0;
    for s in -2i32..=2 {
        for l1 in s.unsigned_abs()..=5 {
            for l2 in s.unsigned_abs()..=5 {
                let mm = l1.min(l2) as i32;
                for m in -mm..=mm {
                    let v = inner_product(s, l1, m, l2, m, 64).unwrap();
                    let t = if l1 == l2 { 1.0 } else { 0.0 };
                    worst = worst.max((v - t).norm());
                }
            }
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn ladder_residuals() {
    assert!(ladder_numeric_check(-2, 3, 0, 256).unwrap() < 1e-6);
    assert!(ladder_numeric_check(0, 2, 1, 256).unwrap() < 1e-6);
    assert!(ladder_numeric_check(2, 2, 0, 16).is_err());
    for s in -1..=1 {
        for l in 2..=5u32 {
            for m in -(l as i32)..=(l as i32) {
                let v = ladder_numeric_check(s, l, m, 64).unwrap();
                assert!(v < 1e-6, "s={s} l={l} m={m}: {v}");
            }
        }
    }
}

#[test]
fn composite_eigenvalues_agree_across_spin() {
    for l in 2..=4u32 {
        for theta in [0.6, 1.4, 2.3] {
            let minus = composite_eigenvalue_numeric(l, 1, theta).unwrap();
            let plus = composite_eigenvalue_spin2_numeric(l, 1, theta).unwrap();
            let l2 = angular_eigenvalue(l).unwrap();
            assert!((minus + l2).norm() < 1e-6 * l2, "l={l}: {minus}");
            assert!((plus + l2).norm() < 1e-6 * l2, "l={l}: {plus}");
        }
    }
}

#[test]
fn commutation_relations() {
    let bh = params_from_horizons(2.0, 1.0, 1.0).unwrap();
    assert!(commutation_check(&bh, 0.0, 0.0, 0.0, RadialTestFn::One, -2, 2, 0, 20).unwrap() < 1e-8);
    assert!(commutation_check(&bh, 2.0, -4.0, 1.0, RadialTestFn::DecayingExp, -2, 3, 1, 20).unwrap() < 1e-7);
    assert_eq!(commutation_check(&bh, 1.0, 1.0, 1.0, RadialTestFn::Zero, 0, 2, 0, 5).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugation_symmetry(s in -2i32..=2, l in 2u32..=5, m0 in 0i32..=10, th in 0.05f64..3.09, ph in 0.0f64..6.28) {
        let m = m0 % (2 * l as i32 + 1) - l as i32;
        // conj(sYlm) = (−1)^{s+m} (−s)Y_{l,−m}
        let sign = if (s + m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let lhs = swsh(s, l, m, th, ph).unwrap().conj();
        let rhs = swsh(-s, l, -m, th, ph).unwrap() * sign;
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials(n in 2usize..40, k in 0u32..6) {
        let deg = (2 * n - 1).min(2 * k as usize + 1) as i32;
        let (x, w) = gauss_legendre(n);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg - 1)).sum();
        let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
        prop_assert!((q - exact).abs() < 1e-13);
    }
}
