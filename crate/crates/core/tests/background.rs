use dilaton_np::background::{background_jets, background_residuals};
use dilaton_np::{eval_background, params_from_horizons, Error};
use proptest::prelude::*;

// Closed forms written out directly, independent of the jet machinery.
fn chi2_direct(rp: f64, rm: f64, a: f64, r: f64) -> f64 {
    (1.0 - rp / r) * (1.0 - rm / r).powf((1.0 - a * a) / (1.0 + a * a))
}

fn rr_direct(rm: f64, a: f64, r: f64) -> f64 {
    r * (1.0 - rm / r).powf(a * a / (1.0 + a * a))
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn field_equations_hold_at_100_radii() {
    for a in [0.0, 1.0 / 3f64.sqrt(), 1.0] {
        let p = params_from_horizons(2.0, 1.0, a).unwrap();
        for i in 0..100 {
            let r = 2.0 * (1.05 + 18.95 * i as f64 / 99.0);
            let res = background_residuals(&p, r).unwrap();
            assert!(res.max_relative() < 1e-10, "a={a} r={r}: {}", res.max_relative());
        }
    }
}

#[test]
fn wrong_charge_breaks_dilaton_equation() {
    let p = params_from_horizons(2.0, 1.0, 1.0).unwrap();
    let bad = p.with_charge(1.1 * p.charge());
    let res = background_residuals(&bad, 4.0).unwrap();
    // raw value is 2a·ξφ₁²·0.21 ≈ 5.5e−4; the relative value is 0.09
    assert!((res.dilaton + 0.000546875).abs() < 1e-15, "{}", res.dilaton);
    assert!(res.max_relative() > 1e-3);
}

#[test]
fn a_zero_dilaton_residual_vanishes() {
    let p = params_from_horizons(3.0, 1.0, 0.0).unwrap();
    assert_eq!(background_residuals(&p, 5.0).unwrap().dilaton, 0.0);
}

#[test]
fn domain_guard() {
    let p = params_from_horizons(2.0, 1.0, 0.5).unwrap();
    assert!(matches!(background_jets(&p, 1.5, 2), Err(Error::HorizonDomain { .. })));
    assert!(matches!(eval_background(&p, f64::NAN), Err(Error::HorizonDomain { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spin_coefficients_match_closed_forms(
        rm in 0.1f64..1.9, a in 0.0f64..2.0, t in 1.02f64..30.0
    ) {
        let rp = 2.0;
        let r = rp * t;
        let p = params_from_horizons(rp, rm, a).unwrap();
        let b = eval_background(&p, r).unwrap();
        let chi2 = chi2_direct(rp, rm, a, r);
        let rr = rr_direct(rm, a, r);
        prop_assert!((b.chi2 - chi2).abs() <= 1e-13 * chi2.abs().max(1.0));
        prop_assert!((b.rr - rr).abs() <= 1e-13 * rr);
        let h = 1e-4 * r;
        let drr = central(|x| rr_direct(rm, a, x), r, h);
        let dchi2 = central(|x| chi2_direct(rp, rm, a, x), r, h);
        prop_assert!((b.rho + drr / rr).abs() <= 1e-8 * (drr / rr).abs().max(1e-3));
        prop_assert!((b.mu - 0.5 * chi2 * b.rho).abs() <= 1e-14 * b.mu.abs().max(1e-12));
        prop_assert!((b.gamma - 0.25 * dchi2).abs() <= 1e-8 * dchi2.abs().max(1e-3));
        prop_assert!((b.dltaphi + 0.5 * b.chi2 * b.dphi).abs() <= 1e-14 * b.dphi.abs().max(1e-12));
        let phi = -(a / (1.0 + a * a)) * (1.0 - rm / r).ln();
        prop_assert!((b.phi - phi).abs() <= 1e-13 * phi.abs().max(1e-12));
        prop_assert!((b.xi + (-2.0 * a * phi).exp()).abs() <= 1e-13 * b.xi.abs());
    }

    #[test]
    fn residuals_small_for_random_parameters(
        rm in 0.1f64..1.9, a in 0.0f64..2.0, t in 1.02f64..30.0
    ) {
        let p = params_from_horizons(2.0, rm, a).unwrap();
        let res = background_residuals(&p, 2.0 * t).unwrap();
        prop_assert!(res.max_relative() < 1e-10);
    }

    #[test]
    fn jet_derivatives_match_finite_differences(
        rm in 0.2f64..1.8, a in 0.0f64..1.5, t in 1.1f64..10.0
    ) {
        let p = params_from_horizons(2.0, rm, a).unwrap();
        let r = 2.0 * t;
        let b = eval_background(&p, r).unwrap();
        let h = 1e-3 * r;
        let d1 = central(|x| eval_background(&p, x).unwrap().chi2_jet[1], r, h);
        prop_assert!((b.chi2_jet[2] - d1).abs() <= 1e-7 * b.chi2_jet[2].abs().max(1e-4));
        let d2 = central(|x| eval_background(&p, x).unwrap().rr_jet[2], r, h);
        prop_assert!((b.rr_jet[3] - d2).abs() <= 1e-6 * b.rr_jet[3].abs().max(1e-4));
    }
}
