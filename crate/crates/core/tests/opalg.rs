use dilaton_np::opalg::entries::{build_o, build_o_dagger, principal_part, SeparatedContext};
use dilaton_np::opalg::identities::{random_poly_jet, verify_identities};
use dilaton_np::opalg::{separated_d, Jet, RadialOperator};
use dilaton_np::{params_from_horizons, ModeSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn separated_d_on_identity_function() {
    let p = params_from_horizons(2.0, 1.0, 1.0).unwrap();
    let mode = ModeSpec::new(2, 0, 1.0).unwrap();
    let d = separated_d(&p, &mode, 4.0).unwrap();
    let out = d.apply(&Jet::variable(4.0, 3));
    assert!((out.value() - c(1.0, -8.0)).norm() < 1e-14, "{}", out.value());

    let still = separated_d(&p, &ModeSpec::new(2, 0, 0.0).unwrap(), 4.0).unwrap();
    assert_eq!(still.coeff_value(0), c(0.0, 0.0));
}

#[test]
fn d_bar_is_conjugate_of_d() {
    let p = params_from_horizons(2.0, 1.0, 0.6).unwrap();
    let ctx = SeparatedContext::new(&p, &ModeSpec::new(3, 1, 0.7).unwrap(), 5.5, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_poly_jet(&mut rng);
    let lhs = ctx.d_bar().apply(&f.conj());
    let rhs = ctx.d().apply(&f).conj();
    assert!((lhs - rhs).max_abs() < 1e-14);
}

#[test]
fn leibniz_base_cases() {
    let x = Jet::variable(2.0, 6);
    let f = x * x + 1.0;
    let comp = RadialOperator::d_r(6).compose(&RadialOperator::mul(f)).unwrap();
    assert_eq!(comp.coeff_value(1), f.value());
    assert_eq!(comp.coeff_value(0), f.diff().value());
    let dd = RadialOperator::d_r(6).compose(&RadialOperator::d_r(6)).unwrap();
    assert!((dd.apply(&(x * x * x)).value() - c(12.0, 0.0)).norm() < 1e-14);
}

#[test]
fn static_entries_reduce_to_first_order() {
    let p = params_from_horizons(2.0, 1.0, 1.0).unwrap();
    let mode = ModeSpec::new(2, 0, 0.0).unwrap();
    let r = 4.0;
    let o = build_o(&p, &mode, r).unwrap();
    let ctx = SeparatedContext::new(&p, &mode, r, 4).unwrap();
    let b = &ctx.bg;
    let o31 = o.label(3, 1);
    assert_eq!(o31.max_order(), 1);
    assert!((o31.coeff_value(1) - (-0.5 * b.chi2).value()).norm() < 1e-15);
    assert!((o31.coeff_value(0) - (-4.0 * b.gamma + 2.0 * b.mu).value()).norm() < 1e-15);
    let od = build_o_dagger(&p, &mode, r).unwrap();
    let od42 = od.label(4, 2);
    assert_eq!(od42.coeff_value(1), c(-1.0, 0.0));
    assert_eq!(od42.coeff_value(0), c(0.0, 0.0));
}

#[test]
fn adjoint_principal_part_is_invertible() {
    let p = params_from_horizons(2.0, 1.0, 1.0).unwrap();
    let mode = ModeSpec::new(2, 0, 0.3).unwrap();
    let a = principal_part(&build_o_dagger(&p, &mode, 4.0).unwrap()).unwrap();
    assert!(a.determinant().norm() > 0.0);
    assert_eq!(a[(0, 1)], c(0.0, 0.0));
    assert_eq!(a[(1, 0)], c(0.0, 0.0));
    let cond = |r: f64| {
        let a = principal_part(&build_o_dagger(&p, &mode, r).unwrap()).unwrap();
        let sv = a.singular_values();
        sv.max() / sv.min()
    };
    assert!(cond(2.01) > cond(2.5));
}

#[test]
fn identities_hold_on_a_grid() {
    for a in [0.0, 1.0 / 3f64.sqrt(), 1.0] {
        let p = params_from_horizons(2.0, 1.0, a).unwrap();
        for l in [2, 3] {
            for w in [0.0, 0.3, 1.0] {
                let rep = verify_identities(&p, &ModeSpec::new(l, 0, w).unwrap(), 50, 5).unwrap();
                assert!(rep.results.len() >= 13);
                assert!(rep.all_below(1e-8), "a={a} l={l} w={w}: {}", rep.max_residual());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Composing then applying agrees with applying twice.
    #[test]
    fn composition_matches_sequential_application(
        seed in any::<u64>(), a in 0.0f64..1.5, w in -2.0f64..2.0, t in 1.05f64..15.0
    ) {
        let p = params_from_horizons(2.0, 1.0, a).unwrap();
        let ctx = SeparatedContext::new(&p, &ModeSpec::new(2, 1, w).unwrap(), 2.0 * t, 6).unwrap();
        let b = &ctx.bg;
        let outer = ctx.d() - 5.0 * b.rho;
        let inner = ctx.delta() - 4.0 * b.gamma + b.mu;
        let comp = outer.compose(&inner).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_poly_jet(&mut rng);
        let lhs = comp.apply(&f).value();
        let rhs = outer.apply(&inner.apply(&f)).value();
        let scale = lhs.norm().max(rhs.norm()).max(1.0);
        prop_assert!((lhs - rhs).norm() < 1e-12 * scale);
    }

    /// Jet products obey the Leibniz rule at every order.
    #[test]
    fn jet_product_rule(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_poly_jet(&mut rng);
        let g = random_poly_jet(&mut rng);
        let lhs = (f * g).diff();
        let rhs = f.diff() * g + f * g.diff();
        prop_assert!((lhs - rhs).max_abs() <= 1e-14 * lhs.max_abs().max(1.0));
    }
}
