use dilaton_np::opalg::{EntryPerturbation, Jet, MatrixKind};
use dilaton_np::reconstruct::*;
use dilaton_np::solver::{integrate, jet_extend, PotentialState, Tolerances};
use dilaton_np::{eval_background, params_from_horizons, BlackHoleParams, ModeSpec};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn start(k: f64) -> PotentialState {
    PotentialState {
        psi: std::array::from_fn(|i| C::new((1.3 * i as f64 + k).cos(), (i as f64 - 0.5 * k).sin())),
        dpsi: std::array::from_fn(|i| C::new((i as f64 * k).sin(), 0.2 * (2.0 * i as f64 + k).cos())),
    }
}

fn p(a: f64) -> BlackHoleParams {
    params_from_horizons(2.0, 1.0, a).unwrap()
}

fn cpx() -> impl Strategy<Value = C> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C::new(a, b))
}

#[test]
fn decoupled_system_holds_on_solutions() {
    for a in [0.0, 1.0 / 3f64.sqrt(), 1.0] {
        for (l, w) in [(2, 0.0), (2, 0.3), (3, 1.0)] {
            let mode = ModeSpec::new(l, 0, w).unwrap();
            let t = integrate(&p(a), &mode, &start(a + w), 2.1, 40.0, Tolerances::default()).unwrap();
            let res = verify_decoupled(&t, &t.sample_radii(15)).unwrap();
            assert!(res.max() < 1e-6, "a={a} l={l} w={w}: {:?}", res.rows);
        }
    }
}

#[test]
fn probe_on_o_is_detected() {
    let mode = ModeSpec::new(2, 0, 0.3).unwrap();
    let t = integrate(&p(1.0), &mode, &start(0.1), 2.1, 40.0, Tolerances::default()).unwrap();
    let probe = EntryPerturbation { kind: MatrixKind::Decoupled, i: 3, j: 3, eps: 1e-2 };
    let res = verify_decoupled_with(&t, &t.sample_radii(10), Some(&probe)).unwrap();
    assert!(res.max() > 1e-3, "{:?}", res.rows);
}

#[test]
fn zero_trace_gives_zero_residuals() {
    let mode = ModeSpec::new(3, 0, 1.0).unwrap();
    let t = integrate(&p(0.5), &mode, &PotentialState::zero(), 2.1, 10.0, Tolerances::default()).unwrap();
    assert_eq!(verify_decoupled(&t, &t.sample_radii(5)).unwrap().max(), 0.0);
    assert_eq!(verify_algebraic_relations(&[C::new(0.0, 0.0); 5], &p(0.5), &mode, 5.0).unwrap(), [0.0; 3]);
}

#[test]
fn unit_map_worked_value() {
    let bh = p(1.0);
    let r = 4.0;
    let b = eval_background(&bh, r).unwrap();
    let psi = [C::new(1.0, 0.0), C::new(0.0, 2.0), C::new(3.0, 0.0), C::new(0.0, -1.0), C::new(0.5, 0.5)];
    let v = decoupled_minus(&psi, &bh, r).unwrap().to_array();
    let q2x = bh.charge() * bh.charge() * b.xi;
    let r4 = b.rr.powi(4);
    let want = [
        psi[1] / r4,
        psi[0] / r4,
        -psi[3] / (2.0 * q2x),
        psi[2] / (2.0 * q2x),
        0.5 * (psi[4] / r4 + (b.dphi * psi[2] + b.dltaphi * psi[3]) / q2x),
    ];
    for k in 0..5 {
        assert!((v[k] - want[k]).norm() < 1e-14 * want[k].norm().max(1.0), "k={k}");
    }
}

#[test]
fn reconstructed_fields_are_real() {
    let mode = ModeSpec::new(2, 1, 0.3).unwrap();
    let bh = p(0.7);
    let t = integrate(&bh, &mode, &start(0.8), 2.1, 30.0, Tolerances::default()).unwrap();
    let conj = t.conjugate();
    for r in [3.0, 9.0, 25.0] {
        let psi = jet_extend(&t, r, 4).unwrap();
        let psib = jet_extend(&conj, r, 4).unwrap();
        let fv = fields_from_potentials(&psi, &psib, &bh, &mode, r).unwrap();
        for (tt, th, ph) in [(0.0, 0.4, 0.1), (1.7, 1.9, 2.5)] {
            assert!(reality_defect(&fv, &mode, tt, th, ph).unwrap() < 1e-12);
        }
    }
}

#[test]
fn plus_sector_needs_fourth_order_jets() {
    let jets = [Jet::constant(1.0, 3); 5];
    let mode = ModeSpec::new(2, 0, 0.3).unwrap();
    assert!(decoupled_plus(&jets, &p(1.0), &mode, 4.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn algebraic_relations_hold_for_any_potentials(
        g in cpx(), h in cpx(), e in cpx(), f in cpx(), d in cpx(),
        a in 0.0f64..1.5, t in 1.05f64..20.0, l in 2u32..=3, w in -1.0f64..1.0
    ) {
        let mode = ModeSpec::new(l, 0, w).unwrap();
        let res = verify_algebraic_relations(&[g, h, e, f, d], &p(a), &mode, 2.0 * t).unwrap();
        prop_assert!(res.iter().all(|&x| x < 1e-12), "{:?}", res);
    }
}
