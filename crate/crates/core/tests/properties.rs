use decolab_core::cubic::{characteristic_roots, cubic_coefficients};
use decolab_core::entanglement::{concurrence, concurrence_value, detect_roe, fit_quadratic, ConcurrenceSeries};
use decolab_core::propagator::{p_analytic, CONTRACTIVITY_TOL};
use decolab_core::{InitialState, ReducedParams, TimeGrid};
use proptest::prelude::*;

fn reduced() -> impl Strategy<Value = ReducedParams> {
    (0.005f64..5.0, 0.0f64..50.0, 0.0f64..100.0, 0.0f64..0.3)
        .prop_map(|(x1, x2, x3, beta)| ReducedParams::new(x1, x2, x3, beta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn starts_at_one_and_never_grows(r in reduced()) {
        let grid = TimeGrid::new(0.0, 40.0, 801).unwrap();
        let p = p_analytic(&grid, &r).unwrap();
        prop_assert!((p.values[0] - 1.0).norm() < 1e-12);
        prop_assert!(p.values.iter().all(|v| v.norm() <= 1.0 + CONTRACTIVITY_TOL));
    }

    #[test]
    fn roots_solve_the_cubic(r in reduced()) {
        let k = cubic_coefficients(&r);
        for q in characteristic_roots(&r).roots().roots() {
            let m = q.norm();
            let scale = m.powi(3) + k.c2.norm() * m * m + k.c1.norm() * m + k.c0.norm();
            prop_assert!(k.eval(q).norm() <= 1e-10 * scale);
            // Every mode decays.
            prop_assert!(q.re < 0.0);
        }
    }

    #[test]
    fn atoms_at_rest_ignore_omega0(x1 in 0.005f64..5.0, x3 in 0.0f64..50.0, x2a in 0.0f64..50.0, x2b in 0.0f64..50.0) {
        let grid = TimeGrid::new(0.0, 10.0, 101).unwrap();
        let a = p_analytic(&grid, &ReducedParams::new(x1, x2a, x3, 0.0).unwrap()).unwrap();
        let b = p_analytic(&grid, &ReducedParams::new(x1, x2b, x3, 0.0).unwrap()).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn concurrence_bounds_and_phase_invariance(m in 0.0f64..=1.0, a in 0.01f64..0.99, phase in -3.2f64..3.2) {
        let s = InitialState::new(a, 0.0).unwrap();
        let c = concurrence_value(m, &s);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert_eq!(c, concurrence_value(m, &InitialState::new(a, phase).unwrap()));
        prop_assert!(c <= 2.0 * a * s.b_mag() + 1e-15);
    }

    #[test]
    fn maximally_entangled_concurrence_is_fourth_power(r in reduced()) {
        let grid = TimeGrid::new(0.0, 20.0, 201).unwrap();
        let p = p_analytic(&grid, &r).unwrap();
        let c = concurrence(&p, &InitialState::maximally_entangled());
        for (v, cv) in p.values.iter().zip(&c.values) {
            prop_assert!((cv - v.norm().powi(4)).abs() < 1e-14);
        }
    }

    #[test]
    fn strictly_positive_series_never_revives(decay in 0.001f64..0.05, level in 0.01f64..0.5) {
        let grid = TimeGrid::new(0.0, 50.0, 5001).unwrap();
        let c = ConcurrenceSeries { grid, values: grid.points().map(|x| level * (-decay * x).exp()).collect() };
        let r = detect_roe(&c).unwrap();
        prop_assert!(!r.roe_occurs && r.revival_times.is_empty());
    }

    #[test]
    fn fit_recovers_quadratics(c2 in -10.0f64..10.0, c1 in -10.0f64..10.0, c0 in -10.0f64..10.0, n in 3usize..30) {
        let pts: Vec<_> = (0..n).map(|k| k as f64 * 0.37 - 2.0).map(|z| (z, (c2 * z + c1) * z + c0)).collect();
        let f = fit_quadratic(&pts).unwrap();
        prop_assert!((f.c2 - c2).abs() < 1e-9 && (f.c1 - c1).abs() < 1e-9 && (f.c0 - c0).abs() < 1e-9);
        prop_assert!(f.rms_residual >= 0.0 && f.rms_residual < 1e-9);
    }
}
