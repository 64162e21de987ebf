//! Property tests for the analytic coverage and the sweep plumbing.

use d2dcov::model::db_to_linear;
use d2dcov::montecarlo::estimate_coverage;
use d2dcov::sweep::{run_sweep, write_csv_to, McSettings, SweepValues};
use d2dcov::{
    coverage_cellular, BoundKind, QuadratureSpec, ScenarioParams, SweepSpec, ThinningMode, ZipfLaw,
};
use proptest::prelude::*;

fn cov(params: &ScenarioParams, bound: BoundKind) -> f64 {
    coverage_cellular(params, bound, &QuadratureSpec::default())
        .unwrap()
        .value
}

prop_compose! {
    fn scenario()(
        lambda in 0.01e-3f64..0.5e-3,
        tau_db in -10.0f64..25.0,
        eps in 0.0f64..=1.0,
        r_d in 1.0f64..40.0,
        pi_dbm in -20.0f64..5.0,
    ) -> ScenarioParams {
        let mut p = ScenarioParams::baseline();
        p.density_per_m2 = lambda;
        p.sir_threshold_lin = db_to_linear(tau_db);
        p.power_control = eps;
        p.pairing_distance_m = r_d;
        p.p_d2d_interferer_w = 10f64.powf((pi_dbm - 30.0) / 10.0);
        p
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bounds_bracket_general(params in scenario()) {
        let ub = cov(&params, BoundKind::Upper);
        let lb = cov(&params, BoundKind::Lower);
        let mut prev = f64::INFINITY;
        for s in [1.0, 2.0, 4.0, 10.0] {
            let g = cov(&params, BoundKind::General(s));
            prop_assert!(g <= prev + 1e-12, "not non-increasing at s={}: {} > {}", s, g, prev);
            prop_assert!(lb - 1e-12 <= g && g <= ub + 1e-12, "s={}: {} {} {}", s, lb, g, ub);
            prev = g;
        }
        let g1 = cov(&params, BoundKind::General(1.0));
        prop_assert!((g1 - ub).abs() <= 1e-10);
        let g10 = cov(&params, BoundKind::General(10.0));
        prop_assert!((g10 - lb).abs() <= 1e-2);
        prop_assert!((0.0..=1.0).contains(&lb) && (0.0..=1.0).contains(&ub));
    }

    #[test]
    fn coverage_monotone(params in scenario(), k in 1.1f64..3.0) {
        for bound in [BoundKind::Upper, BoundKind::Lower] {
            let base = cov(&params, bound);
            let scaled = |f: &dyn Fn(&mut ScenarioParams)| {
                let mut p = params.clone();
                f(&mut p);
                cov(&p, bound)
            };
            prop_assert!(scaled(&|p| p.density_per_m2 *= k) <= base + 1e-12);
            prop_assert!(scaled(&|p| p.sir_threshold_lin *= k) <= base + 1e-12);
            prop_assert!(scaled(&|p| p.p_d2d_interferer_w *= k) <= base + 1e-12);
            prop_assert!(scaled(&|p| p.pairing_distance_m *= k) <= base + 1e-12);
            prop_assert!(scaled(&|p| p.p_cellular_w *= k) >= base - 1e-12);
            prop_assert!(scaled(&|p| p.power_control = (p.power_control + 0.1 * k).min(1.0)) >= base - 1e-12);
        }
    }
}

#[test]
fn tolerance_halving_within_reported_error() {
    for (lambda, eps) in [(0.03e-3, 0.0), (0.3e-3, 0.25), (1e-3, 0.5)] {
        let mut p = ScenarioParams::baseline();
        p.density_per_m2 = lambda;
        p.power_control = eps;
        for bound in [BoundKind::Upper, BoundKind::Lower, BoundKind::General(3.0)] {
            let q = QuadratureSpec::default();
            let a = coverage_cellular(&p, bound, &q).unwrap();
            let b = coverage_cellular(&p, bound, &q.with_rel_tol(q.rel_tol / 2.0)).unwrap();
            assert!(
                (a.value - b.value).abs() <= a.abs_err.max(b.abs_err),
                "{bound:?} lambda={lambda}: {} vs {} (err {})",
                a.value,
                b.value,
                a.abs_err
            );
        }
    }
}

#[test]
fn zipf_shape_ten_matches_lower_closely() {
    let mut p = ScenarioParams::baseline();
    p.zipf = ZipfLaw::new(10, 10.0).unwrap();
    let g = cov(&p, BoundKind::General(10.0));
    let lb = cov(&p, BoundKind::Lower);
    assert!(g >= lb && g - lb <= 1e-2);
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

#[test]
fn results_independent_of_thread_count() {
    let mut p = ScenarioParams::baseline();
    p.density_per_m2 = 0.3e-3;
    let one =
        pool(1).install(|| estimate_coverage(&p, ThinningMode::NearestNeighbor, 5000, 42).unwrap());
    let four =
        pool(4).install(|| estimate_coverage(&p, ThinningMode::NearestNeighbor, 5000, 42).unwrap());
    assert_eq!(one, four);

    let mut spec = SweepSpec::over("tau_db", SweepValues::List(vec![-5.0, 5.0, 15.0])).unwrap();
    spec.mc = Some(McSettings {
        trials: 1000,
        seed: 5,
        mode: ThinningMode::IndependentRetention,
    });
    spec.rate = true;
    let render = |threads| {
        pool(threads).install(|| {
            let mut buf = Vec::new();
            write_csv_to(&run_sweep(&p, &spec).unwrap(), &mut buf).unwrap();
            buf
        })
    };
    assert_eq!(render(1), render(3));
}
