use dynpanel::montecarlo::{cointegration_experiment, CointExperiment};
use dynpanel::unitroot::{
    residual_tag, simulate_ll_null, simulate_moment_table, simulate_residual_moment_table, AdfSpec, Deterministic,
    LagOrder, MomentTable, BUNDLED_EXTRA_T, BUNDLED_MAX_REGRESSORS, BUNDLED_T,
};

const SEED: u64 = 20240601;

#[test]
fn bundled_entries_regenerate_bit_identically() {
    let bundled = MomentTable::bundled();
    let raw = simulate_moment_table(&[13], &AdfSpec::intercept(0), 50_000, SEED);
    assert_eq!(raw.get("intercept", 13).unwrap(), bundled.get("intercept", 13).unwrap());
    let spec = AdfSpec::new(Deterministic::None, LagOrder::Fixed(0));
    let resid = simulate_residual_moment_table(&[10], 2, &spec, 50_000, SEED);
    let tag = residual_tag(2, Deterministic::None);
    assert_eq!(resid.get(&tag, 10).unwrap(), bundled.get(&tag, 10).unwrap());
}

#[test]
fn bundled_grid_is_complete() {
    let bundled = MomentTable::bundled();
    let mut tags: Vec<String> = ["none", "intercept", "intercept_and_trend"].map(String::from).to_vec();
    tags.extend((1..=BUNDLED_MAX_REGRESSORS).map(|k| residual_tag(k, Deterministic::None)));
    for tag in &tags {
        for t in BUNDLED_T.chain(BUNDLED_EXTRA_T) {
            let e = bundled.get(tag, t).unwrap();
            assert!(e.mean < 0.0 && e.variance > 0.0);
            assert_eq!((e.replications, e.seed), (50_000, SEED));
        }
    }
    assert_eq!(bundled.len(), tags.len() * (BUNDLED_T.count() + BUNDLED_EXTRA_T.len()));
}

#[test]
fn intercept_moments_approach_their_limits() {
    let table = MomentTable::bundled();
    let mean = |t| table.get("intercept", t).unwrap().mean;
    let var = |t| table.get("intercept", t).unwrap().variance;
    // The mean drifts down towards its limit from T = 10 on.
    let long = [10, 25, 50, 100];
    assert!(long.windows(2).all(|w| mean(w[1]) <= mean(w[0])));
    assert!((mean(100) + 1.533).abs() < 0.02);
    let grid = [6, 10, 13, 25, 50, 100];
    assert!(grid.windows(2).all(|w| var(w[1]) < var(w[0])));
    assert!((var(100) - 0.706).abs() < 0.05);
}

#[test]
fn residual_moments_shift_left_with_more_regressors() {
    let table = MomentTable::bundled();
    for t in [13, 25, 50] {
        let means: Vec<f64> = (1..=BUNDLED_MAX_REGRESSORS)
            .map(|k| table.get(&residual_tag(k, Deterministic::None), t).unwrap().mean)
            .collect();
        assert!(means.windows(2).all(|w| w[1] < w[0]), "T={t}: {means:?}");
        assert!(means[0] < table.get("intercept", t).unwrap().mean);
    }
}

#[test]
fn levin_lin_null_has_finite_spread() {
    let null = simulate_ll_null(23, 13, &AdfSpec::intercept(0), 1000, 5);
    assert_eq!(null.draws.len(), 1000);
    assert!(null.draws.iter().all(|d| d.is_finite()));
    assert!(null.draws.windows(2).all(|w| w[0] <= w[1]));
    let n = null.draws.len() as f64;
    let m = null.draws.iter().sum::<f64>() / n;
    let v = null.draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(v.is_finite() && v > 0.0);
    assert!(m < 0.0);
}

fn coint(n_periods: usize, cointegrated: bool, seed: u64) -> f64 {
    let cfg = CointExperiment {
        n_entities: 23,
        n_periods,
        regressors: 1,
        cointegrated,
        noise_sd: 1.0,
        spec: AdfSpec::new(Deterministic::None, LagOrder::Fixed(0)),
        replications: 1000,
        seed,
    };
    let r = cointegration_experiment(&cfg, &MomentTable::bundled()).unwrap();
    assert_eq!(r.failures, 0);
    r.rejection.at_5pct
}

#[test]
fn cointegration_test_retains_the_null_for_independent_walks() {
    let rate = coint(13, false, 21);
    assert!(rate <= 0.10, "{rate}");
}

#[test]
fn cointegration_test_detects_stationary_residuals() {
    let rate = coint(50, true, 22);
    assert!(rate > 0.8, "{rate}");
}
