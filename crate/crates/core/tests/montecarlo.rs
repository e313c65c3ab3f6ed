use dynpanel::montecarlo::{
    analytic_ols_bias, run_experiment, DgpConfig, EstimatorKind, ExperimentConfig, InitialCondition, MCReport,
};

fn run(dgp: DgpConfig, reps: usize, estimators: &[EstimatorKind]) -> MCReport {
    run_experiment(&ExperimentConfig::new(dgp, reps, estimators, &[]), None).unwrap()
}

fn alpha_bias(r: &MCReport, kind: EstimatorKind) -> (f64, f64) {
    let a = r.estimator(kind).unwrap().alpha().unwrap();
    (a.mean_bias, a.mc_se)
}

#[test]
fn within_and_ols_bracket_the_true_alpha() {
    let r = run(
        DgpConfig::ar1(2000, 5, 0.5, 11),
        200,
        &[EstimatorKind::Within, EstimatorKind::Ols],
    );
    let within = r.estimator(EstimatorKind::Within).unwrap().alpha().unwrap().mean;
    let ols = r.estimator(EstimatorKind::Ols).unwrap().alpha().unwrap().mean;
    assert!(within < 0.5 && 0.5 < ols, "{within} {ols}");
}

#[test]
fn iv_and_gmm_bias_shrinks_with_n() {
    let kinds = [
        EstimatorKind::AhDiff,
        EstimatorKind::AhLevel,
        EstimatorKind::Ab1,
        EstimatorKind::Ab2,
    ];
    let small = run(DgpConfig::ar1(100, 5, 0.5, 12), 300, &kinds);
    let large = run(DgpConfig::ar1(800, 5, 0.5, 13), 300, &kinds);
    for k in kinds {
        let (b100, se100) = alpha_bias(&small, k);
        let (b800, se800) = alpha_bias(&large, k);
        let se = (se100 * se100 + se800 * se800).sqrt();
        assert!(
            b800.abs() < b100.abs() + 2.0 * se,
            "{k:?}: {b100} -> {b800} (s.e. {se})"
        );
    }
}

#[test]
fn ols_bias_matches_plim_at_large_n() {
    for (sigma_mu, init) in [
        (0.5, InitialCondition::Stationary),
        (1.0, InitialCondition::Stationary),
        (2.0, InitialCondition::Stationary),
        (1.0, InitialCondition::FixedZero),
    ] {
        let mut dgp = DgpConfig::ar1(5000, 5, 0.5, 14);
        dgp.sigma_mu = sigma_mu;
        dgp.init = init;
        let r = run(dgp, 40, &[EstimatorKind::Ols]);
        let (bias, _) = alpha_bias(&r, EstimatorKind::Ols);
        let plim = analytic_ols_bias(0.5, sigma_mu * sigma_mu, 1.0, 5, init).unwrap();
        assert!(
            (bias - plim).abs() < 0.01,
            "sigma_mu={sigma_mu} {init:?}: {bias} vs {plim}"
        );
    }
}

#[test]
fn exogenous_coefficients_are_recovered() {
    let mut dgp = DgpConfig::ar1(500, 6, 0.5, 15);
    dgp.beta = vec![0.4, -0.2];
    let r = run(dgp, 100, &[EstimatorKind::Ab2]);
    let e = r.estimator(EstimatorKind::Ab2).unwrap();
    assert_eq!(r.coefficient_names, ["y(-1)", "x1", "x2"]);
    for c in &e.coefficients {
        assert!(c.mean_bias.abs() < 0.03, "{}: {}", c.name, c.mean_bias);
    }
}

#[test]
fn report_round_trips_through_json() {
    let r = run(DgpConfig::ar1(30, 5, 0.3, 16), 5, &EstimatorKind::ALL);
    let text = serde_json::to_string(&r).unwrap();
    let back: MCReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
