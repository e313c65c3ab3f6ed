use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analytic::{analytic_ols_bias, analytic_within_bias};
use super::dgp::{simulate_replication, DgpConfig, InitialCondition, XProcess};
use super::McError;
use crate::estimators::{anderson_hsiao, pooled_ols, within_estimator, AhInstrument};
use crate::gmm::{gmm_estimate, GmmOptions, GmmResult};
use crate::panel::{ModelSpec, PanelDataset};
use crate::stats::{mean_variance, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Ols,
    Within,
    AhDiff,
    AhLevel,
    Ab1,
    Ab2,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        EstimatorKind::Ols,
        EstimatorKind::Within,
        EstimatorKind::AhDiff,
        EstimatorKind::AhLevel,
        EstimatorKind::Ab1,
        EstimatorKind::Ab2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Ols => "ols",
            EstimatorKind::Within => "within",
            EstimatorKind::AhDiff => "ah_diff",
            EstimatorKind::AhLevel => "ah_level",
            EstimatorKind::Ab1 => "ab1",
            EstimatorKind::Ab2 => "ab2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Sargan,
    Ar1,
    Ar2,
}

impl TestKind {
    pub fn label(self) -> &'static str {
        match self {
            TestKind::Sargan => "sargan",
            TestKind::Ar1 => "ar1",
            TestKind::Ar2 => "ar2",
        }
    }
}

/// Experiment document: the DGP plus what to run on every draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_entities: usize,
    pub n_periods: usize,
    pub alpha: f64,
    #[serde(default)]
    pub beta: Vec<f64>,
    pub sigma_mu: f64,
    pub sigma_v: f64,
    #[serde(default = "stationary")]
    pub init: InitialCondition,
    #[serde(default)]
    pub x_process: XProcess,
    #[serde(default)]
    pub seed: u64,
    pub replications: usize,
    #[serde(default)]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub tests: Vec<TestKind>,
}

fn stationary() -> InitialCondition {
    InitialCondition::Stationary
}

impl ExperimentConfig {
    pub fn new(dgp: DgpConfig, replications: usize, estimators: &[EstimatorKind], tests: &[TestKind]) -> Self {
        Self {
            n_entities: dgp.n_entities,
            n_periods: dgp.n_periods,
            alpha: dgp.alpha,
            beta: dgp.beta,
            sigma_mu: dgp.sigma_mu,
            sigma_v: dgp.sigma_v,
            init: dgp.init,
            x_process: dgp.x_process,
            seed: dgp.seed,
            replications,
            estimators: estimators.to_vec(),
            tests: tests.to_vec(),
        }
    }

    pub fn dgp(&self) -> DgpConfig {
        DgpConfig {
            n_entities: self.n_entities,
            n_periods: self.n_periods,
            alpha: self.alpha,
            beta: self.beta.clone(),
            sigma_mu: self.sigma_mu,
            sigma_v: self.sigma_v,
            init: self.init,
            x_process: self.x_process,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.replications < 2 {
            return Err(McError::InvalidConfig(format!(
                "replications ≥ 2 required, got {}",
                self.replications
            )));
        }
        if self.estimators.is_empty() && self.tests.is_empty() {
            return Err(McError::InvalidConfig(
                "nothing to run: estimators and tests are both empty".into(),
            ));
        }
        self.dgp().validate()
    }

    fn model(&self) -> ModelSpec {
        let names = self.dgp().regressor_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        ModelSpec::dynamic("y", 1, &refs)
    }

    /// Fit whose diagnostics feed the requested tests: `ab2` when it is run,
    /// otherwise `ab1`, otherwise a dedicated two-step fit.
    fn test_source(&self) -> EstimatorKind {
        if self.estimators.contains(&EstimatorKind::Ab2) || !self.estimators.contains(&EstimatorKind::Ab1) {
            EstimatorKind::Ab2
        } else {
            EstimatorKind::Ab1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutcome {
    pub estimator: EstimatorKind,
    pub coefficients: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: TestKind,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub estimates: Vec<EstimateOutcome>,
    pub tests: Vec<TestOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub name: String,
    pub true_value: f64,
    pub mean: f64,
    pub mean_bias: f64,
    pub rmse: f64,
    pub std_dev: f64,
    /// Standard error of `mean` across replications.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    pub successes: usize,
    pub failures: usize,
    pub exclusion_rate: f64,
    pub coefficients: Vec<CoefficientSummary>,
    /// Probability-limit bias of the autoregressive coefficient, where known.
    pub analytic_bias: Option<f64>,
}

impl EstimatorSummary {
    pub fn alpha(&self) -> Option<&CoefficientSummary> {
        self.coefficients.first()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionRates {
    pub at_1pct: f64,
    pub at_5pct: f64,
    pub at_10pct: f64,
}

impl RejectionRates {
    pub(crate) fn from_p_values(p: &[f64]) -> Self {
        let rate = |level: f64| {
            if p.is_empty() {
                f64::NAN
            } else {
                p.iter().filter(|&&v| v < level).count() as f64 / p.len() as f64
            }
        };
        Self {
            at_1pct: rate(0.01),
            at_5pct: rate(0.05),
            at_10pct: rate(0.10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub test: TestKind,
    pub source: EstimatorKind,
    pub successes: usize,
    pub failures: usize,
    pub rejection: RejectionRates,
    pub mean_statistic: f64,
    pub negative_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub config: ExperimentConfig,
    pub coefficient_names: Vec<String>,
    pub estimators: Vec<EstimatorSummary>,
    pub tests: Vec<TestSummary>,
    pub outcomes: Vec<ReplicationOutcome>,
}

impl MCReport {
    pub fn estimator(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == kind)
    }

    pub fn test(&self, kind: TestKind) -> Option<&TestSummary> {
        self.tests.iter().find(|t| t.test == kind)
    }
}

enum Fit {
    Plain(Vec<f64>),
    Gmm(Box<GmmResult>),
}

fn fit(kind: EstimatorKind, data: &PanelDataset, model: &ModelSpec) -> Result<Fit, String> {
    let plain = |r: Result<crate::EstimateResult, crate::EstimatorError>| {
        r.map(|e| Fit::Plain(e.coefficients)).map_err(|e| e.to_string())
    };
    match kind {
        EstimatorKind::Ols => plain(pooled_ols(data, model)),
        EstimatorKind::Within => plain(within_estimator(data, &model.clone().with_intercept(false))),
        EstimatorKind::AhDiff => plain(anderson_hsiao(data, model, AhInstrument::DifferenceInstrument)),
        EstimatorKind::AhLevel => plain(anderson_hsiao(data, model, AhInstrument::LevelInstrument)),
        EstimatorKind::Ab1 => gmm_estimate(data, model, &GmmOptions::one_step())
            .map(|r| Fit::Gmm(Box::new(r)))
            .map_err(|e| e.to_string()),
        EstimatorKind::Ab2 => gmm_estimate(data, model, &GmmOptions::two_step())
            .map(|r| Fit::Gmm(Box::new(r)))
            .map_err(|e| e.to_string()),
    }
}

fn test_outcome(test: TestKind, source: Result<&GmmResult, &str>) -> TestOutcome {
    let result: Result<TestResult, String> = source.map_err(str::to_string).and_then(|g| {
        let found = match test {
            TestKind::Sargan => g.sargan.clone(),
            TestKind::Ar1 => g.ar_tests.iter().find(|(o, _)| *o == 1).map(|(_, t)| t.clone()),
            TestKind::Ar2 => g.ar_tests.iter().find(|(o, _)| *o == 2).map(|(_, t)| t.clone()),
        };
        found.ok_or_else(|| format!("{} not available for this fit", test.label()))
    });
    match result {
        Ok(t) => TestOutcome {
            test,
            statistic: Some(t.statistic),
            p_value: Some(t.p_value),
            error: None,
        },
        Err(e) => TestOutcome {
            test,
            statistic: None,
            p_value: None,
            error: Some(e),
        },
    }
}

fn replicate(config: &ExperimentConfig, dgp: &DgpConfig, model: &ModelSpec, rep: usize) -> ReplicationOutcome {
    let data = match simulate_replication(dgp, rep as u64) {
        Ok(d) => d,
        Err(e) => {
            let msg = e.to_string();
            return ReplicationOutcome {
                replication: rep,
                estimates: config
                    .estimators
                    .iter()
                    .map(|&estimator| EstimateOutcome {
                        estimator,
                        coefficients: None,
                        error: Some(msg.clone()),
                    })
                    .collect(),
                tests: config.tests.iter().map(|&t| test_outcome(t, Err(&msg))).collect(),
            };
        }
    };
    let k = 1 + dgp.beta.len();
    let mut estimates = Vec::with_capacity(config.estimators.len());
    let mut source: Option<Result<Box<GmmResult>, String>> = None;
    let wanted = config.test_source();
    for &kind in &config.estimators {
        let result = fit(kind, &data, model);
        let coefficients = match &result {
            Ok(Fit::Plain(c)) => Ok(c[..k].to_vec()),
            Ok(Fit::Gmm(g)) => Ok(g.coefficients()[..k].to_vec()),
            Err(e) => Err(e.clone()),
        };
        if kind == wanted && !config.tests.is_empty() {
            source = Some(match result {
                Ok(Fit::Gmm(g)) => Ok(g),
                Ok(Fit::Plain(_)) => unreachable!("GMM kinds return GMM fits"),
                Err(e) => Err(e),
            });
        }
        estimates.push(match coefficients {
            Ok(c) => EstimateOutcome {
                estimator: kind,
                coefficients: Some(c),
                error: None,
            },
            Err(e) => EstimateOutcome {
                estimator: kind,
                coefficients: None,
                error: Some(e),
            },
        });
    }
    if source.is_none() && !config.tests.is_empty() {
        source = Some(match fit(wanted, &data, model) {
            Ok(Fit::Gmm(g)) => Ok(g),
            Ok(Fit::Plain(_)) => unreachable!("GMM kinds return GMM fits"),
            Err(e) => Err(e),
        });
    }
    let tests = config
        .tests
        .iter()
        .map(|&t| {
            let src = match source.as_ref().expect("source fitted when tests are requested") {
                Ok(g) => Ok(g.as_ref()),
                Err(e) => Err(e.as_str()),
            };
            test_outcome(t, src)
        })
        .collect();
    ReplicationOutcome {
        replication: rep,
        estimates,
        tests,
    }
}

fn summarize_estimator(
    kind: EstimatorKind,
    index: usize,
    outcomes: &[ReplicationOutcome],
    truth: &[f64],
    names: &[String],
) -> EstimatorSummary {
    let draws: Vec<&Vec<f64>> = outcomes
        .iter()
        .filter_map(|o| o.estimates[index].coefficients.as_ref())
        .collect();
    let successes = draws.len();
    let failures = outcomes.len() - successes;
    let coefficients = truth
        .iter()
        .enumerate()
        .map(|(j, &true_value)| {
            let values: Vec<f64> = draws.iter().map(|c| c[j]).collect();
            let (mean, var) = mean_variance(&values);
            let mse = values.iter().map(|v| (v - true_value).powi(2)).sum::<f64>() / successes.max(1) as f64;
            let std_dev = var.sqrt();
            CoefficientSummary {
                name: names[j].clone(),
                true_value,
                mean,
                mean_bias: mean - true_value,
                rmse: mse.sqrt(),
                std_dev,
                mc_se: std_dev / (successes as f64).sqrt(),
            }
        })
        .collect();
    EstimatorSummary {
        estimator: kind,
        successes,
        failures,
        exclusion_rate: failures as f64 / outcomes.len().max(1) as f64,
        coefficients,
        analytic_bias: None,
    }
}

fn summarize_test(kind: TestKind, index: usize, source: EstimatorKind, outcomes: &[ReplicationOutcome]) -> TestSummary {
    let mut stats = Vec::new();
    let mut p = Vec::new();
    for o in outcomes {
        let t = &o.tests[index];
        if let (Some(s), Some(pv)) = (t.statistic, t.p_value) {
            stats.push(s);
            p.push(pv);
        }
    }
    let successes = stats.len();
    TestSummary {
        test: kind,
        source,
        successes,
        failures: outcomes.len() - successes,
        rejection: RejectionRates::from_p_values(&p),
        mean_statistic: mean_variance(&stats).0,
        negative_share: stats.iter().filter(|&&s| s < 0.0).count() as f64 / successes.max(1) as f64,
    }
}

/// Runs `config.replications` independent draws and aggregates them.
///
/// Replication `r` draws its panel from stream `r` of the seed and results
/// are reduced in replication order, so the report is identical for every
/// `threads` value. Estimator failures are recorded per replication and
/// excluded from the averages.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<MCReport, McError> {
    config.validate()?;
    let dgp = config.dgp();
    let model = config.model();
    let run = || -> Vec<ReplicationOutcome> {
        (0..config.replications)
            .into_par_iter()
            .map(|rep| replicate(config, &dgp, &model, rep))
            .collect()
    };
    let outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| McError::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let names = model.coefficient_names();
    let truth: Vec<f64> = std::iter::once(config.alpha)
        .chain(config.beta.iter().copied())
        .collect();
    let pure_ar = config.beta.is_empty();
    let estimators = config
        .estimators
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let mut s = summarize_estimator(kind, i, &outcomes, &truth, &names);
            s.analytic_bias = match kind {
                EstimatorKind::Within if pure_ar => analytic_within_bias(config.alpha, config.n_periods).ok(),
                EstimatorKind::Ols if pure_ar => analytic_ols_bias(
                    config.alpha,
                    config.sigma_mu.powi(2),
                    config.sigma_v.powi(2),
                    config.n_periods,
                    config.init,
                )
                .ok(),
                _ => None,
            };
            s
        })
        .collect();
    let source = config.test_source();
    let tests = config
        .tests
        .iter()
        .enumerate()
        .map(|(i, &kind)| summarize_test(kind, i, source, &outcomes))
        .collect();
    Ok(MCReport {
        config: config.clone(),
        coefficient_names: names,
        estimators,
        tests,
        outcomes,
    })
}
