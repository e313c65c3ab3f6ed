use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::RejectionRates;
use super::McError;
use crate::panel::{ModelSpec, PanelDataset};
use crate::stats::{mean_variance, replication_rng};
use crate::unitroot::{ips_tbar_test, residual_cointegration_test, AdfSpec, MomentTable};

/// IPS experiment on `y_it = (1-ρ) μ_i + ρ y_{i,t-1} + e_it`.
///
/// For `ρ < 1` the first value is drawn from the stationary law; for `ρ = 1`
/// the walk starts at `μ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpsExperiment {
    pub n_entities: usize,
    pub n_periods: usize,
    pub rho: f64,
    pub sigma_mu: f64,
    pub spec: AdfSpec,
    pub replications: usize,
    pub seed: u64,
}

/// Residual cointegration experiment: `K` independent random-walk regressors
/// and `y = Σ_k x_k + u`, with `u` a random walk (no cointegration) or white
/// noise with standard deviation `noise_sd` (cointegration).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CointExperiment {
    pub n_entities: usize,
    pub n_periods: usize,
    pub regressors: usize,
    pub cointegrated: bool,
    pub noise_sd: f64,
    pub spec: AdfSpec,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub successes: usize,
    pub failures: usize,
    pub rejection: RejectionRates,
    pub mean_statistic: f64,
}

fn summarize(draws: Vec<Option<(f64, f64)>>) -> RejectionSummary {
    let ok: Vec<(f64, f64)> = draws.iter().flatten().copied().collect();
    let stats: Vec<f64> = ok.iter().map(|d| d.0).collect();
    let p: Vec<f64> = ok.iter().map(|d| d.1).collect();
    RejectionSummary {
        successes: ok.len(),
        failures: draws.len() - ok.len(),
        rejection: RejectionRates::from_p_values(&p),
        mean_statistic: mean_variance(&stats).0,
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn dataset(n: usize, t: usize, columns: Vec<(&str, Vec<f64>)>) -> PanelDataset {
    PanelDataset::new(
        (1..=n).map(|i| i.to_string()).collect(),
        1,
        t,
        columns.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    )
    .expect("generated panel is balanced")
}

pub fn ips_experiment(cfg: &IpsExperiment, moments: &MomentTable) -> Result<RejectionSummary, McError> {
    if !(cfg.rho.abs() <= 1.0) || cfg.n_entities == 0 || cfg.replications < 2 {
        return Err(McError::InvalidConfig(
            "need |rho| <= 1, at least one entity and replications ≥ 2".into(),
        ));
    }
    let draws = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(cfg.seed, rep);
            let mut y = Vec::with_capacity(cfg.n_entities * cfg.n_periods);
            for _ in 0..cfg.n_entities {
                let mu = cfg.sigma_mu * normal(&mut rng);
                let mut level = if cfg.rho < 1.0 {
                    mu + normal(&mut rng) / (1.0 - cfg.rho * cfg.rho).sqrt()
                } else {
                    mu
                };
                for _ in 0..cfg.n_periods {
                    level = (1.0 - cfg.rho) * mu + cfg.rho * level + normal(&mut rng);
                    y.push(level);
                }
            }
            let d = dataset(cfg.n_entities, cfg.n_periods, vec![("y", y)]);
            let r = ips_tbar_test(&d, "y", &cfg.spec, moments).ok()?;
            r.ips.map(|i| (i.statistic, i.test.p_value))
        })
        .collect();
    Ok(summarize(draws))
}

pub fn cointegration_experiment(cfg: &CointExperiment, moments: &MomentTable) -> Result<RejectionSummary, McError> {
    if cfg.regressors == 0 || cfg.n_entities == 0 || cfg.replications < 2 {
        return Err(McError::InvalidConfig(
            "need at least one regressor, one entity and replications ≥ 2".into(),
        ));
    }
    let names: Vec<String> = (1..=cfg.regressors).map(|k| format!("x{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let model = ModelSpec::static_regression("y", &refs);
    let draws = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(cfg.seed, rep);
            let (n, t, k) = (cfg.n_entities, cfg.n_periods, cfg.regressors);
            let mut y = Vec::with_capacity(n * t);
            let mut xs = vec![Vec::with_capacity(n * t); k];
            for _ in 0..n {
                let mut x = vec![0.0; k];
                let mut u = 0.0;
                for _ in 0..t {
                    for (j, xj) in x.iter_mut().enumerate() {
                        *xj += normal(&mut rng);
                        xs[j].push(*xj);
                    }
                    u = if cfg.cointegrated {
                        cfg.noise_sd * normal(&mut rng)
                    } else {
                        u + normal(&mut rng)
                    };
                    y.push(x.iter().sum::<f64>() + u);
                }
            }
            let mut columns = vec![("y", y)];
            columns.extend(refs.iter().copied().zip(xs));
            let d = dataset(n, t, columns);
            let r = residual_cointegration_test(&d, &model, &cfg.spec, moments).ok()?;
            r.ips.map(|i| (i.statistic, i.test.p_value))
        })
        .collect();
    Ok(summarize(draws))
}
