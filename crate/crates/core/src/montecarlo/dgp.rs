use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::McError;
use crate::panel::PanelDataset;
use crate::stats::replication_rng;

/// How `y_i0` relates to the entity effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `y_i0 = μ_i/(1-α) + w_i`, `Var w_i = σ_v²/(1-α²)`.
    Stationary,
    FixedZero,
    /// `y_i0 = (cov0/σ_μ²) μ_i + w_i`, so that `cov(y_i0, μ_i) = cov0`.
    Custom {
        cov0: f64,
    },
}

/// Stationary AR(1) law of every exogenous regressor, independent of `μ`
/// and `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XProcess {
    pub rho: f64,
    pub sigma: f64,
}

impl Default for XProcess {
    fn default() -> Self {
        Self { rho: 0.5, sigma: 1.0 }
    }
}

/// `y_it = α y_{i,t-1} + β'x_it + μ_i + v_it`, `t = 1..=n_periods`.
///
/// The generated panel carries `n_periods + 1` periods labelled `0..=T`;
/// period 0 is the initial draw, so a lag-one regression uses exactly
/// `n_periods` observations per entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpConfig {
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
}

fn stationary() -> InitialCondition {
    InitialCondition::Stationary
}

/// Periods simulated and discarded before period 0 when regressors are present.
pub const BURN_IN: usize = 50;

impl DgpConfig {
    pub fn ar1(n_entities: usize, n_periods: usize, alpha: f64, seed: u64) -> Self {
        Self {
            n_entities,
            n_periods,
            alpha,
            beta: vec![],
            sigma_mu: 1.0,
            sigma_v: 1.0,
            init: InitialCondition::Stationary,
            x_process: XProcess::default(),
            seed,
        }
    }

    pub fn regressor_names(&self) -> Vec<String> {
        (1..=self.beta.len()).map(|k| format!("x{k}")).collect()
    }

    pub fn validate(&self) -> Result<(), McError> {
        let bad = |msg: String| Err(McError::InvalidConfig(msg));
        if !(self.alpha.abs() < 1.0) {
            return bad(format!("alpha must satisfy |alpha| < 1, got {}", self.alpha));
        }
        if !(self.sigma_mu >= 0.0) || !(self.sigma_v >= 0.0) {
            return bad("sigma_mu and sigma_v must be non-negative".into());
        }
        if self.n_entities < 1 {
            return bad("n_entities must be at least 1".into());
        }
        if self.n_periods < 2 {
            return bad("n_periods must be at least 2".into());
        }
        if !self.beta.is_empty() && !(self.x_process.rho.abs() < 1.0 && self.x_process.sigma >= 0.0) {
            return bad("x_process needs |rho| < 1 and sigma >= 0".into());
        }
        if let InitialCondition::Custom { cov0 } = self.init {
            if !cov0.is_finite() || (self.sigma_mu == 0.0 && cov0 != 0.0) {
                return bad("custom cov0 must be finite and zero when sigma_mu is zero".into());
            }
        }
        Ok(())
    }
}

/// Draws one panel from replication stream 0 of the configured seed.
pub fn simulate_dgp(config: &DgpConfig) -> Result<PanelDataset, McError> {
    simulate_replication(config, 0)
}

pub(crate) fn simulate_replication(config: &DgpConfig, rep: u64) -> Result<PanelDataset, McError> {
    config.validate()?;
    let mut rng = replication_rng(config.seed, rep);
    Ok(draw(config, &mut rng))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn draw(config: &DgpConfig, rng: &mut ChaCha8Rng) -> PanelDataset {
    let n = config.n_entities;
    let periods = config.n_periods + 1;
    let k = config.beta.len();
    let a = config.alpha;
    let w_sd = config.sigma_v / (1.0 - a * a).sqrt();
    let x_sd = config.x_process.sigma / (1.0 - config.x_process.rho.powi(2)).sqrt();
    let burn = if k > 0 { BURN_IN } else { 0 };

    let mut y = Vec::with_capacity(n * periods);
    let mut xs = vec![Vec::with_capacity(n * periods); k];
    for _ in 0..n {
        let mu = config.sigma_mu * normal(rng);
        let w = w_sd * normal(rng);
        let mut level = match config.init {
            InitialCondition::Stationary => mu / (1.0 - a) + w,
            InitialCondition::FixedZero => 0.0,
            InitialCondition::Custom { cov0 } => {
                let s2 = config.sigma_mu * config.sigma_mu;
                let load = if s2 > 0.0 { cov0 / s2 } else { 0.0 };
                load * mu + w
            }
        };
        let mut x: Vec<f64> = (0..k).map(|_| x_sd * normal(rng)).collect();
        let step = |level: &mut f64, x: &mut Vec<f64>, rng: &mut ChaCha8Rng| {
            for xj in x.iter_mut() {
                *xj = config.x_process.rho * *xj + config.x_process.sigma * normal(rng);
            }
            let xb: f64 = x.iter().zip(&config.beta).map(|(a, b)| a * b).sum();
            *level = a * *level + xb + mu + config.sigma_v * normal(rng);
        };
        for _ in 0..burn {
            step(&mut level, &mut x, rng);
        }
        for t in 0..periods {
            if t > 0 {
                step(&mut level, &mut x, rng);
            }
            y.push(level);
            for (j, xj) in x.iter().enumerate() {
                xs[j].push(*xj);
            }
        }
    }
    let mut columns = vec![("y".to_string(), y)];
    columns.extend(config.regressor_names().into_iter().zip(xs));
    PanelDataset::new((1..=n).map(|i| i.to_string()).collect(), 0, periods, columns)
        .expect("generated panel is balanced")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_white_panel_is_entity_constant() {
        let cfg = DgpConfig {
            alpha: 0.0,
            sigma_v: 0.0,
            ..DgpConfig::ar1(20, 6, 0.0, 1)
        };
        let d = simulate_dgp(&cfg).unwrap();
        assert_eq!(d.n_periods(), 7);
        for i in 0..20 {
            let v = d.values("y", i).unwrap();
            assert!(v.iter().all(|x| *x == v[0]));
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let mut cfg = DgpConfig::ar1(30, 5, 0.5, 7);
        cfg.beta = vec![0.4, -0.2];
        let a = simulate_dgp(&cfg).unwrap();
        let b = simulate_dgp(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.variable_names(), &["y", "x1", "x2"]);
        cfg.seed = 8;
        assert_ne!(simulate_dgp(&cfg).unwrap(), a);
    }

    #[test]
    fn stationary_initial_covariance() {
        // Per entity the stream holds μ, w and then one v per period.
        let n = 5000;
        let cfg = DgpConfig::ar1(n, 2, 0.5, 11);
        let d = simulate_dgp(&cfg).unwrap();
        let mut rng = replication_rng(cfg.seed, 0);
        let mut prods = Vec::with_capacity(n);
        for i in 0..n {
            let mu = normal(&mut rng);
            for _ in 0..3 {
                normal(&mut rng);
            }
            prods.push(d.values("y", i).unwrap()[0] * mu);
        }
        let (mean, var) = crate::stats::mean_variance(&prods);
        assert!((mean - 2.0).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn invalid_configs() {
        assert!(simulate_dgp(&DgpConfig::ar1(10, 5, 1.0, 0)).is_err());
        assert!(simulate_dgp(&DgpConfig::ar1(0, 5, 0.5, 0)).is_err());
        assert!(simulate_dgp(&DgpConfig::ar1(10, 1, 0.5, 0)).is_err());
        let cfg = DgpConfig {
            sigma_mu: 0.0,
            init: InitialCondition::Custom { cov0: 1.0 },
            ..DgpConfig::ar1(10, 5, 0.5, 0)
        };
        assert!(matches!(simulate_dgp(&cfg), Err(McError::InvalidConfig(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"n_entities": 10, "n_periods": 5, "alpha": 0.5, "beta": [0.3],
            "sigma_mu": 1, "sigma_v": 1, "init": {"kind": "custom", "cov0": 0.5},
            "x_process": {"rho": 0.5, "sigma": 1}, "seed": 3}"#;
        let cfg: DgpConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.init, InitialCondition::Custom { cov0: 0.5 });
        let back: DgpConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
