//! Dynamic panel simulation, analytic plim biases and the experiment runner.

mod analytic;
mod dgp;
mod experiment;
mod panel_ur;

use thiserror::Error;

pub use analytic::{analytic_ols_bias, analytic_within_bias, initial_moments};
pub use dgp::{simulate_dgp, DgpConfig, InitialCondition, XProcess, BURN_IN};
pub use experiment::{
    run_experiment, CoefficientSummary, EstimateOutcome, EstimatorKind, EstimatorSummary, ExperimentConfig, MCReport,
    RejectionRates, ReplicationOutcome, TestKind, TestOutcome, TestSummary,
};
pub use panel_ur::{cointegration_experiment, ips_experiment, CointExperiment, IpsExperiment, RejectionSummary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("alpha must satisfy |alpha| < 1, got {0}")]
    InvalidAlpha(f64),
    #[error("plim denominator is zero")]
    DegenerateDenominator,
}
