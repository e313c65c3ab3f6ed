//! Unit-root and cointegration tests.
//!
//! Single-series ADF regressions feed two panel tests: the pooled Levin-Lin
//! t-statistic, whose null distribution is simulated, and the IPS t-bar,
//! standardised with moments from a [`MomentTable`]. The residual-based
//! cointegration test runs the IPS machinery on levels-regression residuals
//! against a residual-specific table.

mod adf;
mod moments;
mod panel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::panel::PanelError;
use crate::stats::TestResult;

pub use adf::{adf_regression, adf_values, AdfResult, AdfSpec, Deterministic, LagOrder};
pub use moments::{
    residual_tag, simulate_bundled_table, simulate_moment_table, simulate_residual_moment_table, MomentEntry,
    MomentTable, BUNDLED_EXTRA_T, BUNDLED_MAX_REGRESSORS, BUNDLED_T,
};
pub use panel::{
    ips_tbar_test, levin_lin_statistic, levin_lin_test, residual_cointegration_test, simulate_ll_null, EmpiricalNull,
};

#[derive(Debug, Error)]
pub enum UnitRootError {
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error("series of length {len} is too short; at least {required} observations are needed")]
    TooFewObservations { len: usize, required: usize },
    #[error("zero residual variance (exact deterministic input)")]
    DegenerateVariance,
    #[error("ADF regressors are collinear (columns {columns:?})")]
    RankDeficient { columns: Vec<usize> },
    #[error("moment table has no entry for T={t}, {deterministic}")]
    MissingMoments { t: usize, deterministic: String },
    #[error("entity {entity}: {source}")]
    Entity {
        entity: String,
        #[source]
        source: Box<UnitRootError>,
    },
    #[error("trivially cointegrated: levels regression fits exactly for entity {entity}")]
    TriviallyCointegrated { entity: String },
    #[error("levels regression failed: {0}")]
    Estimation(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("moment table: {0}")]
    Table(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityAdf {
    pub entity: String,
    pub adf: AdfResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevinLin {
    pub rho: f64,
    pub statistic: f64,
    pub df: usize,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ips {
    /// Mean of the entity t-ratios.
    pub tbar: f64,
    pub expected_mean: f64,
    pub expected_variance: f64,
    pub statistic: f64,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelURResult {
    pub variable: String,
    pub spec: AdfSpec,
    pub entities: Vec<EntityAdf>,
    pub levin_lin: Option<LevinLin>,
    pub ips: Option<Ips>,
}

impl PanelURResult {
    pub fn ll_statistic(&self) -> Option<f64> {
        self.levin_lin.as_ref().map(|l| l.statistic)
    }

    pub fn ips_statistic(&self) -> Option<f64> {
        self.ips.as_ref().map(|i| i.statistic)
    }
}
