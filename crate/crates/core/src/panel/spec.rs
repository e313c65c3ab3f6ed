use serde::{Deserialize, Serialize};

use super::{PanelDataset, PanelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Levels,
    FirstDifference,
    Within,
    OrthogonalDeviations,
}

/// Regression of `dependent` on its own lags `1..=ar_order` and the current
/// values of `exogenous`.
///
/// `ar_order = 0` describes a static regression (used by pooled OLS, the
/// within estimator and the residual cointegration test); the dynamic
/// estimators require at least one lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dependent: String,
    pub ar_order: usize,
    pub exogenous: Vec<String>,
    pub transform: Transform,
    pub intercept: bool,
}

impl ModelSpec {
    /// Dynamic AR(p) specification in levels with an intercept.
    pub fn dynamic(dependent: impl Into<String>, ar_order: usize, exogenous: &[&str]) -> Self {
        Self {
            dependent: dependent.into(),
            ar_order,
            exogenous: exogenous.iter().map(|s| s.to_string()).collect(),
            transform: Transform::Levels,
            intercept: true,
        }
    }

    pub fn static_regression(dependent: impl Into<String>, exogenous: &[&str]) -> Self {
        Self::dynamic(dependent, 0, exogenous)
    }

    pub fn with_intercept(mut self, intercept: bool) -> Self {
        self.intercept = intercept;
        self
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    /// Names of the estimated slope coefficients, lags first.
    pub fn coefficient_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.ar_order)
            .map(|k| format!("{}(-{k})", self.dependent))
            .collect();
        names.extend(self.exogenous.iter().cloned());
        names
    }

    /// Checks names against the dataset and the internal invariants.
    pub fn validate(&self, dataset: &PanelDataset) -> Result<(), PanelError> {
        if self.dependent.is_empty() {
            return Err(PanelError::InvalidSpec("dependent variable is empty".into()));
        }
        if self.exogenous.iter().any(|x| x == &self.dependent) {
            return Err(PanelError::InvalidSpec(format!(
                "`{}` is both dependent and exogenous",
                self.dependent
            )));
        }
        for (i, x) in self.exogenous.iter().enumerate() {
            if self.exogenous[..i].contains(x) {
                return Err(PanelError::InvalidSpec(format!("`{x}` listed twice")));
            }
        }
        for name in std::iter::once(&self.dependent).chain(&self.exogenous) {
            if !dataset.has_variable(name) {
                return Err(PanelError::UnknownVariable(name.clone()));
            }
        }
        Ok(())
    }

    pub fn require_dynamic(&self) -> Result<(), PanelError> {
        if self.ar_order == 0 {
            Err(PanelError::InvalidSpec(
                "estimator needs an autoregressive order of at least 1".into(),
            ))
        } else {
            Ok(())
        }
    }
}
