//! Dynamic panel data econometrics.
//!
//! * [`panel`]: balanced panel container, CSV ingestion and period-aligned
//!   transforms (lag, first difference, within, forward orthogonal deviations).
//! * [`estimators`]: pooled OLS, within/LSDV and Anderson-Hsiao IV.
//! * [`gmm`]: Arellano-Bond difference GMM with Sargan and AR(m) diagnostics.
//! * [`unitroot`]: ADF regressions, Levin-Lin and IPS panel unit-root tests,
//!   simulated moment tables and a residual-based cointegration test.
//! * [`montecarlo`]: dynamic panel DGP, analytic OLS/within plim biases and
//!   the experiment runner used to validate every estimator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimators;
pub mod gmm;
pub mod linalg;
pub mod montecarlo;
pub mod panel;
pub mod scalar;
pub mod stats;
pub mod unitroot;

pub use estimators::{AhInstrument, EstimateResult, EstimatorError, Method};
pub use panel::{ModelSpec, PanelDataset, PanelError, Series, Transform};
pub use scalar::Scalar;
pub use stats::TestResult;

/// Double-precision series, the representation every estimator consumes.
pub type Series64 = Series<f64>;
/// Single-precision series for memory-bound preprocessing.
pub type Series32 = Series<f32>;
/// Double-precision least-squares fit.
pub type LeastSquares64 = linalg::LeastSquares<f64>;
