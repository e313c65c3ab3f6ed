//! Arellano-Bond difference GMM.
//!
//! The equation in first differences (or forward orthogonal deviations) is
//! estimated with all admissible lagged levels of the dependent variable as
//! instruments. One-step estimation weights the moments with the known
//! covariance pattern of the transformed errors; two-step re-weights with the
//! outer products of the one-step residual moments.

mod diagnostics;
mod instruments;
mod weighting;

pub use diagnostics::{ar_test, sargan_test};
pub use instruments::{
    build_instrument_matrix, ExogPolicy, GmmTransform, InstrumentColumn, InstrumentKind, InstrumentMatrix,
    InstrumentOptions,
};
pub use weighting::{first_step_weighting, one_step_h, second_step_weighting, WeightStep, WeightingMatrix};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{EstimateResult, EstimatorError, Method};
use crate::linalg;
use crate::panel::{ModelSpec, PanelDataset, PanelError, Series};
use crate::stats::TestResult;
use instruments::{build_from_equations, entity_equations, min_periods, EntityEquations};

#[derive(Debug, Error)]
pub enum GmmError {
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error("GMM needs at least {required} periods, panel has {actual}")]
    TooFewPeriods { required: usize, actual: usize },
    #[error("instrument set is empty")]
    EmptyInstrumentSet,
    #[error("{moments} moment conditions cannot identify {coefficients} coefficients")]
    UnderIdentified { moments: usize, coefficients: usize },
    #[error("{step:?}-step weighting matrix is singular")]
    SingularWeighting { step: WeightStep },
    #[error("regressors are not identified by the instruments: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("Sargan test not applicable: model is just identified")]
    NotApplicable,
    #[error("residuals do not match the instrument blocks")]
    ResidualShape,
    #[error("AR({order}) test needs more than {order} transformed periods, have {available}")]
    TooFewPeriodsForTest { order: usize, available: usize },
}

impl From<GmmError> for EstimatorError {
    fn from(e: GmmError) -> Self {
        match e {
            GmmError::Panel(p) => EstimatorError::Panel(p),
            GmmError::RankDeficient { columns } => EstimatorError::RankDeficient { columns },
            GmmError::TooFewPeriods { required, actual } => EstimatorError::TooFewPeriods {
                estimator: "Arellano-Bond GMM".into(),
                required,
                actual,
            },
            other => EstimatorError::Panel(PanelError::InvalidSpec(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Steps {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmmOptions {
    pub steps: Steps,
    pub instruments: InstrumentOptions,
}

impl GmmOptions {
    pub fn one_step() -> Self {
        Self {
            steps: Steps::One,
            instruments: InstrumentOptions::default(),
        }
    }

    pub fn two_step() -> Self {
        Self {
            steps: Steps::Two,
            instruments: InstrumentOptions::default(),
        }
    }

    pub fn with_transform(mut self, transform: GmmTransform) -> Self {
        self.instruments.transform = transform;
        self
    }

    pub fn with_x_policy(mut self, policy: ExogPolicy) -> Self {
        self.instruments.x_policy = policy;
        self
    }

    pub fn with_max_lag_depth(mut self, depth: Option<usize>) -> Self {
        self.instruments.max_lag_depth = depth;
        self
    }
}

/// Difference-GMM fit with its moment bookkeeping and diagnostics.
#[derive(Debug, Clone)]
pub struct GmmResult {
    pub estimate: EstimateResult,
    pub instruments: InstrumentMatrix,
    /// Weighting used for the reported coefficients.
    pub weighting: WeightingMatrix,
    pub step_count: usize,
    /// One-step coefficients, kept when a second step was taken.
    pub first_step_coefficients: Option<Vec<f64>>,
    /// `N ḡ' A_N ḡ` at the reported coefficients, `ḡ = N^{-1} Σ Z_i' v_i`.
    pub criterion_value: f64,
    pub sargan: Option<TestResult>,
    pub ar_tests: Vec<(usize, TestResult)>,
    pub warnings: Vec<String>,
    /// Second-step weighting the Sargan statistic is evaluated with.
    pub sargan_weighting: Option<WeightingMatrix>,
    pub(crate) equations: Vec<EntityEquations>,
    pub(crate) residual_vectors: Vec<DVector<f64>>,
    /// `(G'AG)^{-1} G'A`: maps summed moments to the coefficient error.
    pub(crate) influence: DMatrix<f64>,
}

impl GmmResult {
    pub fn coefficients(&self) -> &[f64] {
        &self.estimate.coefficients
    }

    pub fn alpha(&self) -> f64 {
        self.estimate.coefficients[0]
    }

    pub fn moment_count(&self) -> usize {
        self.instruments.moment_count()
    }

    /// Summed moments `Σ Z_i' (y_i - W_i δ)` at arbitrary coefficients.
    pub fn moments_at(&self, coefficients: &[f64]) -> DVector<f64> {
        let delta = DVector::from_column_slice(coefficients);
        let mut g = DVector::zeros(self.moment_count());
        for (eq, z) in self.equations.iter().zip(&self.instruments.blocks) {
            let v = &eq.y - &eq.w * &delta;
            g += z.transpose() * v;
        }
        g
    }

    /// Quadratic criterion `N ḡ' A ḡ` at `coefficients` under `weighting`.
    pub fn criterion_at(&self, coefficients: &[f64], weighting: &WeightingMatrix) -> f64 {
        quadratic_form(
            &self.moments_at(coefficients),
            &weighting.matrix,
            self.instruments.n_entities(),
        )
    }
}

fn quadratic_form(g: &DVector<f64>, a: &DMatrix<f64>, n: usize) -> f64 {
    (g.transpose() * a * g)[(0, 0)] / n.max(1) as f64
}

struct Fit {
    delta: DVector<f64>,
    residuals: Vec<DVector<f64>>,
    influence: DMatrix<f64>,
}

fn fit_with(
    equations: &[EntityEquations],
    instruments: &InstrumentMatrix,
    weighting: &WeightingMatrix,
    names: &[String],
) -> Result<Fit, GmmError> {
    let m = instruments.moment_count();
    let k = names.len();
    let mut g_zw = DMatrix::zeros(m, k);
    let mut g_zy = DVector::zeros(m);
    for (eq, z) in equations.iter().zip(&instruments.blocks) {
        let zt = z.transpose();
        g_zw += &zt * &eq.w;
        g_zy += &zt * &eq.y;
    }
    let a = &weighting.matrix;
    let wza = g_zw.transpose() * a;
    let lhs = linalg::symmetrize(&(&wza * &g_zw));
    let bread = linalg::spd_inverse(&lhs).map_err(|_| GmmError::RankDeficient {
        columns: {
            let cols = linalg::collinear_columns(&g_zw);
            if cols.is_empty() {
                names.to_vec()
            } else {
                cols.into_iter().map(|j| names[j].clone()).collect()
            }
        },
    })?;
    let influence = &bread * &wza;
    let delta = &influence * g_zy;
    let residuals = equations.iter().map(|eq| &eq.y - &eq.w * &delta).collect();
    Ok(Fit {
        delta,
        residuals,
        influence,
    })
}

fn moment_outer(instruments: &InstrumentMatrix, residuals: &[DVector<f64>]) -> DMatrix<f64> {
    let m = instruments.moment_count();
    let mut omega = DMatrix::zeros(m, m);
    for (z, v) in instruments.blocks.iter().zip(residuals) {
        let zv = z.transpose() * v;
        omega += &zv * zv.transpose();
    }
    omega
}

fn summed_moments(instruments: &InstrumentMatrix, residuals: &[DVector<f64>]) -> DVector<f64> {
    let mut g = DVector::zeros(instruments.moment_count());
    for (z, v) in instruments.blocks.iter().zip(residuals) {
        g += z.transpose() * v;
    }
    g
}

/// Arellano-Bond difference GMM.
///
/// The coefficient covariance is the GMM sandwich
/// `B G'A Ω A G B` with `B = (G'AG)^{-1}` and `Ω = Σ Z_i' v_i v_i' Z_i`,
/// where `v` are the one-step residuals. After two steps this reduces to
/// `(G' Ω^{-1} G)^{-1}`; no finite-sample correction is applied.
pub fn gmm_estimate(dataset: &PanelDataset, spec: &ModelSpec, options: &GmmOptions) -> Result<GmmResult, GmmError> {
    spec.validate(dataset)?;
    spec.require_dynamic()?;
    let t_total = dataset.n_periods();
    if t_total < min_periods(spec) {
        return Err(GmmError::TooFewPeriods {
            required: min_periods(spec),
            actual: t_total,
        });
    }
    let transform = options.instruments.transform;
    let equations = entity_equations(dataset, spec, transform)?;
    let instruments = build_from_equations(dataset, spec, &options.instruments, &equations)?;
    let names = spec.coefficient_names();
    let k = names.len();
    let m = instruments.moment_count();
    let n = dataset.n_entities();
    if m < k {
        return Err(GmmError::UnderIdentified {
            moments: m,
            coefficients: k,
        });
    }
    let mut warnings = Vec::new();
    if n <= m {
        warnings.push(format!(
            "instrument count {m} is not below the entity count {n}; weighting may be unreliable"
        ));
    }
    let note_ridge = |w: &WeightingMatrix, warnings: &mut Vec<String>| {
        if let Some(eps) = w.ridge {
            warnings.push(format!(
                "{:?}-step weighting matrix was singular; ridge {eps:e}·I added",
                w.step
            ));
        }
    };

    let w1 = weighting::first_step_with_ridge(&instruments)?;
    note_ridge(&w1, &mut warnings);
    let fit1 = fit_with(&equations, &instruments, &w1, &names)?;

    let (final_fit, final_w, first_step_coefficients, omega, sargan_weighting) = match options.steps {
        Steps::One => {
            let omega = moment_outer(&instruments, &fit1.residuals);
            let sargan_w = weighting::second_step_with_ridge(&instruments, &fit1.residuals).ok();
            (fit1, w1, None, omega, sargan_w)
        }
        Steps::Two => {
            let w2 = weighting::second_step_with_ridge(&instruments, &fit1.residuals)?;
            note_ridge(&w2, &mut warnings);
            let omega = moment_outer(&instruments, &fit1.residuals);
            let fit2 = fit_with(&equations, &instruments, &w2, &names)?;
            let first = fit1.delta.iter().copied().collect();
            (fit2, w2.clone(), Some(first), omega, Some(w2))
        }
    };

    let sandwich = &final_fit.influence * &omega * final_fit.influence.transpose();
    let covariance = linalg::symmetrize(&sandwich);

    let g = summed_moments(&instruments, &final_fit.residuals);
    let criterion_value = quadratic_form(&g, &final_w.matrix, n).max(0.0);

    let n_obs: usize = final_fit.residuals.iter().map(|r| r.len()).sum();
    let ssr: f64 = final_fit.residuals.iter().map(|r| r.dot(r)).sum();
    let sigma2 = ssr / n_obs.saturating_sub(k).max(1) as f64;
    let residual_series = equations
        .iter()
        .zip(&final_fit.residuals)
        .map(|(eq, r)| Series::new(eq.entity.clone(), eq.offset, r.iter().copied().collect()))
        .collect();

    let steps = match options.steps {
        Steps::One => 1,
        Steps::Two => 2,
    };
    let estimate = EstimateResult {
        method: Method::ArellanoBond { steps },
        spec: spec.clone(),
        names,
        coefficients: final_fit.delta.iter().copied().collect(),
        covariance,
        residuals: residual_series,
        n_obs,
        sigma2,
    };
    if sargan_weighting.is_none() {
        warnings.push("second-step weighting is singular; Sargan statistic unavailable".into());
    }
    let mut result = GmmResult {
        estimate,
        instruments,
        weighting: final_w,
        step_count: steps,
        first_step_coefficients,
        criterion_value,
        sargan: None,
        ar_tests: Vec::new(),
        warnings,
        sargan_weighting,
        equations,
        residual_vectors: final_fit.residuals,
        influence: final_fit.influence,
    };
    match sargan_test(&result) {
        Ok(t) => result.sargan = Some(t),
        Err(GmmError::NotApplicable) => result
            .warnings
            .push("model is just identified; Sargan test not applicable".into()),
        Err(_) => {}
    }
    for order in [1, 2] {
        match ar_test(&result, order) {
            Ok(t) => result.ar_tests.push((order, t)),
            Err(e) => result.warnings.push(format!("AR({order}) test skipped: {e}")),
        }
    }
    Ok(result)
}
