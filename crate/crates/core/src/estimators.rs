//! Pooled OLS, the within (LSDV) estimator and the two Anderson-Hsiao
//! instrumental-variable estimators of the first-differenced equation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::panel::{align, ModelSpec, PanelDataset, PanelError, Series};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error("regressors are collinear: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("{rows} usable observations cannot identify {cols} coefficients")]
    TooFewObservations { rows: usize, cols: usize },
    #[error("{estimator} needs at least {required} periods, panel has {actual}")]
    TooFewPeriods {
        estimator: String,
        required: usize,
        actual: usize,
    },
    #[error("instruments are nearly uncorrelated with the regressors (relative strength {strength:e})")]
    WeakInstrument { strength: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AhInstrument {
    /// `y_{t-2} - y_{t-3}` instruments `Δy_{t-1}`.
    DifferenceInstrument,
    /// `y_{t-2}` instruments `Δy_{t-1}`.
    LevelInstrument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PooledOls,
    Within,
    AndersonHsiao(AhInstrument),
    ArellanoBond { steps: usize },
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::PooledOls => "pooled OLS",
            Method::Within => "within (LSDV)",
            Method::AndersonHsiao(AhInstrument::DifferenceInstrument) => "Anderson-Hsiao (difference instrument)",
            Method::AndersonHsiao(AhInstrument::LevelInstrument) => "Anderson-Hsiao (level instrument)",
            Method::ArellanoBond { steps: 1 } => "Arellano-Bond one-step GMM",
            Method::ArellanoBond { .. } => "Arellano-Bond two-step GMM",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub method: Method,
    pub spec: ModelSpec,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub covariance: DMatrix<f64>,
    /// One residual series per entity, positioned at the periods used.
    pub residuals: Vec<Series<f64>>,
    pub n_obs: usize,
    pub sigma2: f64,
}

impl EstimateResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|j| self.coefficients[j])
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.coefficients.len())
            .map(|j| self.covariance[(j, j)].max(0.0).sqrt())
            .collect()
    }

    /// First autoregressive coefficient, when the model has one.
    pub fn alpha(&self) -> Option<f64> {
        (self.spec.ar_order > 0).then(|| self.coefficients[0])
    }
}

/// Columns of one entity in levels: `[y, y(-1)..y(-p), x_1..x_K]`, cut to the
/// periods where every lag exists.
pub(crate) fn levels_block(
    dataset: &PanelDataset,
    spec: &ModelSpec,
    entity: usize,
) -> Result<Vec<Series<f64>>, PanelError> {
    let y = dataset.series(&spec.dependent, entity)?;
    let mut cols = Vec::with_capacity(1 + spec.ar_order + spec.exogenous.len());
    for k in 1..=spec.ar_order {
        cols.push(y.lag(k)?);
    }
    cols.insert(0, y);
    for x in &spec.exogenous {
        cols.push(dataset.series(x, entity)?);
    }
    Ok(align(&cols))
}

fn map_linalg(err: LinalgError, names: &[String]) -> EstimatorError {
    match err {
        LinalgError::RankDeficient { columns } => EstimatorError::RankDeficient {
            columns: columns
                .into_iter()
                .map(|j| names.get(j).cloned().unwrap_or_else(|| format!("column {j}")))
                .collect(),
        },
        LinalgError::TooFewObservations { rows, cols } => EstimatorError::TooFewObservations { rows, cols },
        LinalgError::NotPositiveDefinite => EstimatorError::RankDeficient {
            columns: names.to_vec(),
        },
    }
}

/// Row-stacked regression data with the entity each row block came from.
struct Stacked {
    y: DVector<f64>,
    x: DMatrix<f64>,
    /// (entity name, first period index, row count) per entity.
    blocks: Vec<(String, usize, usize)>,
}

fn stack(blocks: &[Vec<Series<f64>>], intercept: bool) -> Stacked {
    let n: usize = blocks.iter().map(|b| b[0].len()).sum();
    let k = blocks.first().map_or(0, |b| b.len() - 1) + usize::from(intercept);
    let mut y = DVector::zeros(n);
    let mut x = DMatrix::zeros(n, k);
    let mut info = Vec::with_capacity(blocks.len());
    let mut row = 0;
    for b in blocks {
        let len = b[0].len();
        for t in 0..len {
            y[row + t] = b[0].values[t];
            for (j, col) in b[1..].iter().enumerate() {
                x[(row + t, j)] = col.values[t];
            }
            if intercept {
                x[(row + t, k - 1)] = 1.0;
            }
        }
        info.push((b[0].entity.clone(), b[0].offset, len));
        row += len;
    }
    Stacked { y, x, blocks: info }
}

fn split_residuals(resid: &DVector<f64>, blocks: &[(String, usize, usize)]) -> Vec<Series<f64>> {
    let mut row = 0;
    blocks
        .iter()
        .map(|(entity, offset, len)| {
            let s = Series::new(entity.clone(), *offset, resid.rows(row, *len).iter().copied().collect());
            row += len;
            s
        })
        .collect()
}

fn all_blocks(dataset: &PanelDataset, spec: &ModelSpec) -> Result<Vec<Vec<Series<f64>>>, PanelError> {
    (0..dataset.n_entities())
        .map(|i| levels_block(dataset, spec, i))
        .collect()
}

/// Least squares on stacked observations with no entity effects.
pub fn pooled_ols(dataset: &PanelDataset, spec: &ModelSpec) -> Result<EstimateResult, EstimatorError> {
    spec.validate(dataset)?;
    let blocks = all_blocks(dataset, spec)?;
    let data = stack(&blocks, spec.intercept);
    let mut names = spec.coefficient_names();
    if spec.intercept {
        names.push("const".into());
    }
    let fit = linalg::least_squares(&data.x, &data.y).map_err(|e| map_linalg(e, &names))?;
    let sigma2 = fit.sigma2(0);
    Ok(EstimateResult {
        method: Method::PooledOls,
        spec: spec.clone(),
        names,
        coefficients: fit.coefficients.iter().copied().collect(),
        covariance: &fit.xtx_inv * sigma2,
        residuals: split_residuals(&fit.residuals, &data.blocks),
        n_obs: fit.n_obs(),
        sigma2,
    })
}

/// Least squares on entity-demeaned data.
///
/// Every column (including the lagged dependent variable) is demeaned over
/// the rows actually used, which reproduces the regression on a full set of
/// entity indicators. No intercept is reported; it is absorbed.
pub fn within_estimator(dataset: &PanelDataset, spec: &ModelSpec) -> Result<EstimateResult, EstimatorError> {
    spec.validate(dataset)?;
    let required = spec.ar_order + 2;
    if dataset.n_periods() < required {
        return Err(EstimatorError::TooFewPeriods {
            estimator: "within estimator".into(),
            required,
            actual: dataset.n_periods(),
        });
    }
    let blocks = all_blocks(dataset, spec)?
        .into_iter()
        .map(|b| b.iter().map(Series::within_transform).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let data = stack(&blocks, false);
    let names = spec.coefficient_names();
    let fit = linalg::least_squares(&data.x, &data.y).map_err(|e| map_linalg(e, &names))?;
    let sigma2 = fit.sigma2(dataset.n_entities());
    Ok(EstimateResult {
        method: Method::Within,
        spec: spec.clone(),
        names,
        coefficients: fit.coefficients.iter().copied().collect(),
        covariance: &fit.xtx_inv * sigma2,
        residuals: split_residuals(&fit.residuals, &data.blocks),
        n_obs: fit.n_obs(),
        sigma2,
    })
}

/// Anderson-Hsiao IV on the first-differenced equation.
///
/// Each lag `Δy_{t-k}` is instrumented by `y_{t-k-1}` (level variant) or by
/// `Δy_{t-k-1}` (difference variant); differenced exogenous regressors
/// instrument themselves. The system is just identified.
pub fn anderson_hsiao(
    dataset: &PanelDataset,
    spec: &ModelSpec,
    variant: AhInstrument,
) -> Result<EstimateResult, EstimatorError> {
    spec.validate(dataset)?;
    spec.require_dynamic()?;
    let p = spec.ar_order;
    let required = match variant {
        AhInstrument::LevelInstrument => p + 2,
        AhInstrument::DifferenceInstrument => p + 3,
    };
    if dataset.n_periods() < required {
        return Err(EstimatorError::TooFewPeriods {
            estimator: Method::AndersonHsiao(variant).label().into(),
            required,
            actual: dataset.n_periods(),
        });
    }

    let k = p + spec.exogenous.len();
    let mut y_rows = Vec::new();
    let mut x_rows: Vec<f64> = Vec::new();
    let mut z_rows: Vec<f64> = Vec::new();
    let mut info = Vec::new();
    for i in 0..dataset.n_entities() {
        let levels = levels_block(dataset, spec, i)?;
        let diffs = levels
            .iter()
            .map(Series::first_difference)
            .collect::<Result<Vec<_>, _>>()?;
        let y = dataset.series(&spec.dependent, i)?;
        let base = match variant {
            AhInstrument::LevelInstrument => y,
            AhInstrument::DifferenceInstrument => y.first_difference()?,
        };
        let mut cols = diffs.clone();
        for lag in 1..=p {
            cols.push(base.lag(lag + 1)?);
        }
        cols.extend(diffs[1 + p..].iter().cloned());
        let cols = align(&cols);
        let len = cols[0].len();
        for t in 0..len {
            y_rows.push(cols[0].values[t]);
            x_rows.extend(cols[1..=k].iter().map(|c| c.values[t]));
            z_rows.extend(cols[1 + k..].iter().map(|c| c.values[t]));
        }
        info.push((cols[0].entity.clone(), cols[0].offset, len));
    }
    let n = y_rows.len();
    let names = spec.coefficient_names();
    if n < k {
        return Err(EstimatorError::TooFewObservations { rows: n, cols: k });
    }
    let y = DVector::from_vec(y_rows);
    let x = DMatrix::from_row_slice(n, k, &x_rows);
    let z = DMatrix::from_row_slice(n, k, &z_rows);

    let zx = z.transpose() * &x;
    let strength = linalg::smallest_singular_value(&zx);
    let scale = linalg::frobenius(&z) * linalg::frobenius(&x);
    if !(strength > 1e-10 * scale) {
        return Err(EstimatorError::WeakInstrument {
            strength: if scale > 0.0 { strength / scale } else { 0.0 },
        });
    }
    let zy = z.transpose() * &y;
    let coef = linalg::solve_square(&zx, &DMatrix::from_column_slice(k, 1, zy.as_slice()))
        .ok_or(EstimatorError::WeakInstrument { strength: 0.0 })?;
    let coef = DVector::from_column_slice(coef.as_slice());
    let resid = &y - &x * &coef;
    let dof = n.saturating_sub(k).max(1);
    let sigma2 = resid.dot(&resid) / dof as f64;
    // Homoskedastic IV covariance: s² (Z'X)^{-1} Z'Z (X'Z)^{-1}.
    let zx_inv = zx
        .clone()
        .try_inverse()
        .ok_or(EstimatorError::WeakInstrument { strength: 0.0 })?;
    let covariance = linalg::symmetrize(&(&zx_inv * (z.transpose() * &z) * zx_inv.transpose() * sigma2));

    Ok(EstimateResult {
        method: Method::AndersonHsiao(variant),
        spec: spec.clone(),
        names,
        coefficients: coef.iter().copied().collect(),
        covariance,
        residuals: split_residuals(&resid, &info),
        n_obs: n,
        sigma2,
    })
}
