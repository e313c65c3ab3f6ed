use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{GmmError, GmmTransform, InstrumentMatrix};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightStep {
    First,
    Second,
}

/// `A_N` together with the matrix it inverts.
#[derive(Debug, Clone)]
pub struct WeightingMatrix {
    pub step: WeightStep,
    /// `A_N`, symmetric positive definite.
    pub matrix: DMatrix<f64>,
    /// `N^{-1} Σ Z_i' H_i Z_i` before inversion.
    pub middle: DMatrix<f64>,
    /// Ridge `ε` added to the middle matrix, when one was needed.
    pub ridge: Option<f64>,
}

/// Covariance pattern of the transformed idiosyncratic errors.
///
/// First differences of white noise are MA(1): 2 on the diagonal and -1 next
/// to it. Forward orthogonal deviations keep white noise white.
pub fn one_step_h(transform: GmmTransform, rows: usize) -> DMatrix<f64> {
    match transform {
        GmmTransform::FirstDifference => DMatrix::from_fn(rows, rows, |r, c| {
            if r == c {
                2.0
            } else if r.abs_diff(c) == 1 {
                -1.0
            } else {
                0.0
            }
        }),
        GmmTransform::OrthogonalDeviations => DMatrix::identity(rows, rows),
    }
}

fn invert(middle: DMatrix<f64>, step: WeightStep, allow_ridge: bool) -> Result<WeightingMatrix, GmmError> {
    let middle = linalg::symmetrize(&middle);
    match linalg::spd_inverse(&middle) {
        Ok(matrix) => Ok(WeightingMatrix {
            step,
            matrix,
            middle,
            ridge: None,
        }),
        Err(_) if allow_ridge => {
            let m = middle.nrows();
            let eps = 1e-10 * middle.trace() / m as f64;
            if !(eps > 0.0) {
                return Err(GmmError::SingularWeighting { step });
            }
            let ridged = &middle + DMatrix::identity(m, m) * eps;
            let matrix = linalg::spd_inverse(&ridged).map_err(|_| GmmError::SingularWeighting { step })?;
            Ok(WeightingMatrix {
                step,
                matrix,
                middle: ridged,
                ridge: Some(eps),
            })
        }
        Err(_) => Err(GmmError::SingularWeighting { step }),
    }
}

fn first_step_middle(instruments: &InstrumentMatrix) -> DMatrix<f64> {
    let m = instruments.moment_count();
    let h = one_step_h(instruments.options.transform, instruments.n_rows());
    let mut middle = DMatrix::zeros(m, m);
    for z in &instruments.blocks {
        middle += z.transpose() * (&h * z);
    }
    middle / instruments.n_entities().max(1) as f64
}

fn second_step_middle(instruments: &InstrumentMatrix, residuals: &[DVector<f64>]) -> DMatrix<f64> {
    let m = instruments.moment_count();
    let mut middle = DMatrix::zeros(m, m);
    for (z, v) in instruments.blocks.iter().zip(residuals) {
        let zv = z.transpose() * v;
        middle += &zv * zv.transpose();
    }
    middle / instruments.n_entities().max(1) as f64
}

/// `A_N = (N^{-1} Σ Z_i' H Z_i)^{-1}` with the transform's one-step `H`.
pub fn first_step_weighting(instruments: &InstrumentMatrix) -> Result<WeightingMatrix, GmmError> {
    invert(first_step_middle(instruments), WeightStep::First, false)
}

/// `A_N = (N^{-1} Σ Z_i' v_i v_i' Z_i)^{-1}` from per-entity residuals.
pub fn second_step_weighting(
    instruments: &InstrumentMatrix,
    residuals: &[DVector<f64>],
) -> Result<WeightingMatrix, GmmError> {
    check_residuals(instruments, residuals)?;
    invert(second_step_middle(instruments, residuals), WeightStep::Second, false)
}

fn check_residuals(instruments: &InstrumentMatrix, residuals: &[DVector<f64>]) -> Result<(), GmmError> {
    if residuals.len() != instruments.n_entities() || residuals.iter().any(|r| r.len() != instruments.n_rows()) {
        return Err(GmmError::ResidualShape);
    }
    Ok(())
}

pub(crate) fn first_step_with_ridge(instruments: &InstrumentMatrix) -> Result<WeightingMatrix, GmmError> {
    invert(first_step_middle(instruments), WeightStep::First, true)
}

pub(crate) fn second_step_with_ridge(
    instruments: &InstrumentMatrix,
    residuals: &[DVector<f64>],
) -> Result<WeightingMatrix, GmmError> {
    check_residuals(instruments, residuals)?;
    invert(second_step_middle(instruments, residuals), WeightStep::Second, true)
}
