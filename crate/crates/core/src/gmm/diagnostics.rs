use nalgebra::DVector;

use super::{quadratic_form, summed_moments, GmmError, GmmResult};
use crate::stats::{Tail, TestResult};

/// Sargan/Hansen test of the overidentifying restrictions.
///
/// `S = N ḡ' A₂ ḡ` with `ḡ = N^{-1} Σ Z_i' v̂_i` and `A₂` the second-step
/// weighting. After a one-step fit `A₂` is built from the one-step residuals,
/// so the statistic is always the robust, chi-square distributed version.
pub fn sargan_test(result: &GmmResult) -> Result<TestResult, GmmError> {
    let m = result.moment_count();
    let k = result.estimate.coefficients.len();
    let df = m.saturating_sub(k);
    if df == 0 {
        return Err(GmmError::NotApplicable);
    }
    let weighting = result.sargan_weighting.as_ref().ok_or(GmmError::SingularWeighting {
        step: super::WeightStep::Second,
    })?;
    let g = summed_moments(&result.instruments, &result.residual_vectors);
    let s = quadratic_form(&g, &weighting.matrix, result.instruments.n_entities()).max(0.0);
    let note = if result.step_count == 1 {
        "second-step weighting from one-step residuals"
    } else {
        "two-step residuals and weighting"
    };
    Ok(TestResult::chi_square(s, df, note))
}

/// Arellano-Bond test for `order`-th order serial correlation in the
/// first-differenced residuals.
///
/// With `e` the differenced residuals, `e₋ⱼ` their `order`-th lag and `e*`
/// the matching current values, the statistic is
/// `Σ_i e₋ⱼ,i' e*_i / sqrt(V)` where
///
/// ```text
/// V = Σ_i (e₋ⱼ,i' e*_i)²
///     - 2 q' M Σ_i Z_i' v̂_i (e*_i' e₋ⱼ,i)
///     + q' Var(δ̂) q,          q = Σ_i X*_i' e₋ⱼ,i
/// ```
///
/// `M` maps summed moments to the coefficient error and `X*` are the
/// differenced regressors of the rows in `e*`. Under no serial correlation of
/// the level errors it is asymptotically N(0,1); differenced white noise
/// shows up as a negative AR(1) and an insignificant AR(2).
pub fn ar_test(result: &GmmResult, order: usize) -> Result<TestResult, GmmError> {
    let rows = result.instruments.n_rows();
    if order == 0 || rows <= order {
        return Err(GmmError::TooFewPeriodsForTest { order, available: rows });
    }
    let delta = DVector::from_column_slice(&result.estimate.coefficients);
    let k = delta.len();
    let m = result.moment_count();

    let mut num = 0.0;
    let mut own = 0.0;
    let mut q = DVector::zeros(k);
    let mut cross = DVector::zeros(m);
    for ((eq, z), v) in result
        .equations
        .iter()
        .zip(&result.instruments.blocks)
        .zip(&result.residual_vectors)
    {
        let e = &eq.dy - &eq.dw * &delta;
        let len = e.len();
        let lagged = e.rows(0, len - order);
        let current = e.rows(order, len - order);
        let w_i = lagged.dot(&current);
        num += w_i;
        own += w_i * w_i;
        let x_star = eq.dw.rows(order, len - order);
        q += x_star.transpose() * lagged;
        cross += (z.transpose() * v) * w_i;
    }
    let cov_term = (q.transpose() * &result.influence * cross)[(0, 0)];
    let var_term = (q.transpose() * &result.estimate.covariance * &q)[(0, 0)];
    let mut variance = own - 2.0 * cov_term + var_term;
    let mut note = format!("order {order} autocovariance of differenced residuals");
    if !(variance > 0.0) {
        variance = own;
        note.push_str("; estimation-effect correction dropped (non-positive variance)");
    }
    let statistic = if variance > 0.0 { num / variance.sqrt() } else { 0.0 };
    Ok(TestResult::normal(statistic, Tail::TwoSided, note))
}
