//! Least-squares kernel and small dense helpers.
//!
//! Regressions are solved through the singular value decomposition of the
//! design matrix rather than the normal equations, so rank deficiency is
//! detected on the design itself: singular values below
//! [`Scalar::rank_tolerance`] times the largest one count as zero.

use nalgebra::{DMatrix, DVector};
use num_traits::Float;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("design matrix is rank deficient; collinear columns {columns:?}")]
    RankDeficient { columns: Vec<usize> },
    #[error("{rows} observations cannot identify {cols} coefficients")]
    TooFewObservations { rows: usize, cols: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Fitted least-squares problem.
#[derive(Debug, Clone)]
pub struct LeastSquares<S: Scalar> {
    pub coefficients: DVector<S>,
    pub residuals: DVector<S>,
    /// `(X'X)^{-1}`, assembled from the SVD factors.
    pub xtx_inv: DMatrix<S>,
    pub singular_values: DVector<S>,
    pub ssr: S,
}

impl<S: Scalar> LeastSquares<S> {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }

    /// Residual variance with `n - k` degrees of freedom, minus any extra
    /// parameters absorbed before the fit (entity means, for instance).
    pub fn sigma2(&self, absorbed: usize) -> S {
        let k = self.coefficients.len();
        let dof = self.n_obs().saturating_sub(k + absorbed).max(1);
        self.ssr / S::of_usize(dof)
    }
}

/// Numerical rank of `x` under the relative singular-value tolerance.
pub fn rank<S: Scalar>(x: &DMatrix<S>) -> usize {
    if x.is_empty() {
        return 0;
    }
    let sv = x.clone().svd(false, false).singular_values;
    count_nonzero(&sv)
}

fn count_nonzero<S: Scalar>(sv: &DVector<S>) -> usize {
    let max = sv.iter().copied().fold(S::zero(), Float::max);
    if max <= S::zero() {
        return 0;
    }
    let tol = max * S::rank_tolerance();
    sv.iter().filter(|&&s| s > tol).count()
}

/// Columns that add nothing to the span of the columns before them.
pub fn collinear_columns<S: Scalar>(x: &DMatrix<S>) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..x.ncols() {
        let mut trial = kept.clone();
        trial.push(j);
        let sub = x.select_columns(trial.iter());
        if rank(&sub) == trial.len() {
            kept = trial;
        } else {
            dropped.push(j);
        }
    }
    dropped
}

/// Ordinary least squares of `y` on the columns of `x`.
pub fn least_squares<S: Scalar>(x: &DMatrix<S>, y: &DVector<S>) -> Result<LeastSquares<S>, LinalgError> {
    let (n, k) = x.shape();
    assert_eq!(n, y.len(), "design and response lengths differ");
    if n < k || k == 0 && n == 0 {
        return Err(LinalgError::TooFewObservations { rows: n, cols: k });
    }
    if k == 0 {
        let ssr = y.dot(y);
        return Ok(LeastSquares {
            coefficients: DVector::zeros(0),
            residuals: y.clone(),
            xtx_inv: DMatrix::zeros(0, 0),
            singular_values: DVector::zeros(0),
            ssr,
        });
    }
    let svd = x.clone().svd(true, true);
    if count_nonzero(&svd.singular_values) < k {
        return Err(LinalgError::RankDeficient {
            columns: collinear_columns(x),
        });
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sv = &svd.singular_values;

    // beta = V diag(1/s) U' y
    let uty = u.transpose() * y;
    let scaled = DVector::from_iterator(k, uty.iter().zip(sv.iter()).map(|(&a, &s)| a / s));
    let coefficients = v_t.transpose() * scaled;
    let residuals = y - x * &coefficients;
    let ssr = residuals.dot(&residuals);

    let mut v_scaled = v_t.transpose();
    for (j, &s) in sv.iter().enumerate() {
        let inv = S::one() / (s * s);
        v_scaled.column_mut(j).scale_mut(inv);
    }
    let xtx_inv = v_scaled * v_t;
    let xtx_inv = symmetrize(&xtx_inv);

    Ok(LeastSquares {
        coefficients,
        residuals,
        xtx_inv,
        singular_values: svd.singular_values.clone(),
        ssr,
    })
}

/// Residuals of `y` after projecting out the columns of `x`.
pub fn partial_out<S: Scalar>(x: &DMatrix<S>, y: &DVector<S>) -> Result<DVector<S>, LinalgError> {
    if x.ncols() == 0 {
        return Ok(y.clone());
    }
    least_squares(x, y).map(|fit| fit.residuals)
}

pub fn symmetrize<S: Scalar>(m: &DMatrix<S>) -> DMatrix<S> {
    let half = S::of(0.5);
    (m + m.transpose()) * half
}

/// Inverse of a symmetric positive definite matrix.
///
/// Fails when the smallest eigenvalue is not positive relative to the largest
/// (tolerance `1e-12` in `f64`).
pub fn spd_inverse<S: Scalar>(m: &DMatrix<S>) -> Result<DMatrix<S>, LinalgError> {
    let (min, max) = eigen_range(m);
    let tol = if S::rank_tolerance() < S::of(1e-8) {
        S::of(1e-12)
    } else {
        S::of(1e-6)
    };
    if !(max > S::zero()) || min <= max * tol {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let chol = m.clone().cholesky().ok_or(LinalgError::NotPositiveDefinite)?;
    Ok(symmetrize(&chol.inverse()))
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_range<S: Scalar>(m: &DMatrix<S>) -> (S, S) {
    if m.is_empty() {
        return (S::zero(), S::zero());
    }
    let eig = symmetrize(m).symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(S::infinity(), Float::min);
    let max = eig.eigenvalues.iter().copied().fold(S::neg_infinity(), Float::max);
    (min, max)
}

/// Solves a square system; `None` when the matrix is numerically singular.
pub fn solve_square<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>) -> Option<DMatrix<S>> {
    let sv = a.clone().svd(false, false).singular_values;
    if count_nonzero(&sv) < a.ncols() {
        return None;
    }
    a.clone().lu().solve(b)
}

pub fn frobenius<S: Scalar>(m: &DMatrix<S>) -> S {
    Float::sqrt(m.iter().fold(S::zero(), |acc, &v| acc + v * v))
}

/// Smallest singular value relative to the largest; zero for empty input.
pub fn smallest_singular_value<S: Scalar>(m: &DMatrix<S>) -> S {
    if m.is_empty() {
        return S::zero();
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().copied().fold(S::infinity(), Float::min)
}
