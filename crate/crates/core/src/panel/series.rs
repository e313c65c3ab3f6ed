use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::PanelError;
use crate::scalar::Scalar;

/// One entity's time-ordered values, positioned by an explicit period offset.
///
/// `offset` counts periods from the first period of the dataset the series was
/// taken from. Transforms that shorten a series move the offset instead of
/// padding, so two series can only be combined after [`align`] has cut them
/// to their common window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series<S = f64> {
    pub entity: String,
    pub offset: usize,
    pub values: Vec<S>,
}

impl<S: Scalar> Series<S> {
    pub fn new(entity: impl Into<String>, offset: usize, values: Vec<S>) -> Self {
        Self {
            entity: entity.into(),
            offset,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One past the last period index covered.
    pub fn end(&self) -> usize {
        self.offset + self.values.len()
    }

    /// Value at dataset period index `period`, if covered.
    pub fn at(&self, period: usize) -> Option<S> {
        period
            .checked_sub(self.offset)
            .and_then(|i| self.values.get(i).copied())
    }

    /// Restriction to periods `start..end` (dataset indices).
    pub fn window(&self, start: usize, end: usize) -> Series<S> {
        let lo = start.max(self.offset);
        let hi = end.min(self.end()).max(lo);
        Series {
            entity: self.entity.clone(),
            offset: lo,
            values: self.values[lo - self.offset..hi - self.offset].to_vec(),
        }
    }

    /// `x_{t-k}` placed at period `t`.
    pub fn lag(&self, k: usize) -> Result<Series<S>, PanelError> {
        if k >= self.len() {
            return Err(PanelError::LagTooLarge {
                lag: k,
                len: self.len(),
            });
        }
        Ok(Series {
            entity: self.entity.clone(),
            offset: self.offset + k,
            values: self.values[..self.len() - k].to_vec(),
        })
    }

    pub fn first_difference(&self) -> Result<Series<S>, PanelError> {
        self.require_len(2)?;
        Ok(Series {
            entity: self.entity.clone(),
            offset: self.offset + 1,
            values: self.values.windows(2).map(|w| w[1] - w[0]).collect(),
        })
    }

    /// Deviation from the entity's own time mean over the series.
    pub fn within_transform(&self) -> Result<Series<S>, PanelError> {
        self.require_len(2)?;
        let mean = self.mean();
        Ok(Series {
            entity: self.entity.clone(),
            offset: self.offset,
            values: self.values.iter().map(|&v| v - mean).collect(),
        })
    }

    /// Forward orthogonal deviations.
    ///
    /// Position `t` (of `T`) maps to `c_t (x_t - mean(x_{t+1..T}))` with
    /// `c_t = sqrt((T-t)/(T-t+1))`. The last period has no future and is
    /// dropped; the offset is unchanged.
    pub fn orthogonal_deviations(&self) -> Result<Series<S>, PanelError> {
        self.require_len(2)?;
        let n = self.len();
        let mut values = Vec::with_capacity(n - 1);
        // Running sum of the future values, built from the back.
        let mut tail_sum = S::zero();
        let mut future = vec![S::zero(); n];
        for t in (0..n).rev() {
            future[t] = tail_sum;
            tail_sum += self.values[t];
        }
        for (t, &x) in self.values.iter().enumerate().take(n - 1) {
            let remaining = n - t - 1;
            let r = S::of_usize(remaining);
            let future_mean = future[t] / r;
            let c = Float::sqrt(r / (r + S::one()));
            values.push(c * (x - future_mean));
        }
        Ok(Series {
            entity: self.entity.clone(),
            offset: self.offset,
            values,
        })
    }

    pub fn mean(&self) -> S {
        let sum = self.values.iter().fold(S::zero(), |acc, &v| acc + v);
        sum / S::of_usize(self.len().max(1))
    }

    fn require_len(&self, min: usize) -> Result<(), PanelError> {
        if self.len() < min {
            Err(PanelError::SeriesTooShort { len: self.len(), min })
        } else {
            Ok(())
        }
    }
}

/// Cuts every series to the periods covered by all of them.
pub fn align<S: Scalar>(series: &[Series<S>]) -> Vec<Series<S>> {
    let start = series.iter().map(|s| s.offset).max().unwrap_or(0);
    let end = series.iter().map(Series::end).min().unwrap_or(0);
    series.iter().map(|s| s.window(start, end)).collect()
}
