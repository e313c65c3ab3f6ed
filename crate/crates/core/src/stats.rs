//! Hypothesis-test results and reference distributions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Which side of the reference distribution counts as evidence against the null.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Left,
    Right,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Reference {
    ChiSquare {
        df: usize,
    },
    StandardNormal {
        tail: Tail,
    },
    /// Empirical null distribution from seeded simulation.
    Simulated {
        draws: usize,
        tail: Tail,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub reference: Reference,
    pub df: Option<usize>,
    pub p_value: f64,
    pub reject_5pct: bool,
    pub note: String,
}

impl TestResult {
    pub fn chi_square(statistic: f64, df: usize, note: impl Into<String>) -> Self {
        let p_value = chi_square_upper(statistic, df);
        Self {
            statistic,
            reference: Reference::ChiSquare { df },
            df: Some(df),
            p_value,
            reject_5pct: p_value < 0.05,
            note: note.into(),
        }
    }

    pub fn normal(statistic: f64, tail: Tail, note: impl Into<String>) -> Self {
        let p_value = normal_p_value(statistic, tail);
        Self {
            statistic,
            reference: Reference::StandardNormal { tail },
            df: None,
            p_value,
            reject_5pct: p_value < 0.05,
            note: note.into(),
        }
    }

    /// Left-tail test against a sorted sample of simulated null statistics.
    pub fn simulated_left(statistic: f64, sorted_draws: &[f64], note: impl Into<String>) -> Self {
        let below = sorted_draws.partition_point(|&d| d <= statistic);
        let p_value = (below + 1) as f64 / (sorted_draws.len() + 1) as f64;
        Self {
            statistic,
            reference: Reference::Simulated {
                draws: sorted_draws.len(),
                tail: Tail::Left,
            },
            df: None,
            p_value,
            reject_5pct: p_value < 0.05,
            note: note.into(),
        }
    }

    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

pub fn standard_normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

pub fn normal_p_value(z: f64, tail: Tail) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let p = match tail {
        Tail::Left => standard_normal_cdf(z),
        Tail::Right => 1.0 - standard_normal_cdf(z),
        Tail::TwoSided => 2.0 * (1.0 - standard_normal_cdf(z.abs())),
    };
    p.clamp(0.0, 1.0)
}

/// Upper-tail probability of a chi-square variate with `df` degrees of freedom.
pub fn chi_square_upper(statistic: f64, df: usize) -> f64 {
    if df == 0 || statistic.is_nan() {
        return f64::NAN;
    }
    if statistic <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    dist.sf(statistic).clamp(0.0, 1.0)
}

/// Generator for replication `rep`: stream `rep` of the root seed.
///
/// Every simulation in the crate draws replication `r` from this generator,
/// so results do not depend on how replications are spread over threads.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Mean and unbiased variance accumulated in input order.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1) as f64)
}
