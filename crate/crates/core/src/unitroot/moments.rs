use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adf::{adf_values, AdfSpec, Deterministic};
use super::UnitRootError;
use crate::linalg;
use crate::stats::{mean_variance, replication_rng};

const BUNDLED: &str = include_str!("../../data/ips_moments.csv");

/// Simulated null mean and variance of the ADF t-ratio at one series length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub mean: f64,
    pub variance: f64,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    #[serde(rename = "T")]
    t: usize,
    deterministic: String,
    mean: f64,
    variance: f64,
    replications: usize,
    seed: u64,
}

/// Lookup of `E[t_T]` and `Var[t_T]` by series length and deterministic tag.
///
/// Raw-series tags are [`Deterministic::tag`]; residual tables use
/// [`residual_tag`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentTable {
    pub entries: BTreeMap<(String, usize), MomentEntry>,
}

/// Tag of the moment table for ADF tests on residuals of a levels regression
/// with `regressors` right-hand variables plus an entity intercept.
pub fn residual_tag(regressors: usize, det: Deterministic) -> String {
    format!("coint{regressors}:{}", det.tag())
}

impl MomentTable {
    /// Table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_csv(BUNDLED.as_bytes()).expect("bundled moment table parses")
    }

    pub fn insert(&mut self, tag: impl Into<String>, t: usize, entry: MomentEntry) {
        self.entries.insert((tag.into(), t), entry);
    }

    pub fn get(&self, tag: &str, t: usize) -> Result<&MomentEntry, UnitRootError> {
        self.entries
            .get(&(tag.to_string(), t))
            .ok_or_else(|| UnitRootError::MissingMoments {
                t,
                deterministic: tag.to_string(),
            })
    }

    pub fn extend(&mut self, other: MomentTable) {
        self.entries.extend(other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self, UnitRootError> {
        let mut table = Self::default();
        let mut rdr = csv::Reader::from_reader(reader);
        for row in rdr.deserialize() {
            let row: Row = row.map_err(|e| UnitRootError::Table(e.to_string()))?;
            if !(row.variance > 0.0) {
                return Err(UnitRootError::Table(format!(
                    "non-positive variance for T={} {}",
                    row.t, row.deterministic
                )));
            }
            table.insert(
                row.deterministic,
                row.t,
                MomentEntry {
                    mean: row.mean,
                    variance: row.variance,
                    replications: row.replications,
                    seed: row.seed,
                },
            );
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, UnitRootError> {
        let file = std::fs::File::open(path).map_err(|e| UnitRootError::Table(e.to_string()))?;
        Self::from_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), UnitRootError> {
        let mut w = csv::Writer::from_writer(writer);
        for ((tag, t), e) in &self.entries {
            w.serialize(Row {
                t: *t,
                deterministic: tag.clone(),
                mean: e.mean,
                variance: e.variance,
                replications: e.replications,
                seed: e.seed,
            })
            .map_err(|e| UnitRootError::Table(e.to_string()))?;
        }
        w.flush().map_err(|e| UnitRootError::Table(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), UnitRootError> {
        let file = std::fs::File::create(path).map_err(|e| UnitRootError::Table(e.to_string()))?;
        self.write_csv(file)
    }
}

pub(crate) fn random_walk<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut level = 0.0;
    (0..len)
        .map(|_| {
            level += rng.sample::<f64, _>(StandardNormal);
            level
        })
        .collect()
}

/// Moments of the draws that produced a statistic; failed draws are skipped.
fn summarize(draws: Vec<Option<f64>>, replications: usize, seed: u64) -> Option<MomentEntry> {
    let values: Vec<f64> = draws.into_iter().flatten().collect();
    let (mean, variance) = mean_variance(&values);
    (variance > 0.0).then_some(MomentEntry {
        mean,
        variance,
        replications,
        seed,
    })
}

/// Null moments of the ADF t-ratio for driftless Gaussian random walks of
/// each length in `t_values`.
///
/// Replication `r` draws from stream `r` of the root seed whatever `T` is, so
/// any single entry can be regenerated on its own and the result does not
/// depend on the number of worker threads.
pub fn simulate_moment_table(t_values: &[usize], spec: &AdfSpec, replications: usize, seed: u64) -> MomentTable {
    let mut table = MomentTable::default();
    for &t in t_values {
        let draws: Vec<Option<f64>> = (0..replications as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(seed, rep);
                let y = random_walk(&mut rng, t);
                adf_values(&y, spec).ok().map(|r| r.rho_t_statistic)
            })
            .collect();
        if let Some(entry) = summarize(draws, replications, seed) {
            table.insert(spec.deterministic.tag(), t, entry);
        }
    }
    table
}

/// Residuals of `y` on an intercept and `x` columns.
pub(crate) fn levels_residuals(y: &[f64], xs: &[Vec<f64>]) -> Result<Vec<f64>, UnitRootError> {
    let n = y.len();
    let design = DMatrix::from_fn(n, xs.len() + 1, |r, c| if c == 0 { 1.0 } else { xs[c - 1][r] });
    let fit = linalg::least_squares(&design, &DVector::from_column_slice(y))
        .map_err(|e| UnitRootError::Estimation(e.to_string()))?;
    Ok(fit.residuals.iter().copied().collect())
}

/// Null moments of the ADF t-ratio applied to residuals of a levels
/// regression among `regressors + 1` independent random walks.
pub fn simulate_residual_moment_table(
    t_values: &[usize],
    regressors: usize,
    spec: &AdfSpec,
    replications: usize,
    seed: u64,
) -> MomentTable {
    let mut table = MomentTable::default();
    for &t in t_values {
        let draws: Vec<Option<f64>> = (0..replications as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(seed, rep);
                let y = random_walk(&mut rng, t);
                let xs: Vec<Vec<f64>> = (0..regressors).map(|_| random_walk(&mut rng, t)).collect();
                let e = levels_residuals(&y, &xs).ok()?;
                adf_values(&e, spec).ok().map(|r| r.rho_t_statistic)
            })
            .collect();
        if let Some(entry) = summarize(draws, replications, seed) {
            table.insert(residual_tag(regressors, spec.deterministic), t, entry);
        }
    }
    table
}

/// Grid of the bundled table: series lengths and residual regressor counts.
pub const BUNDLED_T: std::ops::RangeInclusive<usize> = 6..=60;
pub const BUNDLED_EXTRA_T: [usize; 4] = [70, 80, 90, 100];
pub const BUNDLED_MAX_REGRESSORS: usize = 4;

/// Regenerates the bundled table: raw-series moments for every deterministic
/// specification and residual moments (no deterministics) for one to
/// [`BUNDLED_MAX_REGRESSORS`] regressors.
pub fn simulate_bundled_table(replications: usize, seed: u64) -> MomentTable {
    let t_values: Vec<usize> = BUNDLED_T.chain(BUNDLED_EXTRA_T).collect();
    let mut table = MomentTable::default();
    for det in [
        Deterministic::None,
        Deterministic::Intercept,
        Deterministic::InterceptAndTrend,
    ] {
        let spec = AdfSpec::new(det, super::LagOrder::Fixed(0));
        table.extend(simulate_moment_table(&t_values, &spec, replications, seed));
    }
    let resid_spec = AdfSpec::new(Deterministic::None, super::LagOrder::Fixed(0));
    for k in 1..=BUNDLED_MAX_REGRESSORS {
        table.extend(simulate_residual_moment_table(
            &t_values,
            k,
            &resid_spec,
            replications,
            seed,
        ));
    }
    table
}
