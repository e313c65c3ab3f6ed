use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::UnitRootError;
use crate::linalg::{self, LinalgError};
use crate::panel::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    None,
    Intercept,
    InterceptAndTrend,
}

impl Deterministic {
    pub fn tag(self) -> &'static str {
        match self {
            Deterministic::None => "none",
            Deterministic::Intercept => "intercept",
            Deterministic::InterceptAndTrend => "intercept_and_trend",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "none" => Some(Deterministic::None),
            "intercept" | "c" => Some(Deterministic::Intercept),
            "intercept_and_trend" | "trend" | "ct" => Some(Deterministic::InterceptAndTrend),
            _ => None,
        }
    }

    pub fn columns(self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Intercept => 1,
            Deterministic::InterceptAndTrend => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagOrder {
    Fixed(usize),
    /// AIC over `0..=floor(T/3) - 1`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdfSpec {
    pub deterministic: Deterministic,
    pub lags: LagOrder,
}

impl AdfSpec {
    pub fn new(deterministic: Deterministic, lags: LagOrder) -> Self {
        Self { deterministic, lags }
    }

    pub fn intercept(lags: usize) -> Self {
        Self::new(Deterministic::Intercept, LagOrder::Fixed(lags))
    }
}

impl Default for AdfSpec {
    fn default() -> Self {
        Self::intercept(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-ratio on the lagged level.
    pub rho_t_statistic: f64,
    pub rho_coefficient: f64,
    pub lags: usize,
    pub lag_coefficients: Vec<f64>,
    pub residual_variance: f64,
    pub n_obs: usize,
}

/// Regression pieces shared by the single-series and pooled tests.
pub(crate) struct AdfDesign {
    pub dy: DVector<f64>,
    pub level: DVector<f64>,
    /// Lagged differences followed by deterministic columns.
    pub other: DMatrix<f64>,
}

impl AdfDesign {
    pub fn full(&self) -> DMatrix<f64> {
        let n = self.dy.len();
        let mut x = DMatrix::zeros(n, 1 + self.other.ncols());
        x.set_column(0, &self.level);
        x.columns_mut(1, self.other.ncols()).copy_from(&self.other);
        x
    }
}

/// `Δy_t` on `y_{t-1}`, `Δy_{t-1..t-p}` and deterministics for
/// `t = start..T-1`, where `start ≥ p + 1`.
pub(crate) fn design(values: &[f64], p: usize, start: usize, det: Deterministic) -> AdfDesign {
    let t_len = values.len();
    let n = t_len - start;
    let k_other = p + det.columns();
    let mut dy = DVector::zeros(n);
    let mut level = DVector::zeros(n);
    let mut other = DMatrix::zeros(n, k_other);
    for (r, t) in (start..t_len).enumerate() {
        dy[r] = values[t] - values[t - 1];
        level[r] = values[t - 1];
        for j in 1..=p {
            other[(r, j - 1)] = values[t - j] - values[t - j - 1];
        }
        match det {
            Deterministic::None => {}
            Deterministic::Intercept => other[(r, p)] = 1.0,
            Deterministic::InterceptAndTrend => {
                other[(r, p)] = 1.0;
                other[(r, p + 1)] = t as f64;
            }
        }
    }
    AdfDesign { dy, level, other }
}

pub(crate) fn max_auto_lag(t_len: usize) -> usize {
    (t_len / 3).saturating_sub(1).min(t_len.saturating_sub(4))
}

fn check_length(t_len: usize, p: usize, det: Deterministic) -> Result<(), UnitRootError> {
    // At least one residual degree of freedom on top of `T ≥ p + 4`.
    let required = (p + 4).max(2 * p + 3 + det.columns());
    if t_len < required {
        return Err(UnitRootError::TooFewObservations { len: t_len, required });
    }
    Ok(())
}

fn map_linalg(e: LinalgError) -> UnitRootError {
    match e {
        LinalgError::RankDeficient { columns } => UnitRootError::RankDeficient { columns },
        LinalgError::TooFewObservations { rows, cols } => UnitRootError::TooFewObservations {
            len: rows,
            required: cols + 1,
        },
        LinalgError::NotPositiveDefinite => UnitRootError::RankDeficient { columns: vec![] },
    }
}

/// Lag order chosen by AIC on the common sample that the largest order allows.
pub(crate) fn select_lags(values: &[f64], det: Deterministic) -> Result<usize, UnitRootError> {
    let t_len = values.len();
    let p_max = max_auto_lag(t_len);
    let mut best = (f64::INFINITY, 0);
    for p in 0..=p_max {
        if check_length(t_len, p, det).is_err() {
            break;
        }
        let d = design(values, p, p_max + 1, det);
        let n = d.dy.len();
        let k = 1 + d.other.ncols();
        if n <= k {
            break;
        }
        let fit = match linalg::least_squares(&d.full(), &d.dy) {
            Ok(fit) => fit,
            Err(_) => continue,
        };
        if !(fit.ssr > 0.0) {
            continue;
        }
        let aic = (fit.ssr / n as f64).ln() + 2.0 * k as f64 / n as f64;
        if aic < best.0 {
            best = (aic, p);
        }
    }
    Ok(best.1)
}

pub(crate) fn resolve_lags(values: &[f64], spec: &AdfSpec) -> Result<usize, UnitRootError> {
    match spec.lags {
        LagOrder::Fixed(p) => Ok(p),
        LagOrder::Auto => select_lags(values, spec.deterministic),
    }
}

/// Augmented Dickey-Fuller regression on a raw slice.
pub fn adf_values(values: &[f64], spec: &AdfSpec) -> Result<AdfResult, UnitRootError> {
    let t_len = values.len();
    check_length(t_len, 0, spec.deterministic)?;
    let p = resolve_lags(values, spec)?;
    check_length(t_len, p, spec.deterministic)?;
    let d = design(values, p, p + 1, spec.deterministic);
    let n = d.dy.len();
    let k = 1 + d.other.ncols();

    let scale = d.dy.dot(&d.dy);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(UnitRootError::DegenerateVariance);
    }
    let fit = linalg::least_squares(&d.full(), &d.dy).map_err(map_linalg)?;
    if fit.ssr <= 1e-20 * scale {
        return Err(UnitRootError::DegenerateVariance);
    }
    let residual_variance = fit.ssr / (n - k) as f64;
    let se = (residual_variance * fit.xtx_inv[(0, 0)]).sqrt();
    let rho = fit.coefficients[0];
    Ok(AdfResult {
        rho_t_statistic: rho / se,
        rho_coefficient: rho,
        lags: p,
        lag_coefficients: fit.coefficients.rows(1, p).iter().copied().collect(),
        residual_variance,
        n_obs: n,
    })
}

pub fn adf_regression(series: &Series, spec: &AdfSpec) -> Result<AdfResult, UnitRootError> {
    adf_values(&series.values, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn linear_trend_is_degenerate() {
        let y: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(matches!(
            adf_values(&y, &AdfSpec::intercept(0)),
            Err(UnitRootError::DegenerateVariance)
        ));
    }

    #[test]
    fn white_noise_rejects_strongly() {
        let y = noise(200, 3);
        let r = adf_values(&y, &AdfSpec::intercept(0)).unwrap();
        assert!(r.rho_t_statistic < -5.0);
        assert_eq!(r.n_obs, 199);

        // Direct evaluation through the centred simple regression.
        let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        let lag = &y[..199];
        let mx = lag.iter().sum::<f64>() / 199.0;
        let my = dy.iter().sum::<f64>() / 199.0;
        let sxx: f64 = lag.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = lag.iter().zip(&dy).map(|(x, d)| (x - mx) * (d - my)).sum();
        let b = sxy / sxx;
        let ssr: f64 = lag.iter().zip(&dy).map(|(x, d)| (d - my - b * (x - mx)).powi(2)).sum();
        let t = b / (ssr / 197.0 / sxx).sqrt();
        assert!((r.rho_t_statistic - t).abs() < 1e-9 * t.abs());
        assert!((r.rho_coefficient - b).abs() < 1e-12);
    }

    #[test]
    fn observation_count_with_lags() {
        let y = noise(30, 4);
        for p in 0..5 {
            let r = adf_values(&y, &AdfSpec::intercept(p)).unwrap();
            assert_eq!(r.n_obs, 30 - 1 - p);
            assert_eq!(r.lag_coefficients.len(), p);
            assert!(r.residual_variance > 0.0);
        }
    }

    #[test]
    fn length_requirement() {
        let y = noise(6, 5);
        assert!(adf_values(&y, &AdfSpec::intercept(1)).is_ok());
        assert!(matches!(
            adf_values(&y, &AdfSpec::intercept(2)),
            Err(UnitRootError::TooFewObservations { len: 6, required: 8 })
        ));
    }

    #[test]
    fn constant_series() {
        assert!(matches!(
            adf_values(&[2.0; 10], &AdfSpec::intercept(0)),
            Err(UnitRootError::DegenerateVariance)
        ));
    }

    #[test]
    fn auto_lags_pick_up_ar_structure() {
        // Unit root with strongly autocorrelated differences.
        let e = noise(400, 6);
        let mut d = 0.0;
        let mut y = Vec::with_capacity(400);
        let mut level = 0.0;
        for v in e {
            d = 0.7 * d + v;
            level += d;
            y.push(level);
        }
        let spec = AdfSpec::new(Deterministic::Intercept, LagOrder::Auto);
        let r = adf_values(&y, &spec).unwrap();
        assert!(r.lags >= 1);
        let white = adf_values(&noise(12, 7), &spec).unwrap();
        assert!(white.lags <= max_auto_lag(12));
    }

    #[test]
    fn trend_spec() {
        let y: Vec<f64> = noise(60, 8)
            .iter()
            .enumerate()
            .map(|(t, e)| 0.3 * t as f64 + e)
            .collect();
        let spec = AdfSpec::new(Deterministic::InterceptAndTrend, LagOrder::Fixed(1));
        let r = adf_values(&y, &spec).unwrap();
        assert!(r.rho_t_statistic < -3.0);
    }

    proptest! {
        #[test]
        fn affine_invariance(seed in 0u64..500, a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0], b in -100.0f64..100.0, p in 0usize..3) {
            let y = noise(25, seed);
            let z: Vec<f64> = y.iter().map(|v| a * v + b).collect();
            let r1 = adf_values(&y, &AdfSpec::intercept(p)).unwrap();
            let r2 = adf_values(&z, &AdfSpec::intercept(p)).unwrap();
            prop_assert!((r1.rho_t_statistic - r2.rho_t_statistic).abs() < 1e-8);
        }
    }
}
