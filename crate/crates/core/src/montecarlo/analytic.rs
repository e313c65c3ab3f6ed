use super::{InitialCondition, McError};

fn check_alpha(alpha: f64) -> Result<(), McError> {
    if alpha.abs() < 1.0 {
        Ok(())
    } else {
        Err(McError::InvalidAlpha(alpha))
    }
}

/// Probability limit (N → ∞) of the within estimator's error in the pure
/// AR(1) panel with `t` regression periods and a stationary start.
///
/// ```text
///            -(1+α)/(T-1) · [1 - (1-α^T)/(T(1-α))]
/// bias = --------------------------------------------------
///        1 - 2α/((1-α)(T-1)) · [1 - (1-α^T)/(T(1-α))]
/// ```
pub fn analytic_within_bias(alpha: f64, t: usize) -> Result<f64, McError> {
    check_alpha(alpha)?;
    if t < 2 {
        return Err(McError::InvalidConfig(format!("T must be at least 2, got {t}")));
    }
    let tf = t as f64;
    let a_t = alpha.powi(t as i32);
    let inner = 1.0 - (1.0 - a_t) / (tf * (1.0 - alpha));
    let num = -(1.0 + alpha) / (tf - 1.0) * inner;
    let den = 1.0 - 2.0 * alpha / ((1.0 - alpha) * (tf - 1.0)) * inner;
    Ok(num / den)
}

/// `(E[y_0²], cov(y_0, μ))` implied by the initial condition.
pub fn initial_moments(alpha: f64, sigma_mu2: f64, sigma_v2: f64, init: InitialCondition) -> (f64, f64) {
    let w2 = sigma_v2 / (1.0 - alpha * alpha);
    match init {
        InitialCondition::Stationary => (sigma_mu2 / (1.0 - alpha).powi(2) + w2, sigma_mu2 / (1.0 - alpha)),
        InitialCondition::FixedZero => (0.0, 0.0),
        InitialCondition::Custom { cov0 } => {
            let load = if sigma_mu2 > 0.0 { cov0 * cov0 / sigma_mu2 } else { 0.0 };
            (load + w2, cov0)
        }
    }
}

/// Probability limit of pooled OLS error in the pure AR(1) panel,
/// `plim (1/NT) ΣΣ (μ_i+v_it) y_{i,t-1} / plim (1/NT) ΣΣ y_{i,t-1}²`.
///
/// With `A₁ = Σ_{j<T} α^j`, `A₂ = Σ_{j<T} α^{2j}`, `c = cov(y_0, μ)` and
/// `s₀ = E[y_0²]`:
///
/// ```text
/// num = [c A₁ + σ_μ² (T - A₁)/(1-α)] / T
/// den = [s₀ A₂ + σ_μ² (T - 2A₁ + A₂)/(1-α)² + σ_v² (T - A₂)/(1-α²)
///        + 2c (A₁ - A₂)/(1-α)] / T
/// ```
pub fn analytic_ols_bias(
    alpha: f64,
    sigma_mu2: f64,
    sigma_v2: f64,
    t: usize,
    init: InitialCondition,
) -> Result<f64, McError> {
    check_alpha(alpha)?;
    if !(sigma_mu2 >= 0.0 && sigma_v2 >= 0.0) {
        return Err(McError::InvalidConfig("variances must be non-negative".into()));
    }
    if t < 1 {
        return Err(McError::InvalidConfig("T must be at least 1".into()));
    }
    let tf = t as f64;
    let (s0, c) = initial_moments(alpha, sigma_mu2, sigma_v2, init);
    let a1: f64 = (0..t).map(|j| alpha.powi(j as i32)).sum();
    let a2: f64 = (0..t).map(|j| alpha.powi(2 * j as i32)).sum();
    let num = (c * a1 + sigma_mu2 * (tf - a1) / (1.0 - alpha)) / tf;
    let den = (s0 * a2
        + sigma_mu2 * (tf - 2.0 * a1 + a2) / (1.0 - alpha).powi(2)
        + sigma_v2 * (tf - a2) / (1.0 - alpha * alpha)
        + 2.0 * c * (a1 - a2) / (1.0 - alpha))
        / tf;
    if !(den > 1e-300) {
        return Err(McError::DegenerateDenominator);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Same limit written through `h = ((T-1) - Tα + α^T) / (T²(1-α)²)`.
    fn within_oracle(alpha: f64, t: usize) -> f64 {
        let tf = t as f64;
        let h = ((tf - 1.0) - tf * alpha + alpha.powi(t as i32)) / (tf * tf * (1.0 - alpha).powi(2));
        -h * (1.0 - alpha * alpha) / (1.0 - 1.0 / tf - 2.0 * alpha * h)
    }

    #[test]
    fn within_bias_at_zero_alpha() {
        assert!((analytic_within_bias(0.0, 5).unwrap() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn within_bias_vanishes_for_long_panels() {
        assert!(analytic_within_bias(0.5, 5000).unwrap().abs() < 1e-3);
    }

    #[test]
    fn within_bias_monotone_in_t() {
        for alpha in [0.3, 0.5, 0.8] {
            let mut prev = analytic_within_bias(alpha, 3).unwrap();
            assert!(prev < 0.0);
            for t in 4..=100 {
                let b = analytic_within_bias(alpha, t).unwrap();
                assert!(b < 0.0 && b > prev, "alpha={alpha} T={t}");
                prev = b;
            }
        }
    }

    #[test]
    fn invalid_alpha() {
        assert!(matches!(analytic_within_bias(1.0, 5), Err(McError::InvalidAlpha(_))));
        assert!(matches!(
            analytic_ols_bias(-1.2, 1.0, 1.0, 5, InitialCondition::Stationary),
            Err(McError::InvalidAlpha(_))
        ));
    }

    #[test]
    fn ols_bias_without_effects_is_zero() {
        let b = analytic_ols_bias(0.5, 0.0, 1.0, 5, InitialCondition::Custom { cov0: 0.0 }).unwrap();
        assert_eq!(b, 0.0);
        let b = analytic_ols_bias(0.5, 0.0, 1.0, 5, InitialCondition::Stationary).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn ols_bias_increases_with_effect_variance() {
        let b: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&s| analytic_ols_bias(0.5, s, 1.0, 5, InitialCondition::Stationary).unwrap())
            .collect();
        assert!(b[0] > 0.0 && b[0] < b[1] && b[1] < b[2]);
    }

    #[test]
    fn ols_bias_stationary_closed_form() {
        // Under a stationary start every y_{t-1} has the same moments, so the
        // ratio is cov(μ, y)/Var(y) = [σ_μ²/(1-α)] / [σ_μ²/(1-α)² + σ_v²/(1-α²)].
        let (a, m, v): (f64, f64, f64) = (0.5, 1.0, 1.0);
        let direct = (m / (1.0 - a)) / (m / (1.0 - a) * (1.0 - a).recip() + v / (1.0 - a * a));
        for t in [1, 2, 5, 40] {
            let b = analytic_ols_bias(a, m, v, t, InitialCondition::Stationary).unwrap();
            assert!((b - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_denominator() {
        assert!(matches!(
            analytic_ols_bias(0.5, 0.0, 0.0, 5, InitialCondition::FixedZero),
            Err(McError::DegenerateDenominator)
        ));
    }

    proptest! {
        #[test]
        fn within_matches_alternative_form(alpha in -0.95f64..0.95, t in 2usize..200) {
            let a = analytic_within_bias(alpha, t).unwrap();
            let b = within_oracle(alpha, t);
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }
}
