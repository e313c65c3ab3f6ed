use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adf::{adf_values, design, resolve_lags, AdfSpec};
use super::moments::{levels_residuals, random_walk, residual_tag};
use super::{EntityAdf, Ips, LevinLin, MomentTable, PanelURResult, UnitRootError};
use crate::linalg;
use crate::panel::{ModelSpec, PanelDataset};
use crate::stats::{replication_rng, Tail, TestResult};

fn in_entity(entity: &str, e: UnitRootError) -> UnitRootError {
    UnitRootError::Entity {
        entity: entity.to_string(),
        source: Box::new(e),
    }
}

fn entity_adfs(dataset: &PanelDataset, variable: &str, spec: &AdfSpec) -> Result<Vec<EntityAdf>, UnitRootError> {
    let mut out = Vec::with_capacity(dataset.n_entities());
    for (i, entity) in dataset.entities().iter().enumerate() {
        let values = dataset.values(variable, i)?;
        let adf = adf_values(values, spec).map_err(|e| in_entity(entity, e))?;
        out.push(EntityAdf {
            entity: entity.clone(),
            adf,
        });
    }
    Ok(out)
}

/// Pooled Levin-Lin regression over a set of series.
///
/// Each series is regressed as in its own ADF test; `Δy_t` and `y_{t-1}`
/// are purged of the lagged differences and deterministics and divided by
/// the entity's ADF residual standard deviation, then `ρ` is estimated from
/// the stacked purged data. Returns `(ρ̂, t_ρ, df)` with
/// `df = Σ n_i - Σ (k_i - 1) - 1`.
pub fn levin_lin_statistic(series: &[&[f64]], spec: &AdfSpec) -> Result<(f64, f64, usize), UnitRootError> {
    let mut svv = 0.0;
    let mut sve = 0.0;
    let mut purged = Vec::with_capacity(series.len());
    let mut df = 0usize;
    for values in series {
        let adf = adf_values(values, spec)?;
        let p = resolve_lags(values, spec)?;
        let d = design(values, p, p + 1, spec.deterministic);
        let e = linalg::partial_out(&d.other, &d.dy).map_err(|_| UnitRootError::RankDeficient { columns: vec![] })?;
        let v =
            linalg::partial_out(&d.other, &d.level).map_err(|_| UnitRootError::RankDeficient { columns: vec![] })?;
        let sigma = adf.residual_variance.sqrt();
        let (e, v) = (e / sigma, v / sigma);
        svv += v.dot(&v);
        sve += v.dot(&e);
        df += d.dy.len() - d.other.ncols();
        purged.push((e, v));
    }
    let df = df.saturating_sub(1).max(1);
    if !(svv > 0.0) {
        return Err(UnitRootError::DegenerateVariance);
    }
    let rho = sve / svv;
    let ssr: f64 = purged
        .iter()
        .map(|(e, v)| {
            let u = e - v * rho;
            u.dot(&u)
        })
        .sum();
    let s2 = ssr / df as f64;
    if !(s2 > 0.0) {
        return Err(UnitRootError::DegenerateVariance);
    }
    Ok((rho, rho * svv.sqrt() / s2.sqrt(), df))
}

/// Sorted null draws of the Levin-Lin statistic for one panel shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalNull {
    pub n_entities: usize,
    pub n_periods: usize,
    pub spec: AdfSpec,
    pub replications: usize,
    pub seed: u64,
    pub draws: Vec<f64>,
}

impl EmpiricalNull {
    pub fn test(&self, statistic: f64) -> TestResult {
        TestResult::simulated_left(
            statistic,
            &self.draws,
            format!(
                "simulated null: {} random-walk panels, N={}, T={}",
                self.draws.len(),
                self.n_entities,
                self.n_periods
            ),
        )
    }
}

/// Simulates the Levin-Lin statistic on panels of independent driftless
/// random walks. Replication `r` uses stream `r` of `seed`.
pub fn simulate_ll_null(
    n_entities: usize,
    n_periods: usize,
    spec: &AdfSpec,
    replications: usize,
    seed: u64,
) -> EmpiricalNull {
    let draws: Vec<Option<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let panel: Vec<Vec<f64>> = (0..n_entities).map(|_| random_walk(&mut rng, n_periods)).collect();
            let refs: Vec<&[f64]> = panel.iter().map(Vec::as_slice).collect();
            levin_lin_statistic(&refs, spec).ok().map(|(_, t, _)| t)
        })
        .collect();
    let mut draws: Vec<f64> = draws.into_iter().flatten().collect();
    draws.sort_by(f64::total_cmp);
    EmpiricalNull {
        n_entities,
        n_periods,
        spec: *spec,
        replications,
        seed,
        draws,
    }
}

/// Levin-Lin test of a common unit root in `variable`.
///
/// Without a simulated null the statistic is reported with an undefined
/// p-value.
pub fn levin_lin_test(
    dataset: &PanelDataset,
    variable: &str,
    spec: &AdfSpec,
    null: Option<&EmpiricalNull>,
) -> Result<PanelURResult, UnitRootError> {
    let entities = entity_adfs(dataset, variable, spec)?;
    let columns: Vec<&[f64]> = (0..dataset.n_entities())
        .map(|i| dataset.values(variable, i))
        .collect::<Result<_, _>>()?;
    let (rho, statistic, df) = levin_lin_statistic(&columns, spec)?;
    let test = match null {
        Some(null) => {
            if null.n_entities != dataset.n_entities() || null.n_periods != dataset.n_periods() || null.spec != *spec {
                return Err(UnitRootError::InvalidSpec(format!(
                    "simulated null was drawn for N={}, T={} but the panel has N={}, T={}",
                    null.n_entities,
                    null.n_periods,
                    dataset.n_entities(),
                    dataset.n_periods()
                )));
            }
            null.test(statistic)
        }
        None => TestResult {
            p_value: f64::NAN,
            reject_5pct: false,
            ..TestResult::normal(statistic, Tail::Left, "no simulated null supplied")
        },
    };
    Ok(PanelURResult {
        variable: variable.to_string(),
        spec: *spec,
        entities,
        levin_lin: Some(LevinLin {
            rho,
            statistic,
            df,
            test,
        }),
        ips: None,
    })
}

/// `t_IPS = √N (t̄ - mean E_i) / sqrt(mean V_i)`, with `E_i`, `V_i` read at
/// each entity's effective length `T - p_i`.
fn ips_from(entities: &[EntityAdf], series_len: usize, tag: &str, moments: &MomentTable) -> Result<Ips, UnitRootError> {
    let n = entities.len();
    if n == 0 {
        return Err(UnitRootError::InvalidSpec("panel has no entities".into()));
    }
    let mut tsum = 0.0;
    let mut esum = 0.0;
    let mut vsum = 0.0;
    for e in entities {
        let m = moments.get(tag, series_len - e.adf.lags)?;
        tsum += e.adf.rho_t_statistic;
        esum += m.mean;
        vsum += m.variance;
    }
    let nf = n as f64;
    let tbar = tsum / nf;
    let (expected_mean, expected_variance) = (esum / nf, vsum / nf);
    let statistic = nf.sqrt() * (tbar - expected_mean) / expected_variance.sqrt();
    Ok(Ips {
        tbar,
        expected_mean,
        expected_variance,
        statistic,
        test: TestResult::normal(statistic, Tail::Left, "standard normal, left tail"),
    })
}

/// IPS t-bar test of a unit root in every entity against stationarity in some.
pub fn ips_tbar_test(
    dataset: &PanelDataset,
    variable: &str,
    spec: &AdfSpec,
    moments: &MomentTable,
) -> Result<PanelURResult, UnitRootError> {
    let entities = entity_adfs(dataset, variable, spec)?;
    let ips = ips_from(&entities, dataset.n_periods(), spec.deterministic.tag(), moments)?;
    Ok(PanelURResult {
        variable: variable.to_string(),
        spec: *spec,
        entities,
        levin_lin: None,
        ips: Some(ips),
    })
}

/// Residual-based panel cointegration test.
///
/// Each entity's levels regression of the dependent variable on an intercept
/// and the exogenous variables is fitted separately; the IPS test is then
/// applied to the residuals with the residual moment table. Rejecting the
/// residual unit root is evidence of cointegration.
pub fn residual_cointegration_test(
    dataset: &PanelDataset,
    model: &ModelSpec,
    spec: &AdfSpec,
    moments: &MomentTable,
) -> Result<PanelURResult, UnitRootError> {
    if model.ar_order != 0 {
        return Err(UnitRootError::InvalidSpec(
            "cointegration regression must be static (no lagged dependent variable)".into(),
        ));
    }
    if model.exogenous.is_empty() {
        return Err(UnitRootError::InvalidSpec(
            "cointegration regression needs at least one right-hand variable".into(),
        ));
    }
    model.validate(dataset)?;
    let mut entities = Vec::with_capacity(dataset.n_entities());
    for (i, entity) in dataset.entities().iter().enumerate() {
        let y = dataset.values(&model.dependent, i)?;
        let xs: Vec<Vec<f64>> = model
            .exogenous
            .iter()
            .map(|x| dataset.values(x, i).map(<[f64]>::to_vec))
            .collect::<Result<_, _>>()?;
        let resid = levels_residuals(y, &xs).map_err(|e| in_entity(entity, e))?;
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let ssr: f64 = resid.iter().map(|v| v * v).sum();
        if ssr <= 1e-20 * tss.max(f64::MIN_POSITIVE) {
            return Err(UnitRootError::TriviallyCointegrated { entity: entity.clone() });
        }
        let adf = adf_values(&resid, spec).map_err(|e| match e {
            UnitRootError::DegenerateVariance => UnitRootError::TriviallyCointegrated { entity: entity.clone() },
            e => in_entity(entity, e),
        })?;
        entities.push(EntityAdf {
            entity: entity.clone(),
            adf,
        });
    }
    let tag = residual_tag(model.exogenous.len(), spec.deterministic);
    let ips = ips_from(&entities, dataset.n_periods(), &tag, moments)?;
    Ok(PanelURResult {
        variable: format!("{} ~ {}", model.dependent, model.exogenous.join(" + ")),
        spec: *spec,
        entities,
        levin_lin: None,
        ips: Some(ips),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Deterministic, LagOrder, MomentEntry};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn panel(columns: Vec<(&str, Vec<Vec<f64>>)>) -> PanelDataset {
        let n = columns[0].1.len();
        let t = columns[0].1[0].len();
        PanelDataset::new(
            (0..n).map(|i| format!("c{i}")).collect(),
            1990,
            t,
            columns.into_iter().map(|(k, v)| (k.to_string(), v.concat())).collect(),
        )
        .unwrap()
    }

    fn walks(n: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| random_walk(&mut rng, t)).collect()
    }

    fn flat_table(tag: &str, t: usize, mean: f64, variance: f64) -> MomentTable {
        let mut m = MomentTable::default();
        m.insert(
            tag,
            t,
            MomentEntry {
                mean,
                variance,
                replications: 1,
                seed: 0,
            },
        );
        m
    }

    #[test]
    fn identical_entities_pool_to_the_single_series() {
        let y = walks(1, 15, 1).remove(0);
        let spec = AdfSpec::intercept(1);
        let single = adf_values(&y, &spec).unwrap();
        for n in [1usize, 4, 23] {
            let refs: Vec<&[f64]> = vec![y.as_slice(); n];
            let (rho, t, df) = levin_lin_statistic(&refs, &spec).unwrap();
            assert!((rho - single.rho_coefficient).abs() < 1e-10);
            let nn = single.n_obs;
            let k = 1 + 1 + 1;
            assert_eq!(df, n * nn - n * (k - 1) - 1);
            let adj = (n as f64).sqrt() * ((df as f64) / (n * (nn - k)) as f64).sqrt();
            assert!((t - single.rho_t_statistic * adj).abs() < 1e-9 * t.abs());
        }
    }

    #[test]
    fn ll_null_is_reproducible_and_finite() {
        let spec = AdfSpec::intercept(0);
        let a = simulate_ll_null(23, 13, &spec, 300, 9);
        let b = simulate_ll_null(23, 13, &spec, 300, 9);
        assert_eq!(a, b);
        assert_eq!(a.draws.len(), 300);
        let (_, var) = crate::stats::mean_variance(&a.draws);
        assert!(var.is_finite() && var > 0.0);
    }

    #[test]
    fn ll_test_rejects_stationary_panel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ys: Vec<Vec<f64>> = (0..23)
            .map(|_| {
                let mut v = 0.0;
                (0..40)
                    .map(|_| {
                        v = 0.3 * v + rng.sample::<f64, _>(StandardNormal);
                        v
                    })
                    .collect()
            })
            .collect();
        let d = panel(vec![("y", ys)]);
        let spec = AdfSpec::intercept(0);
        let null = simulate_ll_null(23, 40, &spec, 500, 3);
        let r = levin_lin_test(&d, "y", &spec, Some(&null)).unwrap();
        assert!(r.levin_lin.unwrap().test.reject_5pct);
        let wrong = simulate_ll_null(22, 40, &spec, 10, 3);
        assert!(levin_lin_test(&d, "y", &spec, Some(&wrong)).is_err());
    }

    #[test]
    fn ips_single_entity_collapses() {
        let d = panel(vec![("y", walks(1, 13, 4))]);
        let spec = AdfSpec::intercept(0);
        let table = flat_table("intercept", 13, -1.5, 0.8);
        let r = ips_tbar_test(&d, "y", &spec, &table).unwrap();
        let t1 = r.entities[0].adf.rho_t_statistic;
        let ips = r.ips.unwrap();
        assert!((ips.statistic - (t1 + 1.5) / 0.8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ips_is_zero_at_expected_mean() {
        let d = panel(vec![("y", vec![walks(1, 13, 5).remove(0); 6])]);
        let spec = AdfSpec::intercept(0);
        let t = adf_values(d.values("y", 0).unwrap(), &spec).unwrap().rho_t_statistic;
        let table = flat_table("intercept", 13, t, 0.7);
        let r = ips_tbar_test(&d, "y", &spec, &table).unwrap();
        assert!(r.ips.unwrap().statistic.abs() < 1e-12);
    }

    #[test]
    fn tbar_is_the_mean_and_affine_invariant() {
        let ys = walks(7, 20, 6);
        let d = panel(vec![("y", ys.clone())]);
        let spec = AdfSpec::intercept(1);
        let table = MomentTable::bundled();
        let r = ips_tbar_test(&d, "y", &spec, &table).unwrap();
        let mean = r.entities.iter().map(|e| e.adf.rho_t_statistic).sum::<f64>() / 7.0;
        let ips = r.ips.unwrap();
        assert!((ips.tbar - mean).abs() < 1e-12);

        let moved: Vec<Vec<f64>> = ys
            .iter()
            .enumerate()
            .map(|(i, y)| y.iter().map(|v| (i as f64 - 3.5) * 2.0 * v + 10.0 * i as f64).collect())
            .collect();
        let moved = panel(vec![("y", moved)]);
        let r2 = ips_tbar_test(&moved, "y", &spec, &table).unwrap();
        assert!((r2.ips.unwrap().statistic - ips.statistic).abs() < 1e-8);
    }

    #[test]
    fn missing_moments_and_entity_errors() {
        let d = panel(vec![("y", walks(3, 13, 7))]);
        let spec = AdfSpec::intercept(0);
        assert!(matches!(
            ips_tbar_test(&d, "y", &spec, &MomentTable::default()),
            Err(UnitRootError::MissingMoments { t: 13, .. })
        ));
        let mut ys = walks(3, 13, 8);
        ys[1] = vec![1.0; 13];
        let d = panel(vec![("y", ys)]);
        match ips_tbar_test(&d, "y", &spec, &MomentTable::bundled()) {
            Err(UnitRootError::Entity { entity, .. }) => assert_eq!(entity, "c1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exact_relation_is_trivially_cointegrated() {
        let xs = walks(4, 13, 9);
        let d = panel(vec![("y", xs.clone()), ("x", xs)]);
        let spec = AdfSpec::new(Deterministic::None, LagOrder::Fixed(0));
        let model = ModelSpec::static_regression("y", &["x"]);
        assert!(matches!(
            residual_cointegration_test(&d, &model, &spec, &MomentTable::bundled()),
            Err(UnitRootError::TriviallyCointegrated { .. })
        ));
    }

    #[test]
    fn cointegration_needs_static_spec() {
        let d = panel(vec![("y", walks(2, 13, 10)), ("x", walks(2, 13, 11))]);
        let spec = AdfSpec::new(Deterministic::None, LagOrder::Fixed(0));
        let model = ModelSpec::dynamic("y", 1, &["x"]);
        assert!(matches!(
            residual_cointegration_test(&d, &model, &spec, &MomentTable::bundled()),
            Err(UnitRootError::InvalidSpec(_))
        ));
    }
}
