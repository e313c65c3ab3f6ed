use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::GmmError;
use crate::estimators::levels_block;
use crate::panel::{ModelSpec, PanelDataset, Series};

/// Transform that removes the entity effect before the moment conditions
/// are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GmmTransform {
    FirstDifference,
    OrthogonalDeviations,
}

/// How the exogenous regressors enter the instrument set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExogPolicy {
    /// Every level `x_1..x_T` instruments every equation (strict exogeneity).
    StrictIv,
    /// The transformed regressor of each equation gets its own column, so
    /// the exogenous block runs along the diagonal of the equation rows.
    DifferencedIv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentOptions {
    pub transform: GmmTransform,
    pub x_policy: ExogPolicy,
    /// Deepest lag of the dependent variable used as an instrument.
    pub max_lag_depth: Option<usize>,
}

impl Default for InstrumentOptions {
    fn default() -> Self {
        Self {
            transform: GmmTransform::FirstDifference,
            x_policy: ExogPolicy::DifferencedIv,
            max_lag_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentKind {
    /// Level of the dependent variable.
    DependentLevel,
    /// Level of an exogenous variable.
    ExogenousLevel,
    /// Transformed exogenous regressor of the same equation.
    ExogenousTransformed,
}

/// Where an instrument column comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentColumn {
    /// Period index of the equation row the column is non-zero in; `None`
    /// when the column is shared by every row.
    pub period: Option<usize>,
    pub source: String,
    /// Equation period minus source period (negative for leads).
    pub lag: i64,
    pub kind: InstrumentKind,
}

/// Per-entity instrument blocks `Z_i` plus the column layout.
#[derive(Debug, Clone)]
pub struct InstrumentMatrix {
    pub options: InstrumentOptions,
    pub blocks: Vec<DMatrix<f64>>,
    pub columns: Vec<InstrumentColumn>,
    /// Period index of each equation row, shared by all entities.
    pub row_periods: Vec<usize>,
    pub n_periods: usize,
}

impl InstrumentMatrix {
    pub fn moment_count(&self) -> usize {
        self.columns.len()
    }

    pub fn n_entities(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_rows(&self) -> usize {
        self.row_periods.len()
    }
}

/// Transformed equation of one entity.
#[derive(Debug, Clone)]
pub(crate) struct EntityEquations {
    pub entity: String,
    /// Period index of the first estimation row.
    pub offset: usize,
    pub y: DVector<f64>,
    pub w: DMatrix<f64>,
    /// First-differenced dependent and regressors, used for AR(m) tests.
    pub dy: DVector<f64>,
    pub dw: DMatrix<f64>,
}

fn to_columns(block: &[Series<f64>]) -> (DVector<f64>, DMatrix<f64>, usize) {
    let rows = block[0].len();
    let k = block.len() - 1;
    let y = DVector::from_column_slice(&block[0].values);
    let w = DMatrix::from_fn(rows, k, |r, j| block[j + 1].values[r]);
    (y, w, block[0].offset)
}

pub(crate) fn min_periods(spec: &ModelSpec) -> usize {
    spec.ar_order + 2
}

/// Transformed equations for every entity.
pub(crate) fn entity_equations(
    dataset: &PanelDataset,
    spec: &ModelSpec,
    transform: GmmTransform,
) -> Result<Vec<EntityEquations>, GmmError> {
    let mut out = Vec::with_capacity(dataset.n_entities());
    for i in 0..dataset.n_entities() {
        let levels = levels_block(dataset, spec, i)?;
        let diffs = levels
            .iter()
            .map(Series::first_difference)
            .collect::<Result<Vec<_>, _>>()?;
        let (dy, dw, d_offset) = to_columns(&diffs);
        let (y, w, offset) = match transform {
            GmmTransform::FirstDifference => (dy.clone(), dw.clone(), d_offset),
            GmmTransform::OrthogonalDeviations => {
                let fod = levels
                    .iter()
                    .map(Series::orthogonal_deviations)
                    .collect::<Result<Vec<_>, _>>()?;
                to_columns(&fod)
            }
        };
        out.push(EntityEquations {
            entity: levels[0].entity.clone(),
            offset,
            y,
            w,
            dy,
            dw,
        });
    }
    Ok(out)
}

/// Builds the block-diagonal instrument matrix.
///
/// First differences: the equation for period `t` is instrumented by the
/// levels `y_1..y_{t-2}`. Orthogonal deviations: by `y_1..y_{t-1}`. For a
/// pure AR(1) both give `(T-1)(T-2)/2` columns.
pub fn build_instrument_matrix(
    dataset: &PanelDataset,
    spec: &ModelSpec,
    options: &InstrumentOptions,
) -> Result<InstrumentMatrix, GmmError> {
    spec.validate(dataset)?;
    spec.require_dynamic()?;
    let t_total = dataset.n_periods();
    if t_total < min_periods(spec) {
        return Err(GmmError::TooFewPeriods {
            required: min_periods(spec),
            actual: t_total,
        });
    }
    let equations = entity_equations(dataset, spec, options.transform)?;
    build_from_equations(dataset, spec, options, &equations)
}

pub(crate) fn build_from_equations(
    dataset: &PanelDataset,
    spec: &ModelSpec,
    options: &InstrumentOptions,
    equations: &[EntityEquations],
) -> Result<InstrumentMatrix, GmmError> {
    let t_total = dataset.n_periods();
    let p = spec.ar_order;
    let row_periods: Vec<usize> = match options.transform {
        GmmTransform::FirstDifference => (p + 1..t_total).collect(),
        GmmTransform::OrthogonalDeviations => (p..t_total - 1).collect(),
    };
    // Deepest admissible source period for the dependent variable.
    let newest_source = |t: usize| match options.transform {
        GmmTransform::FirstDifference => t - 2,
        GmmTransform::OrthogonalDeviations => t - 1,
    };

    let mut columns = Vec::new();
    // Per row: (dependent source periods, exogenous column spec)
    enum Source {
        Dep(usize),
        XLevel(usize, usize),
        XTransformed(usize),
    }
    let mut layout: Vec<Vec<Source>> = Vec::with_capacity(row_periods.len());
    for &t in &row_periods {
        let hi = newest_source(t);
        let lo = match options.max_lag_depth {
            Some(depth) => (hi + 1).saturating_sub(depth),
            None => 0,
        };
        let mut row = Vec::new();
        for s in lo..=hi {
            if options.max_lag_depth == Some(0) {
                break;
            }
            columns.push(InstrumentColumn {
                period: Some(t),
                source: spec.dependent.clone(),
                lag: t as i64 - s as i64,
                kind: InstrumentKind::DependentLevel,
            });
            row.push(Source::Dep(s));
        }
        for (k, x) in spec.exogenous.iter().enumerate() {
            match options.x_policy {
                ExogPolicy::StrictIv => {
                    for s in 0..t_total {
                        columns.push(InstrumentColumn {
                            period: Some(t),
                            source: x.clone(),
                            lag: t as i64 - s as i64,
                            kind: InstrumentKind::ExogenousLevel,
                        });
                        row.push(Source::XLevel(k, s));
                    }
                }
                ExogPolicy::DifferencedIv => {
                    columns.push(InstrumentColumn {
                        period: Some(t),
                        source: x.clone(),
                        lag: 0,
                        kind: InstrumentKind::ExogenousTransformed,
                    });
                    row.push(Source::XTransformed(k));
                }
            }
        }
        layout.push(row);
    }
    let m = columns.len();
    if m == 0 {
        return Err(GmmError::EmptyInstrumentSet);
    }

    let mut blocks = Vec::with_capacity(equations.len());
    for (i, eq) in equations.iter().enumerate() {
        debug_assert_eq!(eq.y.len(), row_periods.len());
        let y = dataset.values(&spec.dependent, i)?;
        let xs = spec
            .exogenous
            .iter()
            .map(|x| dataset.values(x, i))
            .collect::<Result<Vec<_>, _>>()?;
        let mut z = DMatrix::zeros(row_periods.len(), m);
        let mut col = 0;
        for (r, row) in layout.iter().enumerate() {
            for src in row {
                z[(r, col)] = match *src {
                    Source::Dep(s) => y[s],
                    Source::XLevel(k, s) => xs[k][s],
                    Source::XTransformed(k) => eq.w[(r, p + k)],
                };
                col += 1;
            }
        }
        blocks.push(z);
    }
    Ok(InstrumentMatrix {
        options: *options,
        blocks,
        columns,
        row_periods,
        n_periods: t_total,
    })
}
