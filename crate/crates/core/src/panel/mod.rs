//! Balanced panel container, ingestion and the period-aligned transforms the
//! estimators are built on.

mod dataset;
mod io;
mod series;
mod spec;

pub use dataset::PanelDataset;
pub use io::{load_panel, read_raw_panel, validate_balance, BalanceReport, PanelLayout, RawPanel};
pub use series::{align, Series};
pub use spec::{ModelSpec, Transform};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An `(entity, time, variable)` coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellRef {
    pub entity: String,
    pub time: i64,
    pub variable: String,
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.entity, self.time, self.variable)
    }
}

fn list_cells(cells: &[CellRef]) -> String {
    cells.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("cannot read panel file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed delimited input: {0}")]
    Csv(#[from] csv::Error),
    #[error("required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("header must name at least one variable column besides entity and time")]
    NoVariables,
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("panel is unbalanced; missing cells: {}", list_cells(.cells))]
    MissingCell { cells: Vec<CellRef> },
    #[error("non-numeric value {value:?} at row {row}, column `{column}`")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("cell for entity `{entity}` at time {time} appears more than once")]
    DuplicateCell { entity: String, time: i64 },
    #[error("time index is not a consecutive run of integers; gap after {after}")]
    NonConsecutiveTime { after: i64 },
    #[error("lag {lag} leaves nothing of a series of length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("series of length {len} is too short; at least {min} values needed")]
    SeriesTooShort { len: usize, min: usize },
    #[error("variable `{0}` not found in dataset")]
    UnknownVariable(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
}
