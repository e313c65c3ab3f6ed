use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use super::{CellRef, PanelDataset, PanelError};

/// Names of the identifier columns in a long-format file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelLayout {
    pub entity_column: String,
    pub time_column: String,
}

impl Default for PanelLayout {
    fn default() -> Self {
        Self {
            entity_column: "entity".into(),
            time_column: "time".into(),
        }
    }
}

/// Long-format records before the balance check.
///
/// `cells` maps `(entity, time)` to one optional value per variable; `None`
/// marks an empty field.
#[derive(Debug, Clone, Default)]
pub struct RawPanel {
    pub variables: Vec<String>,
    pub cells: BTreeMap<(String, i64), Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub n_entities: usize,
    pub n_periods: usize,
    pub variables: Vec<String>,
    pub missing: Vec<CellRef>,
    /// First period after which the union of time indices has a gap.
    pub time_gap_after: Option<i64>,
}

impl BalanceReport {
    pub fn is_balanced(&self) -> bool {
        self.missing.is_empty() && self.time_gap_after.is_none()
    }
}

/// Entity ordering: numeric when every identifier parses as an integer.
fn sorted_entities(raw: &RawPanel) -> Vec<String> {
    let set: BTreeSet<&String> = raw.cells.keys().map(|(e, _)| e).collect();
    let mut entities: Vec<String> = set.into_iter().cloned().collect();
    if entities.iter().all(|e| e.parse::<i64>().is_ok()) {
        entities.sort_by_key(|e| e.parse::<i64>().unwrap_or_default());
    }
    entities
}

/// Lists every absent cell, the panel's dimensions and any gap in time.
pub fn validate_balance(raw: &RawPanel) -> BalanceReport {
    let entities = sorted_entities(raw);
    let times: BTreeSet<i64> = raw.cells.keys().map(|(_, t)| *t).collect();
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            return BalanceReport {
                n_entities: 0,
                n_periods: 0,
                variables: raw.variables.clone(),
                missing: Vec::new(),
                time_gap_after: None,
            }
        }
    };
    let time_gap_after = times
        .iter()
        .zip(times.iter().skip(1))
        .find(|(a, b)| **b != **a + 1)
        .map(|(a, _)| *a);

    let mut missing = Vec::new();
    for entity in &entities {
        for time in first..=last {
            if time_gap_after.is_some() && !times.contains(&time) {
                continue;
            }
            match raw.cells.get(&(entity.clone(), time)) {
                None => missing.extend(raw.variables.iter().map(|v| CellRef {
                    entity: entity.clone(),
                    time,
                    variable: v.clone(),
                })),
                Some(values) => {
                    for (v, value) in raw.variables.iter().zip(values) {
                        if value.is_none() {
                            missing.push(CellRef {
                                entity: entity.clone(),
                                time,
                                variable: v.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    BalanceReport {
        n_entities: entities.len(),
        n_periods: times.len(),
        variables: raw.variables.clone(),
        missing,
        time_gap_after,
    }
}

impl RawPanel {
    pub fn into_dataset(self) -> Result<PanelDataset, PanelError> {
        let report = validate_balance(&self);
        if let Some(after) = report.time_gap_after {
            return Err(PanelError::NonConsecutiveTime { after });
        }
        if !report.missing.is_empty() {
            return Err(PanelError::MissingCell { cells: report.missing });
        }
        let entities = sorted_entities(&self);
        let first = self.cells.keys().map(|(_, t)| *t).min().unwrap_or(0);
        let n_periods = report.n_periods;
        let mut columns = vec![Vec::with_capacity(entities.len() * n_periods); self.variables.len()];
        for entity in &entities {
            for t in 0..n_periods as i64 {
                let row = &self.cells[&(entity.clone(), first + t)];
                for (col, value) in columns.iter_mut().zip(row) {
                    col.push(value.expect("balance checked"));
                }
            }
        }
        PanelDataset::new(
            entities,
            first,
            n_periods,
            self.variables.into_iter().zip(columns).collect(),
        )
    }
}

/// Parses long-format delimited text without enforcing balance.
pub fn read_raw_panel<R: Read>(reader: R, layout: &PanelLayout) -> Result<RawPanel, PanelError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PanelError::MissingColumn(name.to_string()))
    };
    let entity_idx = find(&layout.entity_column)?;
    let time_idx = find(&layout.time_column)?;
    let var_idx: Vec<usize> = (0..header.len())
        .filter(|&j| j != entity_idx && j != time_idx)
        .collect();
    if var_idx.is_empty() {
        return Err(PanelError::NoVariables);
    }
    let variables: Vec<String> = var_idx.iter().map(|&j| header[j].to_string()).collect();
    let mut seen = HashMap::new();
    for v in &variables {
        if v.is_empty() {
            return Err(PanelError::Invalid("empty variable name in header".into()));
        }
        if seen.insert(v.clone(), ()).is_some() {
            return Err(PanelError::DuplicateColumn(v.clone()));
        }
    }

    let mut cells = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // Row numbers count the header as row 1.
        let row = i + 2;
        let entity = record.get(entity_idx).unwrap_or("").to_string();
        let time_text = record.get(time_idx).unwrap_or("");
        let time: i64 = time_text.parse().map_err(|_| PanelError::NonNumeric {
            row,
            column: layout.time_column.clone(),
            value: time_text.to_string(),
        })?;
        let mut values = Vec::with_capacity(var_idx.len());
        for (&j, name) in var_idx.iter().zip(&variables) {
            let text = record.get(j).unwrap_or("");
            if text.is_empty() {
                values.push(None);
                continue;
            }
            let v: f64 = text.parse().map_err(|_| PanelError::NonNumeric {
                row,
                column: name.clone(),
                value: text.to_string(),
            })?;
            if !v.is_finite() {
                return Err(PanelError::NonNumeric {
                    row,
                    column: name.clone(),
                    value: text.to_string(),
                });
            }
            values.push(Some(v));
        }
        if cells.insert((entity.clone(), time), values).is_some() {
            return Err(PanelError::DuplicateCell { entity, time });
        }
    }
    Ok(RawPanel { variables, cells })
}

/// Reads a long-format file and returns the balanced dataset it describes.
pub fn load_panel(path: impl AsRef<Path>, layout: &PanelLayout) -> Result<PanelDataset, PanelError> {
    let file = std::fs::File::open(path)?;
    read_raw_panel(std::io::BufReader::new(file), layout)?.into_dataset()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "entity,time,x\nb,2,5\na,1,1\na,2,2\nb,1,4\na,3,3\nb,3,6\n";

    fn parse(text: &str) -> Result<PanelDataset, PanelError> {
        read_raw_panel(text.as_bytes(), &PanelLayout::default())?.into_dataset()
    }

    #[test]
    fn loads_and_sorts() {
        let d = parse(SMALL).unwrap();
        assert_eq!(d.n_entities(), 2);
        assert_eq!(d.n_periods(), 3);
        assert_eq!(d.entities(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.values("x", 1).unwrap(), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn missing_row_is_named() {
        let text = SMALL.replace("b,2,5\n", "");
        match parse(&text) {
            Err(PanelError::MissingCell { cells }) => {
                assert_eq!(
                    cells,
                    vec![CellRef {
                        entity: "b".into(),
                        time: 2,
                        variable: "x".into()
                    }]
                );
            }
            other => panic!("expected MissingCell, got {other:?}"),
        }
    }

    #[test]
    fn empty_field_is_missing() {
        let text = SMALL.replace("a,3,3", "a,3,");
        assert!(matches!(parse(&text), Err(PanelError::MissingCell { .. })));
    }

    #[test]
    fn non_numeric_reports_location() {
        let text = SMALL.replace("a,2,2", "a,2,abc");
        match parse(&text) {
            Err(PanelError::NonNumeric { row, column, .. }) => {
                assert_eq!(row, 4);
                assert_eq!(column, "x");
            }
            other => panic!("expected NonNumeric, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_cell_rejected() {
        let text = format!("{SMALL}a,1,9\n");
        assert!(matches!(parse(&text), Err(PanelError::DuplicateCell { time: 1, .. })));
    }

    #[test]
    fn time_gap_rejected() {
        let text = "entity,time,x\na,1,1\na,2,2\na,4,3\n";
        assert!(matches!(parse(text), Err(PanelError::NonConsecutiveTime { after: 2 })));
    }

    #[test]
    fn missing_time_column() {
        let text = "entity,year,x\na,1,1\n";
        assert!(matches!(parse(text), Err(PanelError::MissingColumn(c)) if c == "time"));
    }

    #[test]
    fn numeric_entities_sort_numerically() {
        let text = "entity,time,x\n10,1,1\n10,2,1\n2,1,1\n2,2,1\n";
        let d = parse(text).unwrap();
        assert_eq!(d.entities(), &["2".to_string(), "10".to_string()]);
    }

    #[test]
    fn balance_report_cases() {
        let raw = read_raw_panel(SMALL.as_bytes(), &PanelLayout::default()).unwrap();
        let report = validate_balance(&raw);
        assert!(report.is_balanced());
        assert_eq!((report.n_entities, report.n_periods), (2, 3));

        let raw = read_raw_panel(SMALL.replace("a,1,1\n", "").as_bytes(), &PanelLayout::default()).unwrap();
        let report = validate_balance(&raw);
        assert_eq!(report.missing.len(), 1);
        assert_eq!(report.missing[0].entity, "a");
        assert_eq!(report.missing[0].time, 1);

        let report = validate_balance(&RawPanel::default());
        assert_eq!(report.n_entities, 0);
        assert!(report.missing.is_empty());
    }
}
