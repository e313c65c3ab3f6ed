use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use super::{PanelError, Series};

/// Balanced N×T panel of named `f64` variables.
///
/// Values are stored entity-major: the cell for entity `i`, period index `t`
/// lives at `i * T + t`. The container is immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    entities: Vec<String>,
    first_period: i64,
    n_periods: usize,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl PanelDataset {
    /// Builds a dataset from entity-major columns.
    pub fn new(
        entities: Vec<String>,
        first_period: i64,
        n_periods: usize,
        variables: Vec<(String, Vec<f64>)>,
    ) -> Result<Self, PanelError> {
        let mut seen = HashSet::new();
        for e in &entities {
            if !seen.insert(e.as_str()) {
                return Err(PanelError::Invalid(format!("entity `{e}` listed twice")));
            }
        }
        if !entities.is_empty() && n_periods < 2 {
            return Err(PanelError::Invalid(format!(
                "a panel needs at least 2 periods, got {n_periods}"
            )));
        }
        let mut names = Vec::with_capacity(variables.len());
        let mut columns = Vec::with_capacity(variables.len());
        let mut seen = HashSet::new();
        for (name, values) in variables {
            if name.trim().is_empty() {
                return Err(PanelError::Invalid("empty variable name".into()));
            }
            if !seen.insert(name.clone()) {
                return Err(PanelError::DuplicateColumn(name));
            }
            if values.len() != entities.len() * n_periods {
                return Err(PanelError::Invalid(format!(
                    "variable `{name}` has {} values, expected {}",
                    values.len(),
                    entities.len() * n_periods
                )));
            }
            if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
                return Err(PanelError::Invalid(format!(
                    "variable `{name}` has a non-finite value for entity `{}`",
                    entities[pos / n_periods]
                )));
            }
            names.push(name);
            columns.push(values);
        }
        Ok(Self {
            entities,
            first_period,
            n_periods,
            names,
            columns,
        })
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn periods(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n_periods as i64).map(move |t| self.first_period + t)
    }

    pub fn first_period(&self) -> i64 {
        self.first_period
    }

    /// Calendar label of a period index.
    pub fn period_label(&self, index: usize) -> i64 {
        self.first_period + index as i64
    }

    pub fn variable_names(&self) -> &[String] {
        &self.names
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    /// Entity-major column for `name`.
    pub fn column(&self, name: &str) -> Result<&[f64], PanelError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| PanelError::UnknownVariable(name.to_string()))
    }

    /// The `T` values of `name` for entity index `entity`.
    pub fn values(&self, name: &str, entity: usize) -> Result<&[f64], PanelError> {
        let col = self.column(name)?;
        let start = entity * self.n_periods;
        Ok(&col[start..start + self.n_periods])
    }

    pub fn series(&self, name: &str, entity: usize) -> Result<Series<f64>, PanelError> {
        Ok(Series::new(
            self.entities[entity].clone(),
            0,
            self.values(name, entity)?.to_vec(),
        ))
    }

    /// Copy with an extra (or replaced) variable.
    pub fn with_variable(&self, name: &str, values: Vec<f64>) -> Result<Self, PanelError> {
        let mut vars: Vec<(String, Vec<f64>)> = self
            .names
            .iter()
            .cloned()
            .zip(self.columns.iter().cloned())
            .filter(|(n, _)| n != name)
            .collect();
        vars.push((name.to_string(), values));
        Self::new(self.entities.clone(), self.first_period, self.n_periods, vars)
    }

    /// Writes the long-format delimited representation (`entity,time,vars...`).
    ///
    /// Numbers use the shortest representation that parses back to the same
    /// `f64`, so save followed by load is bit-exact.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PanelError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["entity".to_string(), "time".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (i, entity) in self.entities.iter().enumerate() {
            for t in 0..self.n_periods {
                let mut row = vec![entity.clone(), self.period_label(t).to_string()];
                for col in &self.columns {
                    row.push(format!("{:?}", col[i * self.n_periods + t]));
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), PanelError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_variables() {
        let r = PanelDataset::new(
            vec!["a".into()],
            1,
            2,
            vec![("x".into(), vec![1.0, 2.0]), ("x".into(), vec![1.0, 2.0])],
        );
        assert!(matches!(r, Err(PanelError::DuplicateColumn(_))));
    }

    #[test]
    fn series_is_entity_slice() {
        let d = PanelDataset::new(
            vec!["a".into(), "b".into()],
            2000,
            3,
            vec![("x".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])],
        )
        .unwrap();
        let s = d.series("x", 1).unwrap();
        assert_eq!(s.values, vec![4.0, 5.0, 6.0]);
        assert_eq!(s.entity, "b");
        assert_eq!(d.period_label(2), 2002);
    }
}
