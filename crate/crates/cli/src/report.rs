use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Fingerprint {
    pub path: String,
    pub sha256: String,
}

pub fn fingerprint(path: &Path) -> Result<Fingerprint, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::data("reading input", format!("{}: {e}", path.display())))?;
    Ok(Fingerprint {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// What every command prints, as JSON or as the pre-rendered table.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: String,
    pub input: Option<Fingerprint>,
    pub results: Value,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub table: String,
}

impl RunReport {
    pub fn new(command: impl Into<String>, input: Option<Fingerprint>, results: Value, table: String) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            input,
            results,
            warnings: Vec::new(),
            table,
        }
    }

    pub fn render_table(&self) -> String {
        let mut out = self.table.clone();
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fixed-width text table: a left-aligned label column and right-aligned
/// value columns.
pub struct TextTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let cols = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (j, c) in r.iter().enumerate().take(cols) {
                widths[j] = widths[j].max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (j, c) in cells.iter().enumerate() {
                if j == 0 {
                    let _ = write!(s, "{:<w$}", c, w = widths[0]);
                } else {
                    let _ = write!(s, "  {:>w$}", c, w = widths[j]);
                }
            }
            s.trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

pub fn fixed(v: f64, decimals: usize) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v:.decimals$}")
    }
}
