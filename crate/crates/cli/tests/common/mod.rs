#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dynpanel::montecarlo::{simulate_dgp, DgpConfig};
use dynpanel::PanelDataset;
use serde_json::Value;

pub const VARS: [&str; 5] = ["R", "G", "M", "VA", "IDE"];

pub fn dynpanel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynpanel"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn json(o: &Output) -> Value {
    assert!(o.status.success(), "command failed: {}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

/// Synthetic five-variable panel shaped like the R&D application: `R` is a
/// dynamic AR(1) in itself with `G, M, VA, IDE` as exogenous regressors.
pub fn rd_panel(n: usize, t: usize, beta_g: f64, seed: u64) -> PanelDataset {
    let mut cfg = DgpConfig::ar1(n, t, 0.5, seed);
    cfg.beta = vec![beta_g, 0.2, 0.1, -0.1];
    let sim = simulate_dgp(&cfg).expect("valid DGP");
    let renames = [("y", "R"), ("x1", "G"), ("x2", "M"), ("x3", "VA"), ("x4", "IDE")];
    let vars = renames
        .iter()
        .map(|(from, to)| (to.to_string(), sim.column(from).unwrap().to_vec()))
        .collect();
    PanelDataset::new(sim.entities().to_vec(), sim.first_period(), sim.n_periods(), vars).unwrap()
}

pub fn write_panel(dir: &Path, name: &str, data: &PanelDataset) -> PathBuf {
    let path = dir.join(name);
    data.save_csv(&path).unwrap();
    path
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

/// Non-empty lines of the table block that follows `title`.
pub fn table_after<'a>(text: &'a str, title: &str) -> Vec<&'a str> {
    text.lines()
        .skip_while(|l| *l != title)
        .skip(1)
        .take_while(|l| !l.trim().is_empty())
        .collect()
}
