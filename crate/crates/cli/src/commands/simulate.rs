use std::fmt::Write as _;

use dynpanel::montecarlo::{run_experiment, simulate_dgp, DgpConfig, ExperimentConfig, MCReport};
use serde_json::json;

use super::read_config;
use crate::args::{McArgs, SimulateArgs};
use crate::error::{from_mc, from_panel, CliError};
use crate::report::{fingerprint, fixed, RunReport, TextTable};

pub fn run_simulate(args: &SimulateArgs, seed: Option<u64>) -> Result<RunReport, CliError> {
    let config_fp = fingerprint(&args.config)?;
    let mut cfg: DgpConfig = read_config(&args.config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let data = simulate_dgp(&cfg).map_err(|e| from_mc("simulation", e))?;
    data.save_csv(&args.output)
        .map_err(|e| from_panel("writing panel", e))?;
    let out = fingerprint(&args.output)?;
    let text = format!(
        "simulated {} entities x {} periods (seed {}) to {}\nsha256 {}\n",
        data.n_entities(),
        data.n_periods(),
        cfg.seed,
        args.output.display(),
        out.sha256
    );
    let results = json!({
        "config": cfg,
        "n_entities": data.n_entities(),
        "n_periods": data.n_periods(),
        "variables": data.variable_names(),
        "output": out,
    });
    Ok(RunReport::new("simulate", Some(config_fp), results, text))
}

fn summary_table(report: &MCReport) -> String {
    let mut text = String::new();
    let c = &report.config;
    let _ = writeln!(
        text,
        "Monte Carlo: N={} T={} alpha={} replications={} seed={}",
        c.n_entities, c.n_periods, c.alpha, c.replications, c.seed
    );
    let mut header = vec![
        "estimator".to_string(),
        "coefficient".into(),
        "true".into(),
        "mean".into(),
    ];
    header.extend(["bias", "analytic bias", "rmse", "mc s.e.", "failures"].map(String::from));
    let mut t = TextTable::new(header);
    for e in &report.estimators {
        for (j, s) in e.coefficients.iter().enumerate() {
            let analytic = if j == 0 { e.analytic_bias } else { None };
            t.row(vec![
                e.estimator.label().to_string(),
                s.name.clone(),
                fixed(s.true_value, 4),
                fixed(s.mean, 4),
                fixed(s.mean_bias, 4),
                analytic.map_or_else(|| "-".to_string(), |b| fixed(b, 4)),
                fixed(s.rmse, 4),
                fixed(s.mc_se, 4),
                e.failures.to_string(),
            ]);
        }
    }
    text.push_str(&t.render());
    if !report.tests.is_empty() {
        let mut t = TextTable::new(
            [
                "test",
                "source",
                "reject 1%",
                "reject 5%",
                "reject 10%",
                "mean stat",
                "failures",
            ]
            .map(String::from)
            .to_vec(),
        );
        for s in &report.tests {
            t.row(vec![
                s.test.label().to_string(),
                s.source.label().to_string(),
                fixed(s.rejection.at_1pct, 3),
                fixed(s.rejection.at_5pct, 3),
                fixed(s.rejection.at_10pct, 3),
                fixed(s.mean_statistic, 3),
                s.failures.to_string(),
            ]);
        }
        text.push('\n');
        text.push_str(&t.render());
    }
    text
}

pub fn run_mc(args: &McArgs, seed: Option<u64>, threads: Option<usize>) -> Result<RunReport, CliError> {
    let config_fp = fingerprint(&args.config)?;
    let mut cfg: ExperimentConfig = read_config(&args.config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_experiment(&cfg, threads).map_err(|e| from_mc("Monte Carlo", e))?;
    let mut output = None;
    if let Some(path) = &args.output {
        let body = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, body).map_err(|e| CliError::data("writing report", format!("{}: {e}", path.display())))?;
        output = Some(fingerprint(path)?);
    }
    let mut text = summary_table(&report);
    if let Some(o) = &output {
        let _ = writeln!(text, "full report written to {} (sha256 {})", o.path, o.sha256);
    }
    let results = json!({
        "config": report.config,
        "coefficient_names": report.coefficient_names,
        "estimators": report.estimators,
        "tests": report.tests,
        "output": output,
    });
    Ok(RunReport::new("mc", Some(config_fp), results, text))
}
