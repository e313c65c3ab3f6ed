mod common;

use common::*;
use serde_json::json;
use sha2::{Digest, Sha256};

fn estimate_json(beta_g: f64) -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(300, 8, beta_g, 11));
    let o = dynpanel(&[
        "estimate",
        "--input",
        p.to_str().unwrap(),
        "--dep",
        "R",
        "--exog",
        "G,M,VA,IDE",
        "--lags",
        "1",
        "--method",
        "ab2",
        "--format",
        "json",
    ]);
    json(&o)
}

#[test]
fn positive_public_coefficient_reads_complementary() {
    let r = estimate_json(0.4);
    let c = &r["results"]["complementarity"];
    assert_eq!(c["variable"], "G");
    assert!(c["coefficient"].as_f64().unwrap() > 0.2);
    assert_eq!(c["interpretation"], "complementary");
}

#[test]
fn negative_public_coefficient_reads_substitution() {
    let r = estimate_json(-0.4);
    assert_eq!(r["results"]["complementarity"]["interpretation"], "substitution");
    assert!(r["results"]["sargan"]["df"].as_u64().unwrap() > 0);
    assert_eq!(r["results"]["ar_tests"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_method_is_a_usage_error() {
    let o = dynpanel(&["estimate", "--input", "p.csv", "--dep", "R", "--method", "gls"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage:"));
    assert!(o.stdout.is_empty());
}

#[test]
fn help_exits_zero() {
    let o = dynpanel(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("unitroot"));
}

#[test]
fn unitroot_table_has_test_rows_and_variable_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(23, 13, 0.4, 5));
    let o = dynpanel(&[
        "unitroot",
        "--input",
        p.to_str().unwrap(),
        "--vars",
        "R,G,M,VA,IDE",
        "--tests",
        "ll,ips",
        "--ll-replications",
        "200",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let table = table_after(&text, "Unit root tests");
    assert_eq!(table.len(), 3);
    assert_eq!(table[0].split_whitespace().collect::<Vec<_>>(), VARS);
    assert!(table[1].starts_with("Levin-Lin "));
    assert!(table[2].starts_with("IPS ADF stat "));
    for row in &table[1..] {
        let cells: Vec<&str> = row.split_whitespace().filter(|c| c.parse::<f64>().is_ok()).collect();
        assert_eq!(cells.len(), 5);
        for c in &cells {
            let decimals = c.split('.').nth(1).unwrap();
            assert_eq!(decimals.len(), 3, "{row}");
        }
    }
    assert_eq!(table_after(&text, "p-values").len(), 3);
}

#[test]
fn single_variable_single_test_gives_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(10, 13, 0.4, 5));
    let o = dynpanel(&[
        "unitroot",
        "--input",
        p.to_str().unwrap(),
        "--vars",
        "G",
        "--tests",
        "ips",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let table = table_after(&text, "Unit root tests");
    assert_eq!(table.len(), 2);
    assert_eq!(table[0].trim(), "G");
    assert_eq!(table[1].split_whitespace().count(), 4);
    assert!(table[1].starts_with("IPS ADF stat"));
}

#[test]
fn missing_variable_is_a_data_error_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(10, 13, 0.4, 5));
    let o = dynpanel(&["unitroot", "--input", p.to_str().unwrap(), "--vars", "R,GDP"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GDP"));
    assert!(o.stdout.is_empty());
}

#[test]
fn too_short_panel_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(10, 2, 0.4, 5));
    let o = dynpanel(&[
        "estimate",
        "--input",
        p.to_str().unwrap(),
        "--dep",
        "R",
        "--lags",
        "2",
        "--method",
        "ab1",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error during estimation"));
}

#[test]
fn collinear_regressors_are_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = rd_panel(20, 6, 0.4, 5);
    let g = d.column("G").unwrap().to_vec();
    let d = d.with_variable("G2", g.iter().map(|v| 2.0 * v).collect()).unwrap();
    let p = write_panel(dir.path(), "p.csv", &d);
    let o = dynpanel(&[
        "estimate",
        "--input",
        p.to_str().unwrap(),
        "--dep",
        "R",
        "--exog",
        "G,G2",
        "--method",
        "ols",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn simulate_with_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "dgp.json",
        &json!({"n_entities": 30, "n_periods": 6, "alpha": 0.5, "beta": [0.3], "sigma_mu": 1.0, "sigma_v": 1.0, "seed": 1}),
    );
    let mut digests = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let r = json(&dynpanel(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--seed",
            "7",
            "--format",
            "json",
        ]));
        assert_eq!(r["results"]["config"]["seed"], 7);
        let bytes = std::fs::read(&out).unwrap();
        assert_eq!(r["results"]["output"]["sha256"], hex::encode(Sha256::digest(&bytes)));
        digests.push(r["results"]["output"]["sha256"].clone());
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn config_schema_violations_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "dgp.json",
        &json!({"n_entities": 30, "n_periods": 6, "alpha": 0.5, "sigma_mu": 1.0, "sigma_v": 1.0,
                "x_process": {"rho": "high"}}),
    );
    let out = dir.path().join("p.csv");
    let o = dynpanel(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("x_process.rho"), "{}", stderr(&o));
}

#[test]
fn mc_requires_two_replications() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "mc.json",
        &json!({"n_entities": 10, "n_periods": 5, "alpha": 0.5, "sigma_mu": 1.0, "sigma_v": 1.0,
                "replications": 0, "estimators": ["within"]}),
    );
    let o = dynpanel(&["mc", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("replications ≥ 2"));
}

#[test]
fn mc_within_run_reports_analytic_and_empirical_bias() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "mc.json",
        &json!({"n_entities": 2000, "n_periods": 5, "alpha": 0.5, "sigma_mu": 1.0, "sigma_v": 1.0,
                "seed": 42, "replications": 200, "estimators": ["within"]}),
    );
    let report_path = dir.path().join("report.json");
    let r = json(&dynpanel(&[
        "mc",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        report_path.to_str().unwrap(),
        "--format",
        "json",
    ]));
    let within = &r["results"]["estimators"][0];
    assert_eq!(within["estimator"], "within");
    let analytic = within["analytic_bias"].as_f64().unwrap();
    let empirical = within["coefficients"][0]["mean_bias"].as_f64().unwrap();
    assert!((analytic - empirical).abs() < 0.01, "{analytic} vs {empirical}");

    let full: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(full["outcomes"].as_array().unwrap().len(), 200);
    assert_eq!(full["estimators"], r["results"]["estimators"]);
}

#[test]
fn json_and_table_renderings_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(100, 8, 0.4, 9));
    let args = [
        "estimate",
        "--input",
        p.to_str().unwrap(),
        "--dep",
        "R",
        "--exog",
        "G,M",
        "--method",
        "ab1",
    ];
    let table = stdout(&dynpanel(&args));
    let mut with_json = args.to_vec();
    with_json.extend(["--format", "json"]);
    let r = json(&dynpanel(&with_json));
    for c in r["results"]["coefficients"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let row = table
            .lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .unwrap_or_else(|| panic!("row {name} in\n{table}"));
        let cells: Vec<f64> = row.split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect();
        for (cell, key) in cells.iter().zip(["estimate", "std_error", "z", "p_value"]) {
            let v = c[key].as_f64().unwrap();
            assert!((cell - v).abs() <= 0.5e-4 + 1e-12, "{name} {key}: {cell} vs {v}");
        }
    }
    let sargan = r["results"]["sargan"]["statistic"].as_f64().unwrap();
    assert!(table.contains(&format!("{sargan:.4}")));
}

#[test]
fn commands_do_not_modify_their_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(20, 8, 0.4, 9));
    let before = std::fs::read(&p).unwrap();
    let r = json(&dynpanel(&[
        "estimate",
        "--input",
        p.to_str().unwrap(),
        "--dep",
        "R",
        "--method",
        "within",
        "--format",
        "json",
    ]));
    assert_eq!(std::fs::read(&p).unwrap(), before);
    assert_eq!(r["input"]["sha256"], hex::encode(Sha256::digest(&before)));
    assert!(r["version"].is_string());
    assert_eq!(r["command"], "estimate");
}

#[test]
fn cointegration_command_reports_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_panel(dir.path(), "p.csv", &rd_panel(23, 13, 0.4, 3));
    let o = dynpanel(&[
        "coint",
        "--input",
        p.to_str().unwrap(),
        "--dep",
        "R",
        "--exog",
        "G,M",
        "--format",
        "json",
    ]);
    let r = json(&o);
    assert!(r["results"]["statistic"].as_f64().unwrap().is_finite());
    assert!(r["results"]["cointegrated_at_5pct"].is_boolean());
}

#[test]
fn moments_command_regenerates_requested_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let r = json(&dynpanel(&[
        "moments",
        "--output",
        out.to_str().unwrap(),
        "--replications",
        "500",
        "--t",
        "10,13",
        "--deterministic",
        "intercept",
        "--seed",
        "3",
        "--format",
        "json",
    ]));
    assert_eq!(r["results"]["entries"], 2);
    let table = dynpanel::unitroot::MomentTable::load(&out).unwrap();
    assert_eq!(table.get("intercept", 13).unwrap().replications, 500);
    assert_eq!(table.get("intercept", 13).unwrap().seed, 3);
}
