use std::fmt::Write as _;

use dynpanel::unitroot::{
    ips_tbar_test, levin_lin_test, residual_cointegration_test, simulate_bundled_table, simulate_ll_null,
    simulate_moment_table, AdfSpec, Deterministic, LagOrder, MomentTable, PanelURResult,
};
use dynpanel::ModelSpec;
use serde_json::json;

use super::load;
use crate::args::{CointArgs, DeterministicArg, MomentsArgs, UnitRootArgs, UrTest};
use crate::error::{from_panel, from_unitroot, CliError};
use crate::report::{fingerprint, fixed, RunReport, TextTable};

pub const DEFAULT_SEED: u64 = 20240601;

fn deterministic(d: DeterministicArg) -> Deterministic {
    match d {
        DeterministicArg::None => Deterministic::None,
        DeterministicArg::Intercept => Deterministic::Intercept,
        DeterministicArg::Trend => Deterministic::InterceptAndTrend,
    }
}

fn lag_order(s: &str) -> Result<LagOrder, CliError> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(LagOrder::Auto);
    }
    s.parse().map(LagOrder::Fixed).map_err(|_| {
        CliError::usage(
            "argument parsing",
            format!("--lags expects a number or `auto`, got `{s}`"),
        )
    })
}

fn moment_table(path: Option<&std::path::Path>) -> Result<MomentTable, CliError> {
    match path {
        Some(p) => MomentTable::load(p).map_err(|e| from_unitroot("loading moment table", e)),
        None => Ok(MomentTable::bundled()),
    }
}

pub fn run_unitroot(args: &UnitRootArgs, seed: Option<u64>) -> Result<RunReport, CliError> {
    let input = fingerprint(&args.panel.input)?;
    let data = load(&args.panel)?;
    for v in &args.vars {
        if !data.has_variable(v) {
            return Err(from_panel(
                "reading panel",
                dynpanel::PanelError::UnknownVariable(v.clone()),
            ));
        }
    }
    let spec = AdfSpec::new(deterministic(args.adf.deterministic), lag_order(&args.adf.lags)?);
    let want_ll = args.tests.contains(&UrTest::Ll);
    let want_ips = args.tests.contains(&UrTest::Ips);
    let moments = if want_ips {
        Some(moment_table(args.adf.moments.as_deref())?)
    } else {
        None
    };
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let ll_null =
        want_ll.then(|| simulate_ll_null(data.n_entities(), data.n_periods(), &spec, args.ll_replications, seed));

    let mut per_var: Vec<(Option<PanelURResult>, Option<PanelURResult>)> = Vec::new();
    for v in &args.vars {
        let ll = if want_ll {
            Some(levin_lin_test(&data, v, &spec, ll_null.as_ref()).map_err(|e| from_unitroot("Levin-Lin test", e))?)
        } else {
            None
        };
        let ips = match &moments {
            Some(m) => Some(ips_tbar_test(&data, v, &spec, m).map_err(|e| from_unitroot("IPS test", e))?),
            None => None,
        };
        per_var.push((ll, ips));
    }

    let mut header = vec![String::new()];
    header.extend(args.vars.iter().cloned());
    let mut stats = TextTable::new(header.clone());
    let mut pvals = TextTable::new(header);
    let mut rows_json = serde_json::Map::new();
    if want_ll {
        let ll: Vec<_> = per_var
            .iter()
            .map(|(l, _)| l.as_ref().and_then(|r| r.levin_lin.clone()).expect("ll requested"))
            .collect();
        stats.row(
            std::iter::once("Levin-Lin".to_string())
                .chain(ll.iter().map(|l| fixed(l.statistic, 3)))
                .collect(),
        );
        pvals.row(
            std::iter::once("Levin-Lin".to_string())
                .chain(ll.iter().map(|l| fixed(l.test.p_value, 3)))
                .collect(),
        );
        rows_json.insert(
            "Levin-Lin".into(),
            json!(args
                .vars
                .iter()
                .zip(&ll)
                .map(|(v, l)| json!({
                    "variable": v, "statistic": l.statistic, "rho": l.rho, "df": l.df,
                    "p_value": l.test.p_value, "reference": l.test.reference,
                }))
                .collect::<Vec<_>>()),
        );
    }
    if want_ips {
        let ips: Vec<_> = per_var
            .iter()
            .map(|(_, i)| i.as_ref().and_then(|r| r.ips.clone()).expect("ips requested"))
            .collect();
        stats.row(
            std::iter::once("IPS ADF stat".to_string())
                .chain(ips.iter().map(|i| fixed(i.statistic, 3)))
                .collect(),
        );
        pvals.row(
            std::iter::once("IPS ADF stat".to_string())
                .chain(ips.iter().map(|i| fixed(i.test.p_value, 3)))
                .collect(),
        );
        rows_json.insert(
            "IPS ADF stat".into(),
            json!(args
                .vars
                .iter()
                .zip(&ips)
                .map(|(v, i)| json!({
                    "variable": v, "statistic": i.statistic, "tbar": i.tbar,
                    "expected_mean": i.expected_mean, "expected_variance": i.expected_variance,
                    "p_value": i.test.p_value, "reference": i.test.reference,
                }))
                .collect::<Vec<_>>()),
        );
    }
    let mut text = String::from("Unit root tests\n");
    text.push_str(&stats.render());
    text.push_str("\np-values\n");
    text.push_str(&pvals.render());

    let entities: Vec<_> = args
        .vars
        .iter()
        .zip(&per_var)
        .map(|(v, (l, i))| {
            let r = l.as_ref().or(i.as_ref()).expect("at least one test");
            json!({"variable": v, "entities": r.entities})
        })
        .collect();
    let results = json!({
        "columns": args.vars,
        "rows": rows_json,
        "spec": spec,
        "n_entities": data.n_entities(),
        "n_periods": data.n_periods(),
        "ll_null": ll_null.as_ref().map(|n| json!({"replications": n.replications, "seed": n.seed})),
        "individual": entities,
    });
    Ok(RunReport::new("unitroot", Some(input), results, text))
}

pub fn run_coint(args: &CointArgs) -> Result<RunReport, CliError> {
    let input = fingerprint(&args.panel.input)?;
    let data = load(&args.panel)?;
    let exog: Vec<&str> = args.exog.iter().map(String::as_str).collect();
    let model = ModelSpec::static_regression(args.dep.clone(), &exog);
    let spec = AdfSpec::new(deterministic(args.deterministic), lag_order(&args.lags)?);
    let moments = moment_table(args.moments.as_deref())?;
    let r = residual_cointegration_test(&data, &model, &spec, &moments)
        .map_err(|e| from_unitroot("cointegration test", e))?;
    let ips = r.ips.clone().expect("cointegration reports IPS");
    let mut table = TextTable::new(["residual test", "statistic", "p-value"].map(String::from).to_vec());
    table.row(vec![
        "IPS ADF stat".into(),
        fixed(ips.statistic, 3),
        fixed(ips.test.p_value, 3),
    ]);
    let mut text = String::new();
    let _ = writeln!(text, "Residual cointegration test: {}", r.variable);
    text.push_str(&table.render());
    let verdict = if ips.test.reject_5pct {
        "residual unit root rejected at 5%: evidence of cointegration"
    } else {
        "residual unit root not rejected at 5%: no evidence of cointegration"
    };
    let _ = writeln!(text, "{verdict}");
    let results = json!({
        "regression": r.variable,
        "spec": spec,
        "tbar": ips.tbar,
        "statistic": ips.statistic,
        "p_value": ips.test.p_value,
        "expected_mean": ips.expected_mean,
        "expected_variance": ips.expected_variance,
        "cointegrated_at_5pct": ips.test.reject_5pct,
        "individual": r.entities,
    });
    Ok(RunReport::new("coint", Some(input), results, text))
}

pub fn run_moments(args: &MomentsArgs, seed: Option<u64>) -> Result<RunReport, CliError> {
    if args.replications < 2 {
        return Err(CliError::usage("argument parsing", "--replications must be at least 2"));
    }
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let table = if args.t.is_empty() && args.deterministic.is_none() {
        simulate_bundled_table(args.replications, seed)
    } else {
        let t_values: Vec<usize> = if args.t.is_empty() {
            dynpanel::unitroot::BUNDLED_T
                .chain(dynpanel::unitroot::BUNDLED_EXTRA_T)
                .collect()
        } else {
            args.t.clone()
        };
        let dets = match args.deterministic {
            Some(d) => vec![deterministic(d)],
            None => vec![
                Deterministic::None,
                Deterministic::Intercept,
                Deterministic::InterceptAndTrend,
            ],
        };
        let mut table = MomentTable::default();
        for d in dets {
            table.extend(simulate_moment_table(
                &t_values,
                &AdfSpec::new(d, LagOrder::Fixed(0)),
                args.replications,
                seed,
            ));
        }
        table
    };
    table
        .save(&args.output)
        .map_err(|e| CliError::data("writing moment table", e))?;
    let out = fingerprint(&args.output)?;
    let text = format!(
        "wrote {} entries ({} replications, seed {}) to {}\nsha256 {}\n",
        table.len(),
        args.replications,
        seed,
        args.output.display(),
        out.sha256
    );
    let results = json!({
        "entries": table.len(),
        "replications": args.replications,
        "seed": seed,
        "output": out,
    });
    Ok(RunReport::new("moments", None, results, text))
}
