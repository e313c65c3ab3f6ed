use std::fmt::Write as _;

use dynpanel::estimators::{anderson_hsiao, pooled_ols, within_estimator};
use dynpanel::gmm::{gmm_estimate, ExogPolicy, GmmOptions, GmmResult, GmmTransform};
use dynpanel::stats::{normal_p_value, Tail, TestResult};
use dynpanel::{AhInstrument, EstimateResult, ModelSpec};
use serde_json::{json, Value};

use super::load;
use crate::args::{EstimateArgs, MethodArg, TransformArg, XIvArg};
use crate::error::{from_estimator, from_gmm, CliError};
use crate::report::{fingerprint, fixed, RunReport, TextTable};

/// Reading of the public-spending coefficient's sign.
pub fn complementarity(coefficient: f64) -> &'static str {
    if coefficient > 0.0 {
        "complementary"
    } else if coefficient < 0.0 {
        "substitution"
    } else {
        "neutral"
    }
}

fn test_json(t: &TestResult) -> Value {
    json!({
        "statistic": t.statistic,
        "p_value": t.p_value,
        "df": t.df,
        "reject_5pct": t.reject_5pct,
        "note": t.note,
    })
}

pub fn run(args: &EstimateArgs) -> Result<RunReport, CliError> {
    let input = fingerprint(&args.panel.input)?;
    let data = load(&args.panel)?;
    let exog: Vec<&str> = args.exog.iter().map(String::as_str).collect();
    let spec = ModelSpec::dynamic(args.dep.clone(), args.lags, &exog).with_intercept(!args.no_intercept);

    let stage = "estimation";
    let mut gmm: Option<GmmResult> = None;
    let estimate: EstimateResult = match args.method {
        MethodArg::Ols => pooled_ols(&data, &spec).map_err(|e| from_estimator(stage, e))?,
        MethodArg::Within => {
            within_estimator(&data, &spec.clone().with_intercept(false)).map_err(|e| from_estimator(stage, e))?
        }
        MethodArg::AhDiff => {
            anderson_hsiao(&data, &spec, AhInstrument::DifferenceInstrument).map_err(|e| from_estimator(stage, e))?
        }
        MethodArg::AhLevel => {
            anderson_hsiao(&data, &spec, AhInstrument::LevelInstrument).map_err(|e| from_estimator(stage, e))?
        }
        MethodArg::Ab1 | MethodArg::Ab2 => {
            let opts = if args.method == MethodArg::Ab1 {
                GmmOptions::one_step()
            } else {
                GmmOptions::two_step()
            };
            let opts = opts
                .with_transform(match args.transform {
                    TransformArg::Fd => GmmTransform::FirstDifference,
                    TransformArg::Fod => GmmTransform::OrthogonalDeviations,
                })
                .with_x_policy(match args.x_iv {
                    XIvArg::Differenced => ExogPolicy::DifferencedIv,
                    XIvArg::Strict => ExogPolicy::StrictIv,
                })
                .with_max_lag_depth(args.max_lag_depth);
            let r = gmm_estimate(&data, &spec, &opts).map_err(|e| from_gmm(stage, e))?;
            let est = r.estimate.clone();
            gmm = Some(r);
            est
        }
    };

    let se = estimate.std_errors();
    let mut coefs = Vec::new();
    let mut table = TextTable::new(
        ["variable", "estimate", "std.err", "z", "p-value"]
            .map(String::from)
            .to_vec(),
    );
    for (j, name) in estimate.names.iter().enumerate() {
        let b = estimate.coefficients[j];
        let z = b / se[j];
        let p = normal_p_value(z, Tail::TwoSided);
        table.row(vec![
            name.clone(),
            fixed(b, 4),
            fixed(se[j], 4),
            fixed(z, 4),
            fixed(p, 4),
        ]);
        coefs.push(json!({"name": name, "estimate": b, "std_error": se[j], "z": z, "p_value": p}));
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{}  dependent: {}  entities: {}  observations: {}",
        estimate.method.label(),
        args.dep,
        data.n_entities(),
        estimate.n_obs
    );
    text.push_str(&table.render());

    let mut results = json!({
        "method": estimate.method.label(),
        "dependent": args.dep,
        "n_entities": data.n_entities(),
        "n_periods": data.n_periods(),
        "n_obs": estimate.n_obs,
        "sigma2": estimate.sigma2,
        "coefficients": coefs,
    });
    let mut warnings = Vec::new();

    if let Some(g) = &gmm {
        let _ = writeln!(
            text,
            "instruments: {}  criterion: {}",
            g.moment_count(),
            fixed(g.criterion_value, 4)
        );
        results["instruments"] = json!(g.moment_count());
        results["criterion"] = json!(g.criterion_value);
        let mut tests = TextTable::new(["test", "statistic", "p-value"].map(String::from).to_vec());
        if let Some(s) = &g.sargan {
            tests.row(vec![
                format!("Sargan chi2({})", s.df.unwrap_or(0)),
                fixed(s.statistic, 4),
                fixed(s.p_value, 4),
            ]);
            results["sargan"] = test_json(s);
        }
        let mut ar = Vec::new();
        for (order, t) in &g.ar_tests {
            tests.row(vec![format!("AR({order})"), fixed(t.statistic, 4), fixed(t.p_value, 4)]);
            let mut v = test_json(t);
            v["order"] = json!(order);
            ar.push(v);
        }
        results["ar_tests"] = json!(ar);
        text.push_str(&tests.render());
        warnings.extend(g.warnings.iter().cloned());
    }

    if let Some(b) = estimate.coefficient(&args.public_var) {
        let reading = complementarity(b);
        let note = format!(
            "{} coefficient {} ({}): a 1% increase in {} goes with a {}% change in {}",
            args.public_var,
            fixed(b, 4),
            reading,
            args.public_var,
            fixed(b, 4),
            args.dep
        );
        let _ = writeln!(text, "note: {note}");
        results["complementarity"] = json!({
            "variable": args.public_var,
            "coefficient": b,
            "interpretation": reading,
            "note": note,
        });
    }

    let mut report = RunReport::new("estimate", Some(input), results, text);
    report.warnings = warnings;
    Ok(report)
}
