use grf_homog_core::catalog::{kobayashi_check, kobayashi_synthetic, KobayashiData};
use grf_homog_core::{Bilinear, Error, Metric};
use serde_json::{json, Value};

use crate::cli::KobayashiArgs;
use crate::error::{CliError, CliResult, ExitStatus};
use crate::io;

fn field<'a>(doc: &'a Value, key: &str) -> CliResult<&'a Value> {
    doc.get(key).ok_or_else(|| CliError::usage(format!("Kobayashi data lacks {key:?}")))
}

/// `{"g0": [[..]], "ric0": [[..]], "alpha": FORM, "beta": FORM, "lambda": x, "mu": y}`.
pub fn parse_data(text: &str) -> CliResult<KobayashiData> {
    let doc: Value = serde_json::from_str(text)?;
    if let Some(obj) = doc.as_object() {
        if let Some(k) = obj.keys().find(|k| !["g0", "ric0", "alpha", "beta", "lambda", "mu"].contains(&k.as_str())) {
            return Err(CliError::usage(format!("unknown key {k:?} in Kobayashi data")));
        }
    }
    let g0 = Metric::new(io::matrix_from_json(field(&doc, "g0")?)?)?;
    let n = g0.dim();
    let ric0 = Bilinear(io::matrix_from_json(field(&doc, "ric0")?)?);
    let alpha = io::form_from_json(field(&doc, "alpha")?, n)?;
    let beta = io::form_from_json(field(&doc, "beta")?, n)?;
    let scalar = |key: &str| -> CliResult<f64> {
        serde_json::from_value::<io::Number>(field(&doc, key)?.clone())?.value()
    };
    Ok(KobayashiData { g0, ric0, alpha, beta, lambda: scalar("lambda")?, mu: scalar("mu")? })
}

pub fn run(args: &KobayashiArgs) -> CliResult<ExitStatus> {
    let (data, source) = match &args.data {
        Some(path) => (parse_data(&io::read_text(path)?).map_err(|e| e.context(path.display()))?, "file"),
        None => (kobayashi_synthetic(args.lambda, args.mu), "synthetic"),
    };
    let mut out = io::report("kobayashi");
    out.insert("source".into(), json!(source));
    out.insert("lambda".into(), json!(data.lambda));
    out.insert("mu".into(), json!(data.mu));
    let status = match kobayashi_check(&data) {
        Ok(sol) => {
            out.insert("satisfied".into(), json!(true));
            out.insert("c".into(), json!(sol.c));
            out.insert("h".into(), json!(sol.h));
            out.insert("fibre_defect".into(), json!(sol.fibre_defect));
            out.insert("scale_defect".into(), json!(sol.scale_defect));
            out.insert("horizontal_defect".into(), json!(sol.horizontal_defect));
            eprintln!("conditions hold: c = {}, h = {}", sol.c, sol.h);
            ExitStatus::Pass
        }
        Err(Error::ConditionViolated { condition, defect }) => {
            out.insert("satisfied".into(), json!(false));
            out.insert("violated_condition".into(), json!(condition.to_string()));
            out.insert("defect".into(), json!(defect));
            eprintln!("condition {condition}) violated (defect {defect:e})");
            ExitStatus::CheckFailed
        }
        Err(e) => return Err(e.into()),
    };
    io::write_json(args.out.as_deref(), &Value::Object(out))?;
    Ok(status)
}
