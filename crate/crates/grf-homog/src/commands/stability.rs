use grf_homog_core::flow::{jacobian_eigen, Stability};
use serde_json::{json, Value};

use crate::cli::StabilityArgs;
use crate::commands::flow::{fixed_point, model};
use crate::error::{CliError, CliResult, ExitStatus};
use crate::{io, tables};

pub fn run(args: &StabilityArgs) -> CliResult<ExitStatus> {
    let space = args.space.resolve()?;
    let mpq = space.mpq()?;
    let model = model(mpq, args.lambda, args.model)?;
    let point = match &args.point {
        Some(text) => io::parse_list(text)?,
        None => fixed_point(mpq, args.lambda, &model),
    };
    if point.len() != model.field.dim() {
        return Err(CliError::usage(format!("--point needs {} values for the {} model", model.field.dim(), model.name)));
    }
    let report = jacobian_eigen(model.field.as_ref(), &point)?;
    let mut out = io::report("stability");
    out.insert("space".into(), space.describe());
    out.insert("lambda".into(), json!(args.lambda));
    out.insert("model".into(), json!(model.name));
    out.insert("point".into(), json!(report.point));
    out.insert("jacobian".into(), io::matrix_json(&report.jacobian));
    out.insert("eigenvalues".into(), json!(report.eigenvalues.iter().map(|e| e.0).collect::<Vec<_>>()));
    out.insert("eigenvalues_imaginary".into(), json!(report.eigenvalues.iter().map(|e| e.1).collect::<Vec<_>>()));
    let class = match report.classification {
        Stability::AsymptoticallyStable => "asymptotically_stable",
        Stability::NotAsymptoticallyStable => "not_asymptotically_stable",
    };
    out.insert("classification".into(), json!(class));
    if mpq.p() != mpq.q() && args.point.is_none() {
        let (p, q) = (f64::from(mpq.p()), f64::from(mpq.q()));
        out.insert("closed_form_eigenvalues".into(), json!(tables::flow_eigenvalues(p, q, args.lambda)));
    }
    io::write_json(args.out.as_deref(), &Value::Object(out))?;
    eprintln!("{class}: eigenvalues {:?}", report.eigenvalues);
    Ok(ExitStatus::Pass)
}
