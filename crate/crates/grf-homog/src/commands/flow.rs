use grf_homog_core::catalog::MpqSpace;
use grf_homog_core::flow::{fixed_point_mpq, integrate, FlowState, GrfField, IntegrateOptions, MpqOde, RkOptions, VectorField};
use serde_json::{json, Value};

use crate::cli::{FlowArgs, Format, ModelKind};
use crate::error::{CliError, CliResult, ExitStatus};
use crate::io;

/// The flow field selected by `--model`, with its column names.
pub struct Model {
    pub field: Box<dyn VectorField>,
    pub name: &'static str,
    pub metric_names: Vec<&'static str>,
}

pub fn model(mpq: &MpqSpace, lambda: f64, kind: ModelKind) -> CliResult<Model> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CliError::usage(format!("--lambda must be positive (got {lambda})")));
    }
    let equal = mpq.p() == mpq.q();
    let metric_names = if equal { vec!["M", "A", "B", "C", "S"] } else { vec!["M", "A", "B"] };
    match (kind, equal) {
        (ModelKind::Ode, true) => Err(CliError::usage("the closed-form ODE needs p != q; use --model grf")),
        (ModelKind::Auto | ModelKind::Ode, false) => {
            Ok(Model { field: Box::new(MpqOde::new(mpq.p(), mpq.q(), lambda)?), name: "ode", metric_names })
        }
        (_, _) => Ok(Model { field: Box::new(GrfField::mpq(mpq, lambda)?), name: "grf", metric_names }),
    }
}

/// The BRF fixed point in the coordinates of `model`, with `b = 0`.
pub fn fixed_point(mpq: &MpqSpace, lambda: f64, model: &Model) -> Vec<f64> {
    let mut y = fixed_point_mpq(f64::from(mpq.p()), f64::from(mpq.q()), lambda).to_vec();
    y.resize(model.field.dim(), 0.0);
    y
}

pub fn run(args: &FlowArgs) -> CliResult<ExitStatus> {
    let space = args.space.resolve()?;
    let mpq = space.mpq()?;
    let model = model(mpq, args.lambda, args.model)?;
    let field = model.field.as_ref();
    let init = io::parse_list(&args.init)?;
    if init.len() != field.metric_dim() {
        return Err(CliError::usage(format!(
            "--init needs {} values ({})",
            field.metric_dim(),
            model.metric_names.join(",")
        )));
    }
    let b = match &args.b {
        Some(text) => io::parse_list(text)?,
        None => vec![0.0; field.b_dim()],
    };
    if b.len() != field.b_dim() {
        return Err(CliError::usage(format!("--b needs {} values for the {} model", field.b_dim(), model.name)));
    }
    if !(args.tmax > 0.0 && args.tmax.is_finite()) {
        return Err(CliError::usage("--tmax must be positive"));
    }
    if !(args.rtol > 0.0 && args.atol > 0.0) {
        return Err(CliError::usage("--rtol and --atol must be positive"));
    }
    let rk = RkOptions { rtol: args.rtol, atol: args.atol, ..RkOptions::default() };
    let options = IntegrateOptions { rk, ..IntegrateOptions::new(args.tmax) }.with_uniform_samples(0.0, args.samples);
    let traj = integrate(field, &FlowState::new(0.0, init, b), &options)?;

    // b stays constant when p != q, so only the p = q table carries it
    let with_b = mpq.p() == mpq.q();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(model.metric_names.iter().map(|s| s.to_string()));
    if with_b {
        header.extend((1..=field.b_dim()).map(|i| format!("b{i}")));
    }
    header.extend(["residual_norm", "scal", "normH2"].map(String::from));
    let mut rows = Vec::with_capacity(traj.states.len());
    for (s, d) in traj.states.iter().zip(&traj.diagnostics) {
        let d = d.ok_or_else(|| CliError::numerical(format!("diagnostics unavailable at t = {}", s.t)))?;
        let mut row = vec![s.t];
        row.extend_from_slice(&s.metric_params);
        if with_b {
            row.extend_from_slice(&s.b_params);
        }
        row.extend([d.residual_norm, d.scal, d.norm_h2]);
        rows.push(row);
    }
    let last = traj.last();
    let fp = fixed_point(mpq, args.lambda, &model);
    let dist = last.metric_params.iter().zip(&fp).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    eprintln!(
        "t = {} state {:?}; distance to the fixed point {dist:.3e}; {} accepted, {} rejected steps",
        last.t, last.metric_params, traj.accepted_steps, traj.rejected_steps
    );
    let bytes = match args.format {
        Format::Csv => {
            let refs: Vec<&str> = header.iter().map(String::as_str).collect();
            io::csv_bytes(&refs, &rows)?
        }
        Format::Json => {
            let mut out = io::report("flow");
            out.insert("space".into(), space.describe());
            out.insert("lambda".into(), json!(args.lambda));
            out.insert("model".into(), json!(model.name));
            out.insert("columns".into(), json!(header));
            out.insert("rows".into(), json!(rows));
            out.insert("b_params".into(), json!(last.b_params));
            out.insert("fixed_point".into(), json!(&fp[..field.metric_dim()]));
            out.insert("distance_to_fixed_point".into(), json!(dist));
            out.insert("stopped_on_small_field".into(), json!(traj.converged));
            out.insert("final_field_norm".into(), json!(traj.final_field_norm));
            out.insert("accepted_steps".into(), json!(traj.accepted_steps));
            out.insert("rejected_steps".into(), json!(traj.rejected_steps));
            io::to_json_bytes(&Value::Object(out))?
        }
    };
    io::write_output(args.out.as_deref(), &bytes)?;
    Ok(ExitStatus::Pass)
}
