use grf_homog_core::brf::{Chart, MpqDiagonalChart, MpqEqualChart, MpqEqualFullChart};
use grf_homog_core::catalog::{self, MpqSpace};
use grf_homog_core::ReductiveSpace;
use serde_json::{json, Map, Value};

use crate::cli::CatalogCommand;
use crate::error::{CliResult, ExitStatus};
use crate::io;
use crate::space::group_algebra;

fn chart_json(name: &str, chart: &dyn Chart, reference: &[f64]) -> Value {
    let (index, value) = chart.normalization();
    json!({
        "name": name,
        "params": chart.param_names(),
        "positive_params": chart.positive().iter().map(|&i| chart.param_names()[i]).collect::<Vec<_>>(),
        "normalization": {"param": chart.param_names()[index], "value": value},
        "sample_box": chart.sample_box().iter().map(|&(lo, hi)| json!([lo, hi])).collect::<Vec<_>>(),
        "reference_brf_point": reference,
    })
}

fn space_json(name: &str, space: &ReductiveSpace) -> Map<String, Value> {
    let mut out = io::report("catalog");
    out.insert("name".into(), json!(name));
    out.insert("algebra".into(), io::algebra_json(space.algebra(), space.isotropy_indices()));
    out.insert("killing".into(), io::matrix_json(&space.algebra().killing_form()));
    out.insert("m_indices".into(), json!(space.m_indices().iter().map(|i| i + 1).collect::<Vec<_>>()));
    out.insert("killing_on_m".into(), io::matrix_json(space.killing_on_m()));
    out
}

fn mpq_json(mpq: &MpqSpace) -> CliResult<Value> {
    let mut out = space_json(&format!("M_{{{},{}}}", mpq.p(), mpq.q()), mpq.space());
    out.insert("p".into(), json!(mpq.p()));
    out.insert("q".into(), json!(mpq.q()));
    out.insert("isotropy_speeds".into(), json!(mpq.isotropy_speeds()));
    let charts = if mpq.p() == mpq.q() {
        let a = MpqEqualChart::anchor();
        vec![
            chart_json("equal", &MpqEqualChart::new(mpq.clone())?, &a),
            chart_json(
                "full",
                &MpqEqualFullChart::new(mpq.clone())?,
                &[a[0], a[1], a[2], a[3], 0.0, a[4], 0.0, 0.0],
            ),
        ]
    } else {
        let chart = MpqDiagonalChart::new(mpq.clone());
        let point = chart.brf_point();
        vec![chart_json("diagonal", &chart, &point)]
    };
    out.insert("charts".into(), Value::Array(charts));
    Ok(Value::Object(out))
}

pub fn run(cmd: &CatalogCommand) -> CliResult<ExitStatus> {
    match cmd {
        CatalogCommand::List { out } => {
            let mut doc = io::report("catalog");
            let entries: Vec<Value> =
                catalog::names().into_iter().map(|(name, about)| json!({"name": name, "description": about})).collect();
            doc.insert("entries".into(), Value::Array(entries));
            io::write_json(out.as_deref(), &Value::Object(doc))?;
        }
        CatalogCommand::Mpq { p, q, dump } => io::write_json(dump.as_deref(), &mpq_json(&catalog::mpq(*p, *q)?)?)?,
        CatalogCommand::Group { name, dump } => {
            let model = catalog::bi_invariant_group(&group_algebra(name)?, 1.0)?;
            let mut doc = space_json(name, &model.space);
            doc.insert("metric".into(), io::matrix_json(model.metric.matrix()));
            doc.insert("torsion".into(), io::form_json(&model.torsion));
            doc.insert("scale".into(), json!(model.scale));
            io::write_json(dump.as_deref(), &Value::Object(doc))?;
        }
    }
    Ok(ExitStatus::Pass)
}
