use grf_homog_core::brf::{
    gauge_normalize, ray_distance, solve, Chart, Gauge, MpqDiagonalChart, MpqEqualChart, MpqEqualFullChart,
    SolveOptions, SolveReport,
};
use grf_homog_core::curvature::scalar;
use grf_homog_core::forms::{form_norm_sq, fundamental_four_form, h_squared, koszul_d};
use grf_homog_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cli::{BrfArgs, ChartKind, GaugeKind};
use crate::error::{status_of, CliError, CliResult, ExitStatus};
use crate::io;
use crate::thread_pool;

/// Distance from a converged point to the reference ray below which the
/// point counts as lying on it.
pub const RAY_TOL: f64 = 1e-8;

struct Setup {
    chart: Box<dyn Chart>,
    name: &'static str,
    /// A point on the reference ray, in the coordinates compared against.
    reference: Vec<f64>,
    /// Whether points are gauge normalized before comparison.
    gauge_fix: bool,
}

fn setup(args: &BrfArgs) -> CliResult<Setup> {
    let mpq = args.space.resolve()?.mpq()?.clone();
    let equal = mpq.p() == mpq.q();
    let kind = match (args.chart, equal) {
        (ChartKind::Auto, false) => ChartKind::Diagonal,
        (ChartKind::Auto, true) => ChartKind::Full,
        (k, _) => k,
    };
    let anchor = MpqEqualChart::anchor();
    Ok(match kind {
        ChartKind::Diagonal => {
            if equal {
                return Err(CliError::usage("the diagonal chart needs p != q"));
            }
            let chart = MpqDiagonalChart::new(mpq);
            let reference = chart.brf_point();
            Setup { chart: Box::new(chart), name: "diagonal", reference, gauge_fix: false }
        }
        ChartKind::Equal => {
            Setup { chart: Box::new(MpqEqualChart::new(mpq)?), name: "equal", reference: anchor.to_vec(), gauge_fix: false }
        }
        ChartKind::Full => Setup {
            chart: Box::new(MpqEqualFullChart::new(mpq)?),
            name: "full",
            reference: vec![anchor[0], anchor[1], anchor[2], anchor[3], 0.0, anchor[4], 0.0, 0.0],
            gauge_fix: true,
        },
        ChartKind::Auto => unreachable!("resolved above"),
    })
}

fn random_starts(chart: &dyn Chart, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let bounds = chart.sample_box();
    (0..n)
        .map(|_| loop {
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| r.gen_range(lo..hi)).collect();
            if chart.in_domain(&x) {
                break x;
            }
        })
        .collect()
}

fn converged_entry(setup: &Setup, rep: &SolveReport) -> CliResult<(Map<String, Value>, bool)> {
    let chart = setup.chart.as_ref();
    let mut e = Map::new();
    let compared = if setup.gauge_fix { gauge_normalize(&rep.params) } else { rep.params.clone() };
    let distance = ray_distance(chart, &compared, &setup.reference);
    let on_ray = distance.is_some_and(|d| d < RAY_TOL);
    if setup.gauge_fix {
        e.insert("gauge_normalized".into(), json!(compared));
    }
    if let Some(d) = distance {
        e.insert("ray_distance".into(), json!(d));
    }
    e.insert("on_reference_ray".into(), json!(on_ray));
    let (g, h) = chart.eval(&rep.params)?;
    let space = chart.space();
    let full = form_norm_sq(&g, &h)?;
    e.insert("metric".into(), io::matrix_json(g.matrix()));
    e.insert("torsion".into(), io::form_json(&h));
    e.insert("scalar_curvature".into(), json!(scalar(space, &g)?));
    e.insert("quarter_trace_h_squared".into(), json!(0.25 * h_squared(&g, &h)?.trace(&g)));
    e.insert("quarter_norm_h2_one_over_3_factorial".into(), json!(full / 24.0));
    e.insert("dh_max".into(), json!(koszul_d(space, &h)?.max_abs()));
    e.insert("sigma_h_max".into(), json!(fundamental_four_form(&g, &h)?.max_abs()));
    Ok((e, on_ray))
}

pub fn run(args: &BrfArgs) -> CliResult<ExitStatus> {
    let setup = setup(args)?;
    let chart = setup.chart.as_ref();
    if !(args.tol > 0.0) {
        return Err(CliError::usage("--tol must be positive"));
    }
    let starts = match (&args.init, args.multistart) {
        (Some(text), _) => {
            let x = io::parse_list(text)?;
            if x.len() != chart.dim() {
                return Err(CliError::usage(format!(
                    "--init needs {} values ({}) for the {} chart",
                    chart.dim(),
                    chart.param_names().join(", "),
                    setup.name
                )));
            }
            vec![x]
        }
        (None, Some(0)) => return Err(CliError::usage("--multistart must be at least 1")),
        (None, Some(n)) => random_starts(chart, n, args.seed),
        (None, None) => random_starts(chart, 1, args.seed),
    };
    let options = SolveOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        gauge: match args.gauge {
            GaugeKind::Fix => Gauge::FixNormalization,
            GaugeKind::Pin => Gauge::PinNormH2(None),
            GaugeKind::Free => Gauge::Free,
        },
        ..SolveOptions::default()
    };
    let results: Vec<Result<SolveReport, Error>> =
        thread_pool()?.install(|| starts.par_iter().map(|x0| solve(chart, x0, &options)).collect());

    let mut runs = Vec::with_capacity(starts.len());
    let (mut converged, mut on_ray, mut off_ray) = (0usize, 0usize, 0usize);
    let mut single_failure = None;
    for (i, (x0, result)) in starts.iter().zip(&results).enumerate() {
        let mut e = Map::new();
        e.insert("index".into(), json!(i));
        e.insert("initial".into(), json!(x0));
        match result {
            Ok(rep) => {
                e.insert("converged".into(), json!(rep.converged));
                e.insert("params".into(), json!(rep.params));
                e.insert("residual_norm".into(), json!(rep.residual_norm));
                e.insert("iterations".into(), json!(rep.iterations));
                e.insert("jacobian_rank".into(), json!(rep.jacobian_rank));
                e.insert("singular_values".into(), json!(rep.singular_values));
                if rep.converged {
                    converged += 1;
                    let (extra, ok) = converged_entry(&setup, rep)?;
                    e.extend(extra);
                    if ok {
                        on_ray += 1;
                    } else {
                        off_ray += 1;
                    }
                } else {
                    single_failure = Some(CliError::numerical(format!("start {i} did not converge")));
                }
            }
            Err(err) => {
                e.insert("converged".into(), json!(false));
                e.insert("error".into(), json!(err.to_string()));
                if let Error::MaxIterations { params, residual, .. } | Error::LeftDomain { params, residual } = err {
                    e.insert("params".into(), json!(params));
                    e.insert("residual_norm".into(), json!(residual));
                }
                single_failure = Some(CliError { status: status_of(err), message: format!("start {i}: {err}") });
            }
        }
        runs.push(Value::Object(e));
    }

    let mut out = io::report("brf");
    out.insert("space".into(), args.space.resolve()?.describe());
    out.insert("chart".into(), json!({"name": setup.name, "params": chart.param_names(), "reference_ray": setup.reference}));
    out.insert("options".into(), json!({"tol": args.tol, "max_iter": args.max_iter, "seed": args.seed, "starts": starts.len()}));
    out.insert(
        "summary".into(),
        json!({"runs": starts.len(), "converged": converged, "on_reference_ray": on_ray, "off_reference_ray": off_ray}),
    );
    out.insert("runs".into(), Value::Array(runs));
    io::write_json(args.out.as_deref(), &Value::Object(out))?;
    eprintln!("{converged}/{} converged, {on_ray} on the reference ray, {off_ray} off it", starts.len());

    if off_ray > 0 {
        return Ok(ExitStatus::CheckFailed);
    }
    if converged == 0 {
        // a lone start reports its own failure; several failing starts are numerical
        return Err(match (starts.len(), single_failure) {
            (1, Some(err)) => err,
            _ => CliError::numerical("no start converged"),
        });
    }
    Ok(ExitStatus::Pass)
}
