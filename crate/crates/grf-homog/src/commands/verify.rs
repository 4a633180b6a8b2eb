use grf_homog_core::brf::{brf_residual, chart_residual, differential_at, residual_polynomials_p_eq_q, MpqEqualChart};
use grf_homog_core::catalog::{
    diagonal_torsion, mpq_diagonal_metric, mpq_equal_metric, mpq_equal_torsion, BiInvariantModel, MpqSpace,
};
use grf_homog_core::curvature::{bismut_nomizu, bismut_ricci, curvature_tensor, levi_civita_nomizu, ricci, scalar};
use grf_homog_core::flow::{fixed_point_mpq, jacobian_eigen, mpq_ode_rhs, GrfField, MpqOde, VectorField};
use grf_homog_core::forms::{
    codifferential, form_norm_sq, fundamental_four_form, h_squared, hodge_star, invariant_form_basis,
    invariant_symmetric_basis, koszul_d,
};
use grf_homog_core::linalg::{lstsq, mat_vec, max_abs, norm, Mat};
use grf_homog_core::{AltForm, Metric, ReductiveSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cli::VerifyArgs;
use crate::error::{CliError, CliResult, ExitStatus};
use crate::io;
use crate::space::Space;
use crate::tables;

/// `|x - y| / max(1, |y|)`.
fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format!("{x}"))
    }
}

#[derive(Default)]
struct Checks {
    items: Vec<Value>,
    failed: usize,
}

impl Checks {
    fn push(&mut self, name: &str, computed: f64, expected: f64, tolerance: f64, relation: &str, pass: bool) {
        if !pass {
            self.failed += 1;
        }
        eprintln!(
            "{} {name}: {computed:.3e} {relation} {}",
            if pass { "PASS" } else { "FAIL" },
            if relation == ">" { format!("{expected:.1e}") } else { format!("{tolerance:.1e}") }
        );
        self.items.push(json!({
            "name": name,
            "computed": number(computed),
            "expected": number(expected),
            "tolerance": number(tolerance),
            "relation": relation,
            "pass": pass,
        }));
    }

    /// Passes when `defect < tol`.
    fn small(&mut self, name: &str, defect: f64, tol: f64) {
        self.push(name, defect, 0.0, tol, "<", defect < tol);
    }

    /// Passes when `value > threshold`.
    fn above(&mut self, name: &str, value: f64, threshold: f64) {
        self.push(name, value, threshold, 0.0, ">", value > threshold);
    }

    /// Passes when `|computed - expected| / max(1, |expected|) < tol`.
    fn close(&mut self, name: &str, computed: f64, expected: f64, tol: f64) {
        let err = rel_err(computed, expected);
        self.push(name, computed, expected, tol, "relative error <", err < tol);
    }
}

fn pair_tables(space: &ReductiveSpace, g: &Metric, h: &AltForm) -> CliResult<Value> {
    let ric = ricci(space, g)?;
    let h2 = h_squared(g, h)?;
    let bric = bismut_ricci(space, g, h)?;
    let curv = curvature_tensor(space, &bismut_nomizu(space, g, h)?)?;
    let full = form_norm_sq(g, h)?;
    Ok(json!({
        "metric": io::matrix_json(g.matrix()),
        "torsion": io::form_json(h),
        "ricci": io::matrix_json(&ric.0),
        "h_squared": io::matrix_json(&h2.0),
        "bismut_ricci": io::matrix_json(&bric.0),
        "bismut_curvature": io::curvature_json(&curv),
        "scalar_curvature": scalar(space, g)?,
        // |H|^2 as a full contraction, and with the 1/3! convention
        "quarter_norm_h2_full": 0.25 * full,
        "quarter_norm_h2_one_over_3_factorial": full / 24.0,
    }))
}

/// Largest component of dH; zero when dH would exceed the top degree.
fn dh_max(space: &ReductiveSpace, h: &AltForm) -> CliResult<f64> {
    if h.degree() >= h.dim() {
        return Ok(0.0);
    }
    Ok(koszul_d(space, h)?.max_abs())
}

/// Structural and BRF checks shared by every `(g, H)` that should be a
/// non-flat BRF pair with harmonic, non-parallel torsion.
fn brf_pair_checks(c: &mut Checks, tag: &str, space: &ReductiveSpace, g: &Metric, h: &AltForm) -> CliResult<()> {
    c.small(&format!("{tag}: BRF residual (max norm)"), brf_residual(space, g, h)?.max_norm(), 1e-10);
    let bismut = curvature_tensor(space, &bismut_nomizu(space, g, h)?)?.max_abs();
    c.above(&format!("{tag}: Bismut curvature max component"), bismut, 1e-3);
    let lc = curvature_tensor(space, &levi_civita_nomizu(space, g)?)?;
    let gap = (lc.ricci_contraction().0 - ricci(space, g)?.0).abs().max();
    c.small(&format!("{tag}: Ricci equals contraction of the Levi-Civita curvature"), gap, 1e-9);
    let scal = scalar(space, g)?;
    c.close(&format!("{tag}: Scal = 1/4 tr H^2"), scal, 0.25 * h_squared(g, h)?.trace(g), 1e-10);
    c.small(&format!("{tag}: dH"), dh_max(space, h)?, 1e-12);
    c.small(&format!("{tag}: codifferential of H"), codifferential(space, g, h)?.max_abs(), 1e-10);
    c.above(&format!("{tag}: sigma_H max component (torsion not parallel)"), fundamental_four_form(g, h)?.max_abs(), 1e-3);
    Ok(())
}

fn structure_checks(c: &mut Checks, mpq: &MpqSpace) {
    let (p, q) = (f64::from(mpq.p()), f64::from(mpq.q()));
    c.small("Jacobi identity", mpq.space().algebra().jacobi_defect().0, 1e-12);
    let speeds = mpq.isotropy_speeds();
    let want = [0.0, p, p, q, q];
    c.small("isotropy speeds (0, p, p, q, q)", max_abs(speeds.iter().zip(want).map(|(a, b)| a - b)), 1e-12);
}

fn verify_diagonal(c: &mut Checks, mpq: &MpqSpace, points: usize, r: &mut ChaCha8Rng) -> CliResult<()> {
    let (p, q) = (f64::from(mpq.p()), f64::from(mpq.q()));
    let space = mpq.space();
    let (mut ric_err, mut h2_err, mut star_err, mut closed, mut open) = (0f64, 0f64, 0f64, 0f64, f64::INFINITY);
    for _ in 0..points {
        let (mu, a, b) = (r.gen_range(0.3..4.0), r.gen_range(0.3..3.0), r.gen_range(0.3..3.0));
        let g = mpq_diagonal_metric(mu, a, b)?;
        let ric = ricci(space, &g)?;
        let h2 = h_squared(&g, &mpq.harmonic_torsion())?;
        let (ro, ho) = (tables::diagonal_ricci(p, q, mu, a, b), tables::diagonal_h_squared(p, q, mu, a, b));
        for i in 0..5 {
            for j in 0..5 {
                let (er, eh) = if i == j { (ro[i], ho[i]) } else { (0.0, 0.0) };
                ric_err = ric_err.max(rel_err(ric.0[(i, j)], er));
                h2_err = h2_err.max(rel_err(h2.0[(i, j)], eh));
            }
        }
        let (h1, hh2) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let h = AltForm::from_terms(5, 3, &[(&[0, 1, 2], h1), (&[0, 3, 4], hh2)])?;
        let (c23, c45) = tables::diagonal_star(mu, a, b, h1, hh2);
        let expected = AltForm::from_terms(5, 2, &[(&[1, 2], c23), (&[3, 4], c45)])?;
        star_err = star_err.max(hodge_star(space, &g, &h)?.sub(&expected)?.max_abs());

        let lam = r.gen_range(-3.0..3.0);
        closed = closed.max(koszul_d(space, &diagonal_torsion(p, q, lam))?.max_abs());
        let eps = r.gen_range(0.1..1.0);
        let skew = AltForm::from_terms(5, 3, &[(&[0, 1, 2], lam * q + eps), (&[0, 3, 4], lam * p)])?;
        open = open.min(koszul_d(space, &skew)?.max_abs());
    }
    c.small(&format!("Ricci table, {points} points (worst relative error)"), ric_err, 1e-10);
    c.small(&format!("H^2 table, {points} points (worst relative error)"), h2_err, 1e-10);
    c.small("Hodge star of H formula", star_err, 1e-12);
    c.small("dH for (h1, h2) proportional to (q, p)", closed, 1e-12);
    c.above("dH for (h1, h2) not proportional to (q, p)", open, 1e-3);

    let (g, h) = mpq.brf_pair(1.0)?;
    brf_pair_checks(c, "closed-form BRF pair", space, &g, &h)?;

    let fp = fixed_point_mpq(p, q, 1.0);
    c.small("flow right-hand side at the fixed point", max_abs(mpq_ode_rhs(fp[0], fp[1], fp[2], p, q, 1.0)?), 1e-14);
    let report = jacobian_eigen(&MpqOde::new(mpq.p(), mpq.q(), 1.0)?, &fp)?;
    let want = tables::flow_eigenvalues(p, q, 1.0);
    let eig_err = max_abs(report.eigenvalues.iter().zip(want).map(|(e, w)| (e.0 - w).abs().max(e.1.abs())));
    c.small("flow eigenvalues at the fixed point", eig_err, 1e-8);

    let mut worst = 0f64;
    for _ in 0..points {
        let lambda = r.gen_range(0.2..3.0);
        let field = GrfField::mpq(mpq, lambda)?;
        let (m, a, b) = (r.gen_range(0.1..20.0), r.gen_range(0.05..5.0), r.gen_range(0.05..5.0));
        let mut y = vec![m, a, b];
        y.extend((0..field.b_dim()).map(|_| r.gen_range(-1.0..1.0)));
        let generic = field.eval(&y)?;
        let closed = mpq_ode_rhs(m, a, b, p, q, lambda)?;
        worst = worst.max(max_abs((0..3).map(|i| rel_err(generic[i], closed[i]))));
    }
    c.small(&format!("closed-form flow equals the generic field, {points} points"), worst, 1e-10);
    Ok(())
}

fn verify_equal(c: &mut Checks, mpq: &MpqSpace, points: usize, r: &mut ChaCha8Rng) -> CliResult<()> {
    let space = mpq.space();
    let (mut ric_err, mut h2_err, mut star_err) = (0f64, 0f64, 0f64);
    let (mut closed, mut open, mut harmonic, mut off) = (0f64, f64::INFINITY, 0f64, f64::INFINITY);
    for _ in 0..points {
        let (mu, a, b) = (r.gen_range(0.3..4.0), r.gen_range(0.3..3.0), r.gen_range(0.3..3.0));
        let cc = r.gen_range(-0.8..0.8) * a * b;
        let h1 = r.gen_range(0.2..2.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let g = mpq_equal_metric(mu, a, b, cc, 0.0)?;
        let h3 = tables::harmonic_h3(a, b, cc, h1);
        let h = mpq_equal_torsion(h1, h1, h3, 0.0);
        let (rt, ht) = tables::equal_tables(mu, a, b, cc, h1);
        let (ric, h2) = (ricci(space, &g)?, h_squared(&g, &h)?);
        for i in 0..5 {
            for j in 0..5 {
                ric_err = ric_err.max(rel_err(ric.0[(i, j)], tables::equal_entry(&rt, i, j)));
                h2_err = h2_err.max(rel_err(h2.0[(i, j)], tables::equal_entry(&ht, i, j)));
            }
        }

        let (x3, x4) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let star = hodge_star(space, &g, &mpq_equal_torsion(h1, h1, x3, x4))?;
        let [c23, c45, c24, c25] = tables::equal_star(mu, a, b, cc, h1, x3, x4);
        let expected = AltForm::from_terms(
            5,
            2,
            &[(&[1, 2], c23), (&[3, 4], c45), (&[1, 3], c24), (&[2, 4], c24), (&[1, 4], c25), (&[2, 3], -c25)],
        )?;
        star_err = star_err.max(star.sub(&expected)?.max_abs() / expected.max_abs().max(1.0));

        closed = closed.max(koszul_d(space, &mpq_equal_torsion(h1, h1, x3, x4))?.max_abs());
        let eps = r.gen_range(0.1..1.0);
        open = open.min(koszul_d(space, &mpq_equal_torsion(h1, h1 + eps, x3, x4))?.max_abs());
        harmonic = harmonic.max(codifferential(space, &g, &h)?.max_abs());
        let d3 = codifferential(space, &g, &mpq_equal_torsion(h1, h1, h3 + eps, 0.0))?.max_abs();
        let d4 = codifferential(space, &g, &mpq_equal_torsion(h1, h1, h3, eps))?.max_abs();
        off = off.min(d3).min(d4);
    }
    c.small(&format!("Ricci table including (2,4), {points} points"), ric_err, 1e-10);
    c.small(&format!("H^2 table including (2,4), {points} points"), h2_err, 1e-10);
    c.small("Hodge star of H formula (relative)", star_err, 1e-12);
    c.small("dH for h2 = h1", closed, 1e-12);
    c.above("dH for h2 != h1", open, 1e-3);
    c.small("codifferential at harmonic (h3, h4 = 0)", harmonic, 1e-10);
    c.above("codifferential away from harmonic (h3, h4)", off, 1e-4);

    let chart = MpqEqualChart::new(mpq.clone())?;
    let anchor = MpqEqualChart::anchor();
    c.small("residual at x_o = (2 sqrt 2, 1, 1, 0, 2)", max_abs(chart_residual(&chart, &anchor)?), 1e-10);
    c.small("polynomials p1..p4 at x_o", max_abs(residual_polynomials_p_eq_q(anchor)?), 1e-9);
    let mut scaled = 0f64;
    for t in [0.5, 1.0, 2.0] {
        let vals = residual_polynomials_p_eq_q(MpqEqualChart::scaling_curve(t))?;
        scaled = scaled.max(max_abs(vals.iter().zip(tables::POLYNOMIAL_DEGREES).map(|(v, d)| v / t.powi(d))));
    }
    c.small("polynomials along the scaling curve, t in {0.5, 1, 2} (scaled)", scaled, 1e-9);
    let diff = differential_at(&chart, &anchor, |x| {
        residual_polynomials_p_eq_q([x[0], x[1], x[2], x[3], x[4]]).map(|v| v.to_vec())
    })?;
    let expected = tables::anchor_differential();
    let mut worst = 0f64;
    for (i, row) in expected.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            worst = worst.max((diff.matrix[(i, j)] - e).abs() / e.abs().max(1.0));
        }
    }
    c.small("differential at x_o vs closed form (relative)", worst, 1e-6);
    c.push("rank of the differential at x_o", diff.rank as f64, 4.0, 0.0, "=", diff.rank == 4);
    let tangent = [2.0 * std::f64::consts::SQRT_2, 1.0, 1.0, 0.0, 4.0];
    c.small("curve tangent lies in the kernel", norm(&mat_vec(&diff.matrix, &tangent)), 1e-5);

    let (g, h) = mpq.brf_pair(1.0)?;
    brf_pair_checks(c, "BRF pair on the anchor ray", space, &g, &h)?;
    let field = GrfField::mpq(mpq, 1.0)?;
    let mut y = vec![4.0, 0.5, 0.5, 0.0, 0.0];
    y.extend(vec![0.0; field.b_dim()]);
    c.small("generic flow field at the BRF point", max_abs(field.eval(&y)?), 1e-12);
    Ok(())
}

fn group_checks(c: &mut Checks, space: &ReductiveSpace, model: &BiInvariantModel) -> CliResult<()> {
    let eig = space.algebra().killing_form().symmetric_eigen().eigenvalues;
    c.above("Killing form negative definite (minus largest eigenvalue)", -eig.max(), 0.0);
    let (g, h) = (&model.metric, &model.torsion);
    c.small("BRF residual (max norm)", brf_residual(space, g, h)?.max_norm(), 1e-12);
    c.small("Bismut curvature max component", curvature_tensor(space, &bismut_nomizu(space, g, h)?)?.max_abs(), 1e-12);
    let lc = curvature_tensor(space, &levi_civita_nomizu(space, g)?)?;
    c.small(
        "Ricci equals contraction of the Levi-Civita curvature",
        (lc.ricci_contraction().0 - ricci(space, g)?.0).abs().max(),
        1e-9,
    );
    c.close("Scal = 1/4 tr H^2", scalar(space, g)?, 0.25 * h_squared(g, h)?.trace(g), 1e-10);
    c.small("dH", dh_max(space, h)?, 1e-12);
    Ok(())
}

/// Coefficients of `target` in the span of `basis`, if it lies there.
fn coordinates(basis: &[Mat], target: &Mat) -> Option<Vec<f64>> {
    let len = target.len();
    let a = Mat::from_fn(len, basis.len(), |r, c| basis[c].as_slice()[r]);
    let y = lstsq(&a, target.as_slice())?;
    let back = mat_vec(&a, &y);
    (max_abs(back.iter().zip(target.as_slice()).map(|(u, v)| u - v)) < 1e-12).then_some(y)
}

pub fn run(args: &VerifyArgs) -> CliResult<ExitStatus> {
    let resolved = args.space.resolve()?;
    let mut r = ChaCha8Rng::seed_from_u64(args.seed);
    let mut c = Checks::default();
    let mut out = io::report("verify");
    out.insert("space".into(), resolved.describe());
    out.insert("seed".into(), json!(args.seed));
    out.insert("points".into(), json!(args.points));
    let space = resolved.reductive();
    let tables_value = match &resolved {
        Space::Mpq(mpq) => {
            structure_checks(&mut c, mpq);
            if mpq.p() == mpq.q() {
                verify_equal(&mut c, mpq, args.points, &mut r)?;
            } else {
                verify_diagonal(&mut c, mpq, args.points, &mut r)?;
            }
            let (g, h) = mpq.brf_pair(1.0)?;
            Some(pair_tables(space, &g, &h)?)
        }
        Space::Group { model, .. } => {
            c.small("Jacobi identity", space.algebra().jacobi_defect().0, 1e-12);
            group_checks(&mut c, space, model)?;
            Some(pair_tables(space, &model.metric, &model.torsion)?)
        }
        Space::Torus(t) => {
            let n = space.m_dim();
            c.small("Ricci tensor", ricci(space, &t.metric)?.max_abs(), 1e-15);
            c.small("Levi-Civita curvature", curvature_tensor(space, &levi_civita_nomizu(space, &t.metric)?)?.max_abs(), 1e-15);
            if n >= 3 {
                c.small("BRF residual", brf_residual(space, &t.metric, &t.torsion)?.max_norm(), 1e-15);
                let field = GrfField::new(
                    space.clone(),
                    invariant_symmetric_basis(space),
                    t.torsion.clone(),
                    invariant_form_basis(space, 2)?,
                )?;
                let basis = invariant_symmetric_basis(space);
                let mut y = coordinates(&basis, t.metric.matrix())
                    .ok_or_else(|| CliError::numerical("the identity metric is not in the invariant symmetric span"))?;
                y.extend(vec![0.0; field.b_dim()]);
                c.small("generic flow field", max_abs(field.eval(&y)?), 1e-15);
                Some(pair_tables(space, &t.metric, &t.torsion)?)
            } else {
                None
            }
        }
        Space::Custom { space, model, .. } => {
            c.small("Jacobi identity", space.algebra().jacobi_defect().0, 1e-12);
            c.small("unimodular (largest |tr ad|)", max_abs(space.algebra().ad_traces()), 1e-12);
            let eig = space.algebra().killing_form().symmetric_eigen().eigenvalues;
            out.insert("killing_eigenvalues".into(), json!(eig.iter().cloned().collect::<Vec<_>>()));
            match model {
                Some(model) => {
                    group_checks(&mut c, space, model)?;
                    Some(pair_tables(space, &model.metric, &model.torsion)?)
                }
                None => None,
            }
        }
    };
    if let Some(t) = tables_value {
        out.insert("tables".into(), t);
    }
    let passed = c.items.len() - c.failed;
    out.insert("summary".into(), json!({"checks": c.items.len(), "passed": passed, "failed": c.failed}));
    out.insert("checks".into(), Value::Array(c.items));
    io::write_json(args.out.as_deref(), &Value::Object(out))?;
    eprintln!("{passed}/{} checks passed", passed + c.failed);
    Ok(if c.failed == 0 { ExitStatus::Pass } else { ExitStatus::CheckFailed })
}
