//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{diagonal, equal, rel_err, rng, uniform};
use grf_homog_core::brf::{
    brf_residual, chart_residual, differential_at, gauge_normalize, ray_distance, residual_polynomials_p_eq_q, solve,
    Chart, MpqDiagonalChart, MpqEqualChart, MpqEqualFullChart, SolveOptions,
};
use grf_homog_core::catalog::{
    self, bi_invariant_group, diagonal_torsion, harmonic_h3, kobayashi_check, kobayashi_synthetic,
    mpq_diagonal_metric, mpq_equal_metric, mpq_equal_torsion, KobayashiData,
};
use grf_homog_core::curvature::{bismut_nomizu, curvature_tensor, levi_civita_nomizu, ricci, scalar};
use grf_homog_core::flow::{
    fixed_point_mpq, integrate, jacobian_eigen, mpq_fixed_point_eigenvalues, mpq_ode_rhs, FlowState, GrfField,
    IntegrateOptions, MpqOde, VectorField,
};
use grf_homog_core::forms::{
    codifferential, form_inner, fundamental_four_form, h_squared, hodge_star, invariant_form_basis, koszul_d,
};
use grf_homog_core::linalg::{mat_vec, max_abs, norm};
use grf_homog_core::{AltForm, Bilinear, Error, Metric, ReductiveSpace};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>())
}

fn random_start(chart: &dyn Chart, r: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = chart.sample_box().iter().map(|&(lo, hi)| uniform(r, lo, hi)).collect();
        if chart.in_domain(&x) {
            return x;
        }
    }
}

/// A BRF point found by the solver, kept for the trace identity check.
struct Found {
    label: String,
    space: ReductiveSpace,
    metric: Metric,
    torsion: AltForm,
}

impl Found {
    fn from_chart(label: String, chart: &dyn Chart, x: &[f64]) -> Result<Self, String> {
        let (metric, torsion) = ok(chart.eval(x))?;
        Ok(Found { label, space: chart.space().clone(), metric, torsion })
    }
}

fn brf_reproduction(found: &mut Vec<Found>) -> Outcome {
    const STARTS: usize = 50;
    let mut summary = Vec::new();
    for (p, q) in [(2u32, 1u32), (3, 1), (3, 2), (5, 2)] {
        let mpq = ok(catalog::mpq(p, q))?;
        let (g, h) = ok(mpq.brf_pair(1.0))?;
        let res = ok(brf_residual(mpq.space(), &g, &h))?.max_norm();
        ensure!(res < 1e-10, "M{p}{q} closed-form pair residual {res:e}");

        let chart = MpqDiagonalChart::new(mpq);
        let target = chart.brf_point();
        let mut r = rng(u64::from(1000 + 10 * p + q));
        let mut hits = 0;
        for i in 0..STARTS {
            let x0 = random_start(&chart, &mut r);
            let Ok(rep) = solve(&chart, &x0, &SolveOptions::default()) else { continue };
            if !rep.converged {
                continue;
            }
            let d = ray_distance(&chart, &rep.params, &target).unwrap_or(f64::INFINITY);
            ensure!(d < 1e-8, "M{p}{q}: converged off the ray at {:?} (distance {d:e})", rep.params);
            hits += 1;
            found.push(Found::from_chart(format!("M{p}{q} start {i}"), &chart, &rep.params)?);
        }
        ensure!(hits * 100 >= 95 * STARTS, "M{p}{q}: {hits}/{STARTS} starts reached the ray");
        summary.push(format!("M{p}{q} {hits}/{STARTS}"));
    }
    Ok(summary.join(", "))
}

fn anchor_point(found: &mut Vec<Found>) -> Outcome {
    let chart = ok(MpqEqualChart::new(ok(catalog::mpq(1, 1))?))?;
    let anchor = MpqEqualChart::anchor();
    let res = max_abs(ok(chart_residual(&chart, &anchor))?);
    ensure!(res < 1e-10, "anchor residual {res:e}");
    let at_anchor = ok(residual_polynomials_p_eq_q(anchor))?;
    ensure!(max_abs(at_anchor) < 1e-9, "polynomials at anchor {at_anchor:?}");
    // weighted degrees when (μ, a, b, c, h₁) carry weights (1, 1, 1, 1, 2)
    let degrees = [12, 14, 14, 13];
    let mut worst = 0f64;
    for t in [0.5, 1.0, 2.0] {
        let vals = ok(residual_polynomials_p_eq_q(MpqEqualChart::scaling_curve(t)))?;
        for (v, d) in vals.iter().zip(degrees) {
            worst = worst.max((v / t.powi(d)).abs());
        }
    }
    ensure!(worst < 1e-9, "scaled polynomial along the curve {worst:e}");

    // p = q solves feed the trace identity check
    let rep = ok(solve(&chart, &[3.0, 1.1, 0.9, 0.05, 1.8], &SolveOptions::default()))?;
    ensure!(rep.converged, "equal-chart solve did not converge: {rep:?}");
    let d = ray_distance(&chart, &rep.params, &anchor).unwrap_or(f64::INFINITY);
    ensure!(d < 1e-8, "equal-chart solve off the anchor ray ({d:e})");
    found.push(Found::from_chart("M11 equal chart".into(), &chart, &rep.params)?);

    let full = ok(MpqEqualFullChart::new(ok(catalog::mpq(1, 1))?))?;
    let expected = [anchor[0], anchor[1], anchor[2], anchor[3], 0.0, anchor[4], 0.0, 0.0];
    let mut r = rng(77);
    for i in 0..6 {
        let x0 = random_start(&full, &mut r);
        let Ok(rep) = solve(&full, &x0, &SolveOptions::default()) else { continue };
        if rep.converged {
            let y = gauge_normalize(&rep.params);
            ensure!(distance(&y, &expected) < 1e-7, "full chart converged off the anchor: {y:?}");
            found.push(Found::from_chart(format!("M11 full chart start {i}"), &full, &rep.params)?);
        }
    }
    Ok(format!("residual {res:.1e}, scaled polynomials {worst:.1e}"))
}

fn differential_matrix() -> Outcome {
    let s2 = 2f64.sqrt();
    let expected = [
        [128.0 * s2, 0.0, 0.0, 0.0, -128.0],
        [0.0, 256.0, 0.0, 0.0, -64.0],
        [0.0, 0.0, 256.0, 0.0, -64.0],
        [0.0, 0.0, 0.0, -192.0, 0.0],
    ];
    let chart = ok(MpqEqualChart::new(ok(catalog::mpq(1, 1))?))?;
    let rep = ok(differential_at(&chart, &MpqEqualChart::anchor(), |x| {
        residual_polynomials_p_eq_q([x[0], x[1], x[2], x[3], x[4]]).map(|v| v.to_vec())
    }))?;
    let mut worst = 0f64;
    for (i, row) in expected.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            worst = worst.max((rep.matrix[(i, j)] - e).abs() / e.abs().max(1.0));
        }
    }
    ensure!(worst < 1e-6, "entrywise relative error {worst:e}");
    ensure!(rep.rank == 4, "rank {}", rep.rank);
    let kernel = norm(&mat_vec(&rep.matrix, &[2.0 * s2, 1.0, 1.0, 0.0, 4.0]));
    ensure!(kernel < 1e-5, "tangent image {kernel:e}");
    Ok(format!("max relative error {worst:.1e}, rank 4, |F(tangent)| {kernel:.1e}"))
}

fn component_tables() -> Outcome {
    let mut worst = 0f64;
    for (p, q) in [(2u32, 1u32), (3, 1), (3, 2), (5, 2)] {
        let mpq = ok(catalog::mpq(p, q))?;
        let mut r = rng(u64::from(2000 + 10 * p + q));
        for _ in 0..100 {
            let (mu, a, b) = common::diagonal_point(&mut r);
            let g = ok(mpq_diagonal_metric(mu, a, b))?;
            let ric = ok(ricci(mpq.space(), &g))?;
            let h2 = ok(h_squared(&g, &mpq.harmonic_torsion()))?;
            let ro = diagonal::ricci(p as f64, q as f64, mu, a, b);
            let ho = diagonal::h_squared(p as f64, q as f64, mu, a, b);
            for i in 0..5 {
                for j in 0..5 {
                    let (er, eh) = if i == j { (ro[i], ho[i]) } else { (0.0, 0.0) };
                    worst = worst.max(rel_err(ric.0[(i, j)], er)).max(rel_err(h2.0[(i, j)], eh));
                }
            }
        }
    }
    let mpq = ok(catalog::mpq(1, 1))?;
    let mut r = rng(2011);
    for _ in 0..100 {
        let (mu, a, b, c) = common::equal_point(&mut r);
        let h1 = uniform(&mut r, -2.0, 2.0);
        let g = ok(mpq_equal_metric(mu, a, b, c, 0.0))?;
        let h = mpq_equal_torsion(h1, h1, harmonic_h3(a, b, c, h1), 0.0);
        let ric = ok(ricci(mpq.space(), &g))?;
        let h2 = ok(h_squared(&g, &h))?;
        let t = equal::tables(mu, a, b, c, h1);
        let expect = |table: &[f64; 4], i: usize, j: usize| match (i.min(j), i.max(j)) {
            (0, 0) => table[0],
            (1, 1) | (2, 2) => table[1],
            (3, 3) | (4, 4) => table[2],
            (1, 3) | (2, 4) => table[3],
            _ => 0.0,
        };
        for i in 0..5 {
            for j in 0..5 {
                worst = worst
                    .max(rel_err(ric.0[(i, j)], expect(&t.ric, i, j)))
                    .max(rel_err(h2.0[(i, j)], expect(&t.h2, i, j)));
            }
        }
    }
    ensure!(worst < 1e-10, "worst relative error {worst:e}");
    Ok(format!("500 points, worst relative error {worst:.1e}"))
}

fn hodge_and_harmonicity() -> Outcome {
    let mut star_err = 0f64;
    for (p, q) in [(2u32, 1u32), (3, 1), (3, 2), (5, 2)] {
        let mpq = ok(catalog::mpq(p, q))?;
        let mut r = rng(u64::from(3000 + 10 * p + q));
        for _ in 0..100 {
            let (mu, a, b) = common::diagonal_point(&mut r);
            let (h1, h2) = (uniform(&mut r, -2.0, 2.0), uniform(&mut r, -2.0, 2.0));
            let g = ok(mpq_diagonal_metric(mu, a, b))?;
            let h = ok(AltForm::from_terms(5, 3, &[(&[0, 1, 2], h1), (&[0, 3, 4], h2)]))?;
            let star = ok(hodge_star(mpq.space(), &g, &h))?;
            let (c23, c45) = diagonal::star(mu, a, b, h1, h2);
            let expected = ok(AltForm::from_terms(5, 2, &[(&[1, 2], c23), (&[3, 4], c45)]))?;
            star_err = star_err.max(ok(star.sub(&expected))?.max_abs());

            let lam = uniform(&mut r, -3.0, 3.0);
            let closed = ok(koszul_d(mpq.space(), &diagonal_torsion(p as f64, q as f64, lam)))?.max_abs();
            ensure!(closed < 1e-12, "M{p}{q}: proportional torsion has |dH| = {closed:e}");
            let eps = uniform(&mut r, 0.1, 1.0);
            let open = ok(AltForm::from_terms(
                5,
                3,
                &[(&[0, 1, 2], lam * q as f64 + eps), (&[0, 3, 4], lam * p as f64)],
            ))?;
            let d_open = ok(koszul_d(mpq.space(), &open))?.max_abs();
            ensure!(d_open > 1e-3, "M{p}{q}: non-proportional torsion looks closed ({d_open:e})");
        }
    }
    ensure!(star_err < 1e-12, "*H error {star_err:e}");

    let mpq = ok(catalog::mpq(1, 1))?;
    let mut r = rng(3011);
    let mut worst_harmonic = 0f64;
    for _ in 0..100 {
        let (mu, a, b, c) = common::equal_point(&mut r);
        let h1 = uniform(&mut r, 0.2, 2.0) * if uniform(&mut r, 0.0, 1.0) < 0.5 { 1.0 } else { -1.0 };
        let g = ok(mpq_equal_metric(mu, a, b, c, 0.0))?;
        let h3 = c * h1 * (a * a + b * b) / (a * a * b * b + c * c);
        let delta = |h3: f64, h4: f64| -> Result<f64, String> {
            Ok(ok(codifferential(mpq.space(), &g, &mpq_equal_torsion(h1, h1, h3, h4)))?.max_abs())
        };
        let on = delta(h3, 0.0)?;
        worst_harmonic = worst_harmonic.max(on);
        ensure!(on < 1e-10, "harmonic coefficients give |δH| = {on:e}");
        let eps = uniform(&mut r, 0.1, 1.0);
        let (off3, off4) = (delta(h3 + eps, 0.0)?, delta(h3, eps)?);
        ensure!(off3 > 1e-4 && off4 > 1e-4, "perturbed coefficients look coclosed ({off3:e}, {off4:e})");
    }
    Ok(format!("*H error {star_err:.1e}, worst harmonic |δH| {worst_harmonic:.1e}"))
}

fn exterior_calculus() -> Outcome {
    let mut worst = [0f64; 3];
    let spaces = [(ok(catalog::mpq(2, 1))?, false), (ok(catalog::mpq(1, 1))?, true)];
    let mut r = rng(4000);
    for round in 0..100 {
        let (mpq, equal) = &spaces[round % 2];
        let space = mpq.space();
        let n = space.m_dim();
        let g = if *equal {
            let (mu, a, b, c) = common::equal_point(&mut r);
            let s = uniform(&mut r, -0.3, 0.3) * a * b;
            ok(mpq_equal_metric(mu, a, b, c * 0.7, s))?
        } else {
            let (mu, a, b) = common::diagonal_point(&mut r);
            ok(mpq_diagonal_metric(mu, a, b))?
        };
        let k = 1 + round / 2 % n;
        let random_form = |r: &mut ChaCha8Rng, degree: usize| -> Result<AltForm, String> {
            let mut out = ok(AltForm::zero(n, degree))?;
            for b in ok(invariant_form_basis(space, degree))? {
                out = ok(out.add(&b.scale(uniform(r, -2.0, 2.0))))?;
            }
            Ok(out)
        };
        let alpha = random_form(&mut r, k)?;
        let beta = random_form(&mut r, k - 1)?;
        if k + 2 <= n {
            let dd = ok(koszul_d(space, &ok(koszul_d(space, &alpha))?))?.max_abs();
            worst[0] = worst[0].max(dd);
        }
        let lhs = ok(form_inner(&g, &ok(koszul_d(space, &beta))?, &alpha))?;
        let rhs = ok(form_inner(&g, &beta, &ok(codifferential(space, &g, &alpha))?))?;
        worst[1] = worst[1].max((lhs - rhs).abs() / (1.0 + lhs.abs()));
        let ss = ok(hodge_star(space, &g, &ok(hodge_star(space, &g, &alpha))?))?;
        let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
        worst[2] = worst[2].max(ok(ss.sub(&alpha.scale(sign)))?.max_abs() / (1.0 + alpha.max_abs()));
    }
    ensure!(worst.iter().all(|&w| w < 1e-10), "defects (d∘d, adjointness, **) = {worst:?}");
    Ok(format!("d∘d {:.1e}, adjointness {:.1e}, ** {:.1e}", worst[0], worst[1], worst[2]))
}

fn flat_versus_non_flat() -> Outcome {
    let model = ok(bi_invariant_group(&catalog::su2(), 1.0))?;
    let lam = ok(bismut_nomizu(&model.space, &model.metric, &model.torsion))?;
    let flat = ok(curvature_tensor(&model.space, &lam))?.max_abs();
    ensure!(flat < 1e-12, "su(2) Bismut curvature {flat:e}");
    let res = ok(brf_residual(&model.space, &model.metric, &model.torsion))?.max_norm();
    ensure!(res < 1e-12, "su(2) BRF residual {res:e}");

    let mut report = vec![format!("su2 |R| {flat:.1e}")];
    for (p, q) in [(2u32, 1u32), (1, 1)] {
        let mpq = ok(catalog::mpq(p, q))?;
        let (g, h) = ok(mpq.brf_pair(1.0))?;
        let res = ok(brf_residual(mpq.space(), &g, &h))?.max_norm();
        ensure!(res < 1e-10, "M{p}{q} pair residual {res:e}");
        let bismut = ok(curvature_tensor(mpq.space(), &ok(bismut_nomizu(mpq.space(), &g, &h))?))?.max_abs();
        ensure!(bismut > 1e-3, "M{p}{q} Bismut curvature only {bismut:e}");
        let lc = ok(curvature_tensor(mpq.space(), &ok(levi_civita_nomizu(mpq.space(), &g))?))?;
        let ric = ok(ricci(mpq.space(), &g))?;
        let gap = (lc.ricci_contraction().0 - ric.0).abs().max();
        ensure!(gap < 1e-9, "M{p}{q} Ricci contraction gap {gap:e}");
        report.push(format!("M{p}{q} |R^B| {bismut:.3}"));
    }
    Ok(report.join(", "))
}

fn fixed_point_stability() -> Outcome {
    let mut worst_rhs = 0f64;
    let mut worst_eig = 0f64;
    for (p, q, lambda) in [(2u32, 1u32, 1.0), (3, 2, 0.5)] {
        let (pf, qf) = (p as f64, q as f64);
        let fp = fixed_point_mpq(pf, qf, lambda);
        let s = pf * pf + qf * qf;
        let expected = [2.0 * lambda * s, lambda * qf * qf / s, lambda * pf * pf / s];
        ensure!(distance(&fp, &expected) < 1e-14, "fixed point {fp:?} vs {expected:?}");
        let rhs = ok(mpq_ode_rhs(fp[0], fp[1], fp[2], pf, qf, lambda))?;
        worst_rhs = worst_rhs.max(max_abs(rhs));

        let report = ok(jacobian_eigen(&ok(MpqOde::new(p, q, lambda))?, &fp))?;
        let mut want = vec![-s * s / (lambda * pf * pf * qf * qf), -s / (lambda * qf * qf), -s / (lambda * pf * pf)];
        want.sort_by(f64::total_cmp);
        let mut got: Vec<(f64, f64)> = report.eigenvalues.clone();
        got.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (g, w) in got.iter().zip(&want) {
            worst_eig = worst_eig.max((g.0 - w).abs()).max(g.1.abs());
        }
        let closed = mpq_fixed_point_eigenvalues(pf, qf, lambda);
        let mut closed = closed.to_vec();
        closed.sort_by(f64::total_cmp);
        ensure!(distance(&closed, &want) < 1e-12, "closed-form eigenvalues {closed:?} vs {want:?}");
    }
    ensure!(worst_rhs < 1e-14, "rhs at fixed point {worst_rhs:e}");
    ensure!(worst_eig < 1e-8, "eigenvalue error {worst_eig:e}");
    Ok(format!("rhs {worst_rhs:.1e}, eigenvalue error {worst_eig:.1e}"))
}

fn flow_convergence() -> Outcome {
    let ode = ok(MpqOde::new(2, 1, 1.0))?;
    let fp = ode.fixed_point();
    let traj = ok(integrate(&ode, &FlowState::new(0.0, vec![1.0, 0.3, 2.0], vec![]), &IntegrateOptions::new(200.0)))?;
    let d = distance(&traj.last().metric_params, &fp);
    ensure!(d < 1e-8, "distance at t = 200 is {d:e}");
    let mut r = rng(9000);
    let mut worst = 0f64;
    for _ in 0..20 {
        let x0: Vec<f64> = (0..3).map(|_| uniform(&mut r, 0.05, 20.0)).collect();
        let traj = integrate(&ode, &FlowState::new(0.0, x0.clone(), vec![]), &IntegrateOptions::new(500.0))
            .map_err(|e| format!("from {x0:?}: {e:?}"))?;
        let d = distance(&traj.last().metric_params, &fp);
        ensure!(d < 1e-6, "from {x0:?} distance {d:e} at t = 500");
        worst = worst.max(d);
    }
    Ok(format!("main trajectory {d:.1e}, 20 random starts worst {worst:.1e}"))
}

fn cross_validation() -> Outcome {
    let mut worst = 0f64;
    for (p, q) in [(2u32, 1u32), (3, 1), (3, 2)] {
        let mpq = ok(catalog::mpq(p, q))?;
        let mut r = rng(u64::from(5000 + 10 * p + q));
        for _ in 0..100 {
            let lambda = uniform(&mut r, 0.2, 3.0);
            let field = ok(GrfField::mpq(&mpq, lambda))?;
            let (m, a, b) = (uniform(&mut r, 0.1, 20.0), uniform(&mut r, 0.05, 5.0), uniform(&mut r, 0.05, 5.0));
            let mut y = vec![m, a, b];
            y.extend((0..field.b_dim()).map(|_| uniform(&mut r, -1.0, 1.0)));
            let generic = ok(field.eval(&y))?;
            let closed = ok(mpq_ode_rhs(m, a, b, p as f64, q as f64, lambda))?;
            for i in 0..3 {
                worst = worst.max(rel_err(generic[i], closed[i]));
            }
        }
    }
    ensure!(worst < 1e-10, "closed form vs generic field {worst:e}");

    let mut drift = 0f64;
    for (p, q) in [(2u32, 1u32), (3, 2)] {
        let mpq = ok(catalog::mpq(p, q))?;
        let field = ok(GrfField::mpq(&mpq, 1.0))?;
        let mut r = rng(u64::from(6000 + 10 * p + q));
        for _ in 0..3 {
            let b0: Vec<f64> = (0..field.b_dim()).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
            let x0: Vec<f64> = (0..3).map(|_| uniform(&mut r, 0.2, 10.0)).collect();
            let opts = IntegrateOptions::new(50.0).with_uniform_samples(0.0, 25);
            let traj = ok(integrate(&field, &FlowState::new(0.0, x0, b0.clone()), &opts))?;
            for s in &traj.states {
                drift = drift.max(distance(&s.b_params, &b0));
            }
        }
    }
    ensure!(drift < 1e-12, "b drift {drift:e}");
    Ok(format!("300 points, worst relative error {worst:.1e}, b drift {drift:.1e}"))
}

fn kobayashi() -> Outcome {
    let mut worst = 0f64;
    for (lambda, mu) in [(1.0, 2.0), (3.0, 0.5)] {
        let data = kobayashi_synthetic(lambda, mu);
        let sol = ok(kobayashi_check(&data))?;
        let (c2, h2) = (sol.c * sol.c, sol.h * sol.h);
        let e1 = (4.0 * c2 * c2 - lambda * h2).abs();
        let e2 = (4.0 * c2 - h2 / mu).abs();
        worst = worst.max(e1).max(e2);
        ensure!(e1 < 1e-12 && e2 < 1e-12, "(λ,μ) = ({lambda},{mu}): defects {e1:e}, {e2:e}");
        ensure!(sol.horizontal_defect < 1e-12, "horizontal defect {:e}", sol.horizontal_defect);

        let violate = |tag: char, data: KobayashiData| -> Result<(), String> {
            match kobayashi_check(&data) {
                Err(Error::ConditionViolated { condition, .. }) if condition == tag => Ok(()),
                other => Err(format!("violation {tag}) reported as {other:?}")),
            }
        };
        let r = lambda.sqrt();
        let mut bad_a = data.clone();
        bad_a.beta = ok(AltForm::from_terms(4, 2, &[(&[0, 1], r), (&[2, 3], -r)]))?;
        violate('a', bad_a)?;
        let mut bad_b = data.clone();
        bad_b.beta = data.beta.scale(2.0);
        violate('b', bad_b)?;
        let mut bad_c = data.clone();
        bad_c.ric0 = Bilinear(&data.ric0.0 * 1.1);
        violate('c', bad_c)?;
    }
    Ok(format!("worst defect {worst:.1e}, violations a) b) c) attributed"))
}

fn trace_identity(found: &[Found]) -> Outcome {
    ensure!(!found.is_empty(), "no BRF points were found");
    let (mut worst, mut min_sigma) = (0f64, f64::INFINITY);
    for f in found {
        let scal = ok(scalar(&f.space, &f.metric))?;
        let quarter = 0.25 * ok(h_squared(&f.metric, &f.torsion))?.trace(&f.metric);
        let err = (scal - quarter).abs() / scal.abs().max(1.0);
        ensure!(err < 1e-10, "{}: Scal {scal} vs ¼ tr H² {quarter}", f.label);
        let dh = ok(koszul_d(&f.space, &f.torsion))?.max_abs();
        ensure!(dh < 1e-12, "{}: |dH| = {dh:e}", f.label);
        let sigma = ok(fundamental_four_form(&f.metric, &f.torsion))?.max_abs();
        ensure!(sigma > 1e-3, "{}: σ_H = {sigma:e}", f.label);
        worst = worst.max(err);
        min_sigma = min_sigma.min(sigma);
    }
    Ok(format!("{} points, worst error {worst:.1e}, min |σ_H| {min_sigma:.3}", found.len()))
}

fn main() -> ExitCode {
    let mut found = Vec::new();
    let mut failures = 0;
    let mut run = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL {n:>2} {name} ({secs:.1}s): {why}");
            }
        }
    };
    run(1, "BRF reproduction, p != q", &mut || brf_reproduction(&mut found));
    run(2, "p = q anchor point", &mut || anchor_point(&mut found));
    run(3, "differential matrix", &mut differential_matrix);
    run(4, "component tables", &mut component_tables);
    run(5, "Hodge star and harmonicity", &mut hodge_and_harmonicity);
    run(6, "exterior calculus identities", &mut exterior_calculus);
    run(7, "flat versus non-flat", &mut flat_versus_non_flat);
    run(8, "flow fixed point and stability", &mut fixed_point_stability);
    run(9, "flow convergence", &mut flow_convergence);
    run(10, "closed form versus generic flow", &mut cross_validation);
    run(11, "Kobayashi checker", &mut kobayashi);
    run(12, "trace identity on found points", &mut || trace_identity(&found));
    if failures == 0 {
        println!("acceptance: all 12 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
