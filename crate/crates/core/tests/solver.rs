mod common;

use common::{rng, uniform};
use grf_homog_core::brf::{
    chart_residual, differential_at, gauge_normalize, ray_distance, residual_polynomials_p_eq_q, solve, Chart, Gauge,
    MpqDiagonalChart, MpqEqualChart, MpqEqualFullChart, SolveOptions,
};
use grf_homog_core::catalog;
use grf_homog_core::curvature::scalar;
use grf_homog_core::forms::{form_norm_sq, fundamental_four_form, koszul_d};
use grf_homog_core::linalg::{mat_vec, max_abs, norm};
use grf_homog_core::Error;

fn random_start(chart: &dyn Chart, r: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = chart.sample_box().iter().map(|&(lo, hi)| uniform(r, lo, hi)).collect();
        if chart.in_domain(&x) {
            return x;
        }
    }
}

fn assert_trace_identity_and_not_parallel(chart: &dyn Chart, x: &[f64]) {
    let (g, h) = chart.eval(x).unwrap();
    let space = chart.space();
    let scal = scalar(space, &g).unwrap();
    let quarter = 0.25 * form_norm_sq(&g, &h).unwrap();
    assert!((scal - quarter).abs() < 1e-10 * scal.abs().max(1.0), "{scal} vs {quarter}");
    assert!(koszul_d(space, &h).unwrap().max_abs() < 1e-12);
    assert!(fundamental_four_form(&g, &h).unwrap().max_abs() > 1e-3);
}

#[test]
fn multistart_diagonal_finds_reference_ray() {
    for (p, q) in [(2, 1), (3, 2)] {
        let chart = MpqDiagonalChart::new(catalog::mpq(p, q).unwrap());
        let mut r = rng(u64::from(p * 31 + q));
        let mut hits = 0;
        for _ in 0..10 {
            let x0 = random_start(&chart, &mut r);
            if let Ok(rep) = solve(&chart, &x0, &SolveOptions::default()) {
                if rep.converged && ray_distance(&chart, &rep.params, &chart.brf_point()).unwrap() < 1e-8 {
                    hits += 1;
                    assert_trace_identity_and_not_parallel(&chart, &rep.params);
                }
            }
        }
        assert!(hits >= 9, "({p},{q}): {hits}/10");
    }
}

#[test]
fn free_gauge_also_converges_on_the_ray() {
    let chart = MpqDiagonalChart::new(catalog::mpq(3, 1).unwrap());
    let opts = SolveOptions { gauge: Gauge::Free, ..SolveOptions::default() };
    let rep = solve(&chart, &[2.0, 0.5, 1.5, 0.7], &opts).unwrap();
    assert!(rep.converged, "{rep:?}");
    assert!(ray_distance(&chart, &rep.params, &chart.brf_point()).unwrap() < 1e-8);
}

#[test]
fn equal_chart_solver_reaches_anchor_ray() {
    let chart = MpqEqualChart::new(catalog::mpq(1, 1).unwrap()).unwrap();
    let rep = solve(&chart, &[3.0, 1.1, 0.9, 0.05, 1.8], &SolveOptions::default()).unwrap();
    assert!(rep.converged, "{rep:?}");
    let d = ray_distance(&chart, &rep.params, &MpqEqualChart::anchor()).unwrap();
    assert!(d < 1e-8, "{rep:?}");
    assert_trace_identity_and_not_parallel(&chart, &rep.params);
}

#[test]
fn full_chart_multistart_lands_on_anchor_after_gauge() {
    let chart = MpqEqualFullChart::new(catalog::mpq(1, 1).unwrap()).unwrap();
    let anchor = MpqEqualChart::anchor();
    let mut r = rng(5);
    let mut converged = 0;
    for _ in 0..6 {
        let x0 = random_start(&chart, &mut r);
        let Ok(rep) = solve(&chart, &x0, &SolveOptions::default()) else { continue };
        if !rep.converged {
            continue;
        }
        converged += 1;
        let y = gauge_normalize(&rep.params);
        let expected = [anchor[0], anchor[1], anchor[2], anchor[3], 0.0, anchor[4], 0.0, 0.0];
        for (a, b) in y.iter().zip(expected) {
            assert!((a - b).abs() < 1e-7, "{y:?}");
        }
        assert_trace_identity_and_not_parallel(&chart, &rep.params);
    }
    assert!(converged >= 4, "{converged}/6");
}

#[test]
fn anchor_polynomials_along_scaling_curve() {
    // Weighted degrees of (p1, p2, p3, p4) when (mu, a, b, c, h1) scale with weights (1, 1, 1, 1, 2).
    let degrees = [12, 14, 14, 13];
    for t in [0.5, 1.0, 2.0] {
        let x = MpqEqualChart::scaling_curve(t);
        let vals = residual_polynomials_p_eq_q(x).unwrap();
        for (v, d) in vals.iter().zip(degrees) {
            assert!((v / t.powi(d)).abs() < 1e-9, "t={t}: {vals:?}");
        }
        let chart = MpqEqualChart::new(catalog::mpq(1, 1).unwrap()).unwrap();
        assert!(max_abs(chart_residual(&chart, &x).unwrap()) < 1e-10);
    }
}

#[test]
fn anchor_differential_matches_closed_form() {
    let s2 = 2f64.sqrt();
    let expected = [
        [128.0 * s2, 0.0, 0.0, 0.0, -128.0],
        [0.0, 256.0, 0.0, 0.0, -64.0],
        [0.0, 0.0, 256.0, 0.0, -64.0],
        [0.0, 0.0, 0.0, -192.0, 0.0],
    ];
    let chart = MpqEqualChart::new(catalog::mpq(1, 1).unwrap()).unwrap();
    let rep = differential_at(&chart, &MpqEqualChart::anchor(), |x| {
        residual_polynomials_p_eq_q([x[0], x[1], x[2], x[3], x[4]]).map(|v| v.to_vec())
    })
    .unwrap();
    for (i, row) in expected.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            let got = rep.matrix[(i, j)];
            assert!((got - e).abs() <= 1e-6 * e.abs().max(1.0), "({i},{j}): {got} vs {e}");
        }
    }
    assert_eq!(rep.rank, 4);
    let tangent = [2.0 * s2, 1.0, 1.0, 0.0, 4.0];
    assert!(norm(&mat_vec(&rep.matrix, &tangent)) < 1e-5);
}

#[test]
fn solver_errors_carry_context() {
    let chart = MpqDiagonalChart::new(catalog::mpq(2, 1).unwrap());
    assert!(matches!(solve(&chart, &[-1.0, 1.0, 1.0, 1.0], &SolveOptions::default()), Err(Error::OutOfDomain(_))));
    let opts = SolveOptions { max_iter: 1, ..SolveOptions::default() };
    match solve(&chart, &[0.5, 2.0, 0.3, 3.0], &opts) {
        Err(Error::MaxIterations { iterations, params, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(params.len(), 4);
        }
        other => panic!("{other:?}"),
    }
}
