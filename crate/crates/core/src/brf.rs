//! Bismut-Ricci-flat equations over parameter charts: the stacked residual,
//! the closed-form `M_{1,1}` polynomials, a Levenberg–Marquardt solver with
//! domain backtracking, differential-rank analysis and the `τ_u` gauge.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::catalog::{self, MpqSpace};
use crate::curvature::ricci;
use crate::error::{Error, Result};
use crate::forms::{codifferential, form_norm_sq, h_squared, koszul_d, AltForm, Bilinear, Metric};
use crate::lie::ReductiveSpace;
use crate::linalg::{norm, Mat, Vector};
use crate::numdiff::{self, DifferentialReport};

/// The three blocks of the BRF system.
#[derive(Debug, Clone, PartialEq)]
pub struct BrfResidual {
    /// `Ric_g - ¼ H²`.
    pub sym: Bilinear,
    /// `dH`; `None` when `dim m < 4` so that every 4-form vanishes.
    pub dh: Option<AltForm>,
    /// `δ_g H`.
    pub delta_h: AltForm,
}

impl BrfResidual {
    /// Upper triangle of `sym` row by row, then the components of `dH`, then
    /// those of `δH`, both in lexicographic order of increasing index tuples.
    pub fn stacked(&self) -> Vec<f64> {
        let n = self.sym.0.nrows();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.sym.0[(i, j)]);
            }
        }
        if let Some(dh) = &self.dh {
            out.extend_from_slice(dh.components());
        }
        out.extend_from_slice(self.delta_h.components());
        out
    }

    /// The same tensors evaluated on a `g`-orthonormal frame.
    pub fn orthonormal(&self, g: &Metric) -> BrfResidual {
        let u = g.frame();
        BrfResidual {
            sym: Bilinear(u.transpose() * &self.sym.0 * u),
            dh: self.dh.as_ref().map(|f| f.transform(u)),
            delta_h: self.delta_h.transform(u),
        }
    }

    pub fn max_norm(&self) -> f64 {
        crate::linalg::max_abs(self.stacked())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.stacked())
    }
}

pub fn brf_residual(space: &ReductiveSpace, g: &Metric, h: &AltForm) -> Result<BrfResidual> {
    if h.degree() != 3 {
        return Err(Error::InvalidDegree(h.degree()));
    }
    let ric = ricci(space, g)?;
    let h2 = h_squared(g, h)?;
    let sym = Bilinear(ric.0 - h2.0 * 0.25);
    let dh = if h.dim() >= 4 { Some(koszul_d(space, h)?) } else { None };
    let delta_h = codifferential(space, g, h)?;
    Ok(BrfResidual { sym, dh, delta_h })
}

/// Scale-free form of the residual used as the solver's merit function.
///
/// On a `g`-orthonormal frame each entry of `Ric - ¼H²` is divided by
/// `√(dᵢdⱼ)` with `dᵢ = ¼H²(Eᵢ,Eᵢ)`, and `dH`, `δH` by the mean of the `dᵢ`;
/// directions with `H²(Eᵢ,Eᵢ) = 0` fall back to `|Ric(Eᵢ,Eᵢ)|`. The zero set
/// is unchanged, but unlike coordinate or plain orthonormal components the
/// entries neither decay nor saturate along sequences where parts of the
/// metric collapse or blow up.
pub fn relative_residual(space: &ReductiveSpace, g: &Metric, h: &AltForm) -> Result<Vec<f64>> {
    let res = brf_residual(space, g, h)?;
    let u = g.frame();
    let ric = u.transpose() * ricci(space, g)?.0 * u;
    let h2 = u.transpose() * h_squared(g, h)?.0 * u;
    let n = g.dim();
    let d: Vec<f64> = (0..n).map(|i| if h2[(i, i)] > 0.0 { 0.25 * h2[(i, i)] } else { ric[(i, i)].abs() }).collect();
    let mean = d.iter().sum::<f64>() / n.max(1) as f64;
    let fallback = if mean > 0.0 { mean } else { 1.0 };
    let d: Vec<f64> = d.into_iter().map(|v| if v > 1e-300 { v } else { fallback }).collect();
    let ortho = res.orthonormal(g);
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(ortho.sym.0[(i, j)] / (d[i] * d[j]).sqrt());
        }
    }
    if let Some(dh) = &ortho.dh {
        out.extend(dh.components().iter().map(|v| v / fallback));
    }
    out.extend(ortho.delta_h.components().iter().map(|v| v / fallback));
    Ok(out)
}

/// `{μ>0, a>0, b>0, a²b² - c² > 0, h₁ ≠ 0}`.
pub fn in_polynomial_domain(x: &[f64]) -> bool {
    x.len() == 5 && x[0] > 0.0 && x[1] > 0.0 && x[2] > 0.0 && x[1] * x[1] * x[2] * x[2] - x[3] * x[3] > 0.0 && x[4] != 0.0
}

/// The four polynomials `(p₁, p₂, p₃, p₄)` in `(μ, a, b, c, h₁)` whose common
/// zeros in the domain are the BRF pairs of the `M_{1,1}` chart.
pub fn residual_polynomials_p_eq_q(x: [f64; 5]) -> Result<[f64; 4]> {
    if !in_polynomial_domain(&x) {
        return Err(Error::OutOfDomain(format!("{x:?}")));
    }
    let [mu, a, b, c, h1] = x;
    let (a2, b2, c2, mu2, h2) = (a * a, b * b, c * c, mu * mu, h1 * h1);
    let (a4, b4, mu4) = (a2 * a2, b2 * b2, mu2 * mu2);
    let (a6, b6) = (a4 * a2, b4 * b2);
    let ab2 = a2 * b2;
    let plus = ab2 + c2;
    let minus = ab2 - c2;
    let p1 = (a4 + b4 - 2.0 * c2) * (mu4 * plus - 16.0 * h2 * minus) - 128.0 * c2 * (a4 * b4 - c2 * c2);
    let p2 = plus * plus * (16.0 * mu2 * minus + 64.0 * a2 * c2 - b2 * mu4)
        - 16.0 * h2 * (a4 * b6 + c2 * (a6 + a2 * b4 - 2.0 * a2 * c2 - b2 * c2));
    let p3 = plus * plus * (16.0 * mu2 * minus + 64.0 * b2 * c2 - a2 * mu4)
        - 16.0 * h2 * (a6 * b4 + c2 * (b6 + a4 * b2 - 2.0 * b2 * c2 - a2 * c2));
    let p4 = c * (plus * plus * (64.0 * ab2 - mu4) - 16.0 * h2 * (ab2 * (a2 + b2) * (a2 + b2) - plus * plus));
    Ok([p1, p2, p3, p4])
}

/// A parametrization of invariant (metric, closed 3-form) pairs.
pub trait Chart: Sync {
    fn space(&self) -> &ReductiveSpace;
    fn param_names(&self) -> &[&'static str];
    fn dim(&self) -> usize {
        self.param_names().len()
    }
    fn in_domain(&self, x: &[f64]) -> bool;
    fn eval(&self, x: &[f64]) -> Result<(Metric, AltForm)>;
    /// Parameters of `(t² g, t² H)`.
    fn rescale(&self, x: &[f64], t: f64) -> Vec<f64>;
    /// Parameters of `(g, -H)`.
    fn flip_torsion(&self, x: &[f64]) -> Vec<f64>;
    /// Index of the torsion coefficient fixed by [`Chart::canonical`] and the
    /// value it is normalized to.
    fn normalization(&self) -> (usize, f64);
    /// A sampling box for random initial points.
    fn sample_box(&self) -> Vec<(f64, f64)>;
    /// Indices of parameters constrained to be positive; the solver works
    /// with their logarithms.
    fn positive(&self) -> Vec<usize> {
        Vec::new()
    }

    /// Representative of the ray `R⁺(g, ±H)` with the normalized torsion
    /// coefficient positive and equal to its canonical value.
    fn canonical(&self, x: &[f64]) -> Vec<f64> {
        let (i, target) = self.normalization();
        let y = if x[i] < 0.0 { self.flip_torsion(x) } else { x.to_vec() };
        if y[i] == 0.0 {
            return y;
        }
        self.rescale(&y, (target / y[i]).sqrt())
    }
}

fn check_len(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    Ok(())
}

/// `(μ, a, b, h₁) ↦ (μ²e¹e¹ + a²(e²e²+e³e³) + b²(e⁴e⁴+e⁵e⁵), h₁(q e¹²³ + p e¹⁴⁵))`.
#[derive(Debug, Clone)]
pub struct MpqDiagonalChart {
    mpq: MpqSpace,
}

impl MpqDiagonalChart {
    pub fn new(mpq: MpqSpace) -> Self {
        MpqDiagonalChart { mpq }
    }

    pub fn mpq(&self) -> &MpqSpace {
        &self.mpq
    }

    /// `(√(2(p²+q²)), q/√(p²+q²), p/√(p²+q²), 1)`.
    pub fn brf_point(&self) -> Vec<f64> {
        let (p, q, s) = (self.mpq.p() as f64, self.mpq.q() as f64, self.mpq.s());
        vec![(2.0 * s).sqrt(), q / s.sqrt(), p / s.sqrt(), 1.0]
    }
}

impl Chart for MpqDiagonalChart {
    fn space(&self) -> &ReductiveSpace {
        self.mpq.space()
    }

    fn param_names(&self) -> &[&'static str] {
        &["mu", "a", "b", "h1"]
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == 4 && x[0] > 0.0 && x[1] > 0.0 && x[2] > 0.0 && x[3] != 0.0 && x.iter().all(|v| v.is_finite())
    }

    fn eval(&self, x: &[f64]) -> Result<(Metric, AltForm)> {
        check_len(x, 4)?;
        if !self.in_domain(x) {
            return Err(Error::OutOfDomain(format!("{x:?}")));
        }
        let g = catalog::mpq_diagonal_metric(x[0], x[1], x[2])?;
        let h = catalog::diagonal_torsion(self.mpq.p() as f64, self.mpq.q() as f64, x[3]);
        Ok((g, h))
    }

    fn rescale(&self, x: &[f64], t: f64) -> Vec<f64> {
        vec![x[0] * t, x[1] * t, x[2] * t, x[3] * t * t]
    }

    fn flip_torsion(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0], x[1], x[2], -x[3]]
    }

    fn normalization(&self) -> (usize, f64) {
        (3, 1.0)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(0.3, 6.0), (0.2, 3.0), (0.2, 3.0), (0.2, 3.0)]
    }

    fn positive(&self) -> Vec<usize> {
        vec![0, 1, 2]
    }
}

/// `M_{1,1}` with `s = 0`: `(μ, a, b, c, h₁)` with the metric
/// `μ²e¹e¹ + a²(e²e²+e³e³) + b²(e⁴e⁴+e⁵e⁵) + 2c(e²⊙e⁴ + e³⊙e⁵)` and the
/// harmonic form `h₁(e¹²³ + e¹⁴⁵) + h₃(e¹²⁵ - e¹³⁴)`, `h₃ = c h₁(a²+b²)/(a²b²+c²)`.
#[derive(Debug, Clone)]
pub struct MpqEqualChart {
    mpq: MpqSpace,
}

fn require_equal(mpq: &MpqSpace) -> Result<()> {
    if mpq.p() != mpq.q() {
        return Err(Error::InvalidInput(format!(
            "the off-diagonal chart needs p = q (got p = {}, q = {})",
            mpq.p(),
            mpq.q()
        )));
    }
    Ok(())
}

impl MpqEqualChart {
    pub fn new(mpq: MpqSpace) -> Result<Self> {
        require_equal(&mpq)?;
        Ok(MpqEqualChart { mpq })
    }

    /// `x_o = (2√2, 1, 1, 0, 2)`.
    pub fn anchor() -> [f64; 5] {
        [2.0 * 2f64.sqrt(), 1.0, 1.0, 0.0, 2.0]
    }

    /// `γ(t) = (2√2 t, t, t, 0, 2t²)`.
    pub fn scaling_curve(t: f64) -> [f64; 5] {
        [2.0 * 2f64.sqrt() * t, t, t, 0.0, 2.0 * t * t]
    }
}

impl Chart for MpqEqualChart {
    fn space(&self) -> &ReductiveSpace {
        self.mpq.space()
    }

    fn param_names(&self) -> &[&'static str] {
        &["mu", "a", "b", "c", "h1"]
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite()) && in_polynomial_domain(x)
    }

    fn eval(&self, x: &[f64]) -> Result<(Metric, AltForm)> {
        check_len(x, 5)?;
        if !self.in_domain(x) {
            return Err(Error::OutOfDomain(format!("{x:?}")));
        }
        let g = catalog::mpq_equal_metric(x[0], x[1], x[2], x[3], 0.0)?;
        let h3 = catalog::harmonic_h3(x[1], x[2], x[3], x[4]);
        Ok((g, catalog::mpq_equal_torsion(x[4], x[4], h3, 0.0)))
    }

    fn rescale(&self, x: &[f64], t: f64) -> Vec<f64> {
        vec![x[0] * t, x[1] * t, x[2] * t, x[3] * t * t, x[4] * t * t]
    }

    fn flip_torsion(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0], x[1], x[2], x[3], -x[4]]
    }

    fn normalization(&self) -> (usize, f64) {
        (4, 2.0)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(0.5, 6.0), (0.3, 3.0), (0.3, 3.0), (-1.0, 1.0), (0.3, 4.0)]
    }

    fn positive(&self) -> Vec<usize> {
        vec![0, 1, 2]
    }
}

/// `M_{1,1}` with every invariant metric and every closed invariant 3-form:
/// `(μ, a, b, c, s, h₁, h₃, h₄)`, metric as in [`catalog::mpq_equal_metric`]
/// and torsion `h₁(e¹²³ + e¹⁴⁵) + h₃(e¹²⁵ - e¹³⁴) + h₄(e¹²⁴ + e¹³⁵)`.
/// Coclosedness is left to the residual.
#[derive(Debug, Clone)]
pub struct MpqEqualFullChart {
    mpq: MpqSpace,
}

impl MpqEqualFullChart {
    pub fn new(mpq: MpqSpace) -> Result<Self> {
        require_equal(&mpq)?;
        Ok(MpqEqualFullChart { mpq })
    }

    /// Pulls `(g, H)` back by `τ_u`, `u = exp(t e₁)`.
    pub fn pull_back(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let (g, h) = self.eval(x)?;
        let a = tau(self.mpq.space(), t);
        let g2 = a.transpose() * g.matrix() * &a;
        let h2 = h.transform(&a);
        Ok(vec![
            g2[(0, 0)].sqrt(),
            g2[(1, 1)].sqrt(),
            g2[(3, 3)].sqrt(),
            g2[(1, 3)],
            g2[(1, 4)],
            h2.get(&[0, 1, 2]),
            h2.get(&[0, 1, 4]),
            h2.get(&[0, 1, 3]),
        ])
    }
}

impl Chart for MpqEqualFullChart {
    fn space(&self) -> &ReductiveSpace {
        self.mpq.space()
    }

    fn param_names(&self) -> &[&'static str] {
        &["mu", "a", "b", "c", "s", "h1", "h3", "h4"]
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == 8
            && x.iter().all(|v| v.is_finite())
            && x[0] > 0.0
            && x[1] > 0.0
            && x[2] > 0.0
            && x[1] * x[1] * x[2] * x[2] - x[3] * x[3] - x[4] * x[4] > 0.0
            && x[5] != 0.0
    }

    fn eval(&self, x: &[f64]) -> Result<(Metric, AltForm)> {
        check_len(x, 8)?;
        if !self.in_domain(x) {
            return Err(Error::OutOfDomain(format!("{x:?}")));
        }
        let g = catalog::mpq_equal_metric(x[0], x[1], x[2], x[3], x[4])?;
        Ok((g, catalog::mpq_equal_torsion(x[5], x[5], x[6], x[7])))
    }

    fn rescale(&self, x: &[f64], t: f64) -> Vec<f64> {
        let t2 = t * t;
        vec![x[0] * t, x[1] * t, x[2] * t, x[3] * t2, x[4] * t2, x[5] * t2, x[6] * t2, x[7] * t2]
    }

    fn flip_torsion(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for v in &mut y[5..] {
            *v = -*v;
        }
        y
    }

    fn normalization(&self) -> (usize, f64) {
        (5, 2.0)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(0.5, 6.0), (0.3, 3.0), (0.3, 3.0), (-0.6, 0.6), (-0.6, 0.6), (0.3, 4.0), (-1.0, 1.0), (-1.0, 1.0)]
    }

    fn positive(&self) -> Vec<usize> {
        vec![0, 1, 2]
    }

    fn canonical(&self, x: &[f64]) -> Vec<f64> {
        let y = gauge_normalize(x);
        let (i, target) = self.normalization();
        let y = if y[i] < 0.0 { self.flip_torsion(&y) } else { y };
        self.rescale(&y, (target / y[i]).sqrt())
    }
}

/// `exp(t ad(e₁))` restricted to `m`.
fn tau(space: &ReductiveSpace, t: f64) -> Mat {
    let n = space.m_dim();
    let d = Mat::from_fn(n, n, |l, j| space.mb(0, j, l)) * t;
    // scaling and squaring with a Taylor polynomial
    let norm = d.abs().max();
    let mut squarings = 0;
    let mut scaled = d.clone();
    let mut s = 1.0;
    while norm / s > 0.25 {
        s *= 2.0;
        squarings += 1;
    }
    scaled /= s;
    let mut term = Mat::identity(n, n);
    let mut out = Mat::identity(n, n);
    for k in 1..20 {
        term = &term * &scaled / k as f64;
        out += &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

/// Rotates the `τ_u` orbit of an `M_{1,1}` parameter string to `s = 0`:
/// `(μ,a,b,c,s,…) ↦ (μ,a,b,√(c²+s²),0,…)`. Trailing torsion coefficients
/// `(h₁, h₃, h₄)`, when present, are rotated along.
pub fn gauge_normalize(x: &[f64]) -> Vec<f64> {
    if x.len() < 5 || x[4] == 0.0 {
        return x.to_vec();
    }
    let (c, s) = (x[3], x[4]);
    let r = (c * c + s * s).sqrt();
    // pulling back by u = exp(t e₁) rotates (c, s) by the angle 2t
    let phi = Float::atan2(-s, c);
    let (sin, cos) = (phi.sin(), phi.cos());
    let mut y = x.to_vec();
    y[3] = r;
    y[4] = 0.0;
    if x.len() >= 8 {
        let (h3, h4) = (x[6], x[7]);
        y[6] = h3 * cos + h4 * sin;
        y[7] = -h3 * sin + h4 * cos;
    }
    y
}

/// Angle `t` with `τ_u^*`, `u = exp(t e₁)`, realizing [`gauge_normalize`].
pub fn gauge_angle(c: f64, s: f64) -> f64 {
    0.5 * Float::atan2(-s, c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    /// Plain least squares; the scaling direction stays free.
    Free,
    /// Adds `‖H‖²_g - target` to the residual; `None` pins the value at the
    /// initial point.
    PinNormH2(Option<f64>),
    /// Move the initial point along its ray to the canonical representative
    /// and keep the chart's normalization coordinate fixed.
    FixNormalization,
}

/// The residual minimized by [`solve`]. All three vanish at the same points;
/// convergence is always also checked on the coordinate residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Merit {
    Coordinate,
    Orthonormal,
    /// See [`relative_residual`].
    Relative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Threshold on the Euclidean norm of the stacked residual.
    pub tol: f64,
    pub max_iter: usize,
    pub gauge: Gauge,
    pub merit: Merit,
    /// Report the canonical ray representative (see [`Chart::canonical`]).
    pub canonicalize: bool,
    pub initial_damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 200, gauge: Gauge::FixNormalization, merit: Merit::Relative, canonicalize: true, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Rank of the Jacobian of the stacked residual at `params`.
    pub jacobian_rank: usize,
    pub singular_values: Vec<f64>,
}

/// Stacked BRF residual of a chart point.
pub fn chart_residual(chart: &dyn Chart, x: &[f64]) -> Result<Vec<f64>> {
    let (g, h) = chart.eval(x)?;
    Ok(brf_residual(chart.space(), &g, &h)?.stacked())
}

/// Stacked residual on a `g`-orthonormal frame.
pub fn chart_residual_orthonormal(chart: &dyn Chart, x: &[f64]) -> Result<Vec<f64>> {
    let (g, h) = chart.eval(x)?;
    Ok(brf_residual(chart.space(), &g, &h)?.orthonormal(&g).stacked())
}

fn norm_h2(chart: &dyn Chart, x: &[f64]) -> Result<f64> {
    let (g, h) = chart.eval(x)?;
    form_norm_sq(&g, &h)
}

fn residual_jacobian(f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, in_domain: &dyn Fn(&[f64]) -> bool, x: &[f64]) -> Result<Mat> {
    let mut step = numdiff::STEP;
    loop {
        match numdiff::jacobian(f, x, in_domain, step) {
            Err(Error::OutOfDomain(_)) if step > 1e-12 => step *= 1e-2,
            other => return other,
        }
    }
}

/// Bound on the logarithm of a positive parameter during the solve.
const LOG_BOUND: f64 = 12.0;

/// Levenberg–Marquardt on the merit residual (plus the gauge term), with
/// Marquardt diagonal scaling and step halving whenever a trial point leaves
/// the chart domain.
pub fn solve(chart: &dyn Chart, initial: &[f64], options: &SolveOptions) -> Result<SolveReport> {
    check_len(initial, chart.dim())?;
    if !chart.in_domain(initial) {
        return Err(Error::OutOfDomain(format!("initial point {initial:?}")));
    }
    let fixed = match options.gauge {
        Gauge::FixNormalization => Some(chart.normalization()),
        _ => None,
    };
    let target = match options.gauge {
        Gauge::PinNormH2(Some(v)) => Some(v),
        Gauge::PinNormH2(None) => Some(norm_h2(chart, initial)?),
        _ => None,
    };
    let positive = chart.positive();
    let free: Vec<(usize, bool)> = (0..chart.dim())
        .filter(|&i| fixed.map_or(true, |(k, _)| k != i))
        .map(|i| (i, positive.contains(&i)))
        .collect();
    let embed = |y: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; chart.dim()];
        if let Some((i, t)) = fixed {
            x[i] = t;
        }
        for (&(i, log), v) in free.iter().zip(y) {
            x[i] = if log { v.exp() } else { *v };
        }
        x
    };
    let reduce = |x: &[f64]| -> Vec<f64> { free.iter().map(|&(i, log)| if log { x[i].ln() } else { x[i] }).collect() };
    let full = |y: &[f64]| -> Result<Vec<f64>> {
        let x = embed(y);
        let mut r = match options.merit {
            Merit::Coordinate => chart_residual(chart, &x)?,
            Merit::Orthonormal => chart_residual_orthonormal(chart, &x)?,
            Merit::Relative => {
                let (g, h) = chart.eval(&x)?;
                relative_residual(chart.space(), &g, &h)?
            }
        };
        if let Some(t) = target {
            r.push(norm_h2(chart, &x)? - t);
        }
        Ok(r)
    };
    let in_domain = |y: &[f64]| {
        free.iter().zip(y).all(|(&(_, log), v)| !log || v.abs() <= LOG_BOUND) && chart.in_domain(&embed(y))
    };
    let brf_norm = |r: &[f64]| if target.is_some() { norm(&r[..r.len() - 1]) } else { norm(r) };
    let done = |y: &[f64], r: &[f64]| {
        brf_norm(r) < options.tol && chart_residual(chart, &embed(y)).map(|c| norm(&c) < options.tol).unwrap_or(false)
    };

    let mut y = reduce(&if fixed.is_some() { chart.canonical(initial) } else { initial.to_vec() });
    if !in_domain(&y) {
        return Err(Error::OutOfDomain(format!("normalized initial point {:?}", embed(&y))));
    }
    let mut r = full(&y)?;
    let mut cost = norm(&r);
    let mut lambda = options.initial_damping;
    let mut iterations = 0;
    let mut converged = done(&y, &r);
    while !converged {
        if iterations >= options.max_iter {
            return Err(Error::MaxIterations { iterations, residual: brf_norm(&r), params: embed(&y) });
        }
        iterations += 1;
        let j = residual_jacobian(&full, &in_domain, &y)?;
        let jt = j.transpose();
        let jtj = &jt * &j;
        let grad = &jt * Vector::from_column_slice(&r);
        let diag: Vec<f64> = (0..y.len()).map(|i| jtj[(i, i)].max(1e-12)).collect();
        let mut accepted = false;
        while !accepted {
            let mut a = jtj.clone();
            for (i, d) in diag.iter().enumerate() {
                a[(i, i)] += lambda * d;
            }
            let delta = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None if lambda < 1e16 => {
                    lambda *= 10.0;
                    continue;
                }
                None => return finish(chart, embed(&y), iterations, false, options),
            };
            let mut step: Vec<f64> = delta.iter().cloned().collect();
            let mut trial: Vec<f64> = y.iter().zip(&step).map(|(a, b)| a + b).collect();
            let mut halvings = 0;
            while !in_domain(&trial) && halvings < 40 {
                for v in &mut step {
                    *v *= 0.5;
                }
                trial = y.iter().zip(&step).map(|(a, b)| a + b).collect();
                halvings += 1;
            }
            if !in_domain(&trial) {
                return Err(Error::LeftDomain { residual: brf_norm(&r), params: embed(&y) });
            }
            let (rt, ct) = match full(&trial) {
                Ok(rt) => {
                    let ct = norm(&rt);
                    (rt, ct)
                }
                Err(_) => (Vec::new(), f64::INFINITY),
            };
            if ct < cost {
                y = trial;
                r = rt;
                cost = ct;
                lambda = (lambda * 0.3).max(1e-15);
                accepted = true;
            } else {
                lambda *= 4.0;
                if lambda > 1e16 {
                    // no descent direction left: stalled
                    return finish(chart, embed(&y), iterations, false, options);
                }
            }
        }
        converged = done(&y, &r);
    }
    finish(chart, embed(&y), iterations, converged, options)
}

fn finish(chart: &dyn Chart, x: Vec<f64>, iterations: usize, converged: bool, options: &SolveOptions) -> Result<SolveReport> {
    let params = if options.canonicalize { chart.canonical(&x) } else { x };
    let residual_norm = norm(&chart_residual(chart, &params)?);
    let diff = differential_at(chart, &params, |y| chart_residual(chart, y))?;
    Ok(SolveReport {
        converged: converged && residual_norm < options.tol,
        params,
        residual_norm,
        iterations,
        jacobian_rank: diff.rank,
        singular_values: diff.singular_values,
    })
}

/// Central-difference differential of `map` at `params`, stencil points
/// checked against the chart domain.
pub fn differential_at<F>(chart: &dyn Chart, params: &[f64], map: F) -> Result<DifferentialReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    numdiff::differential(map, params, |y| chart.in_domain(y))
}

/// Distance between canonical representatives, `None` if either point is
/// outside the chart domain.
pub fn ray_distance(chart: &dyn Chart, x: &[f64], y: &[f64]) -> Option<f64> {
    if !chart.in_domain(x) || !chart.in_domain(y) {
        return None;
    }
    let (cx, cy) = (chart.canonical(x), chart.canonical(y));
    Some(cx.iter().zip(&cy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

pub fn describe(chart: &dyn Chart, x: &[f64]) -> String {
    let parts: Vec<String> = chart.param_names().iter().zip(x).map(|(n, v)| format!("{n}={v:.6}")).collect();
    parts.join(", ")
}
