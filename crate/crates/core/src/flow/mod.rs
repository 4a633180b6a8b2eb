//! Generalized Ricci flow on invariant data
//! `∂g/∂t = -2 Ric + ½ H²`, `∂b/∂t = -δ H`, `H = H₀ + db`,
//! the closed-form `M_{p,q}` system in `(M, A, B) = (μ², a², b²)`, its fixed
//! points and their linear stability.

pub mod rk;

use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::brf::brf_residual;
use crate::catalog::{self, MpqSpace};
use crate::curvature::ricci;
use crate::error::{Error, Result};
use crate::forms::{codifferential, form_norm_sq, h_squared, invariant_form_basis, koszul_d, AltForm, Metric};
use crate::lie::ReductiveSpace;
use crate::linalg::{lstsq, numerical_rank, singular_values, Mat};
use crate::numdiff;

pub use rk::RkOptions;

/// Geometric quantities recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Euclidean norm of the stacked BRF residual.
    pub residual_norm: f64,
    pub scal: f64,
    /// `‖H‖²` (full contraction).
    pub norm_h2: f64,
}

/// An autonomous field on `(metric parameters, b parameters)`.
pub trait VectorField: Sync {
    fn metric_dim(&self) -> usize;
    fn b_dim(&self) -> usize {
        0
    }
    fn dim(&self) -> usize {
        self.metric_dim() + self.b_dim()
    }
    fn in_domain(&self, y: &[f64]) -> bool;
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>>;
    fn diagnostics(&self, _y: &[f64]) -> Option<Diagnostics> {
        None
    }
}

fn geometry_diagnostics(space: &ReductiveSpace, g: &Metric, h: &AltForm) -> Option<Diagnostics> {
    let residual_norm = brf_residual(space, g, h).ok()?.norm();
    let scal = ricci(space, g).ok()?.trace(g);
    let norm_h2 = form_norm_sq(g, h).ok()?;
    Some(Diagnostics { residual_norm, scal, norm_h2 })
}

/// The closed-form right-hand side for `M_{p,q}` with `H = λ(q e¹²³ + p e¹⁴⁵)`.
pub fn mpq_ode_rhs(m: f64, a: f64, b: f64, p: f64, q: f64, lambda: f64) -> Result<[f64; 3]> {
    if !(m > 0.0 && a > 0.0 && b > 0.0) {
        return Err(Error::OutOfDomain(format!("need M, A, B > 0 (got {m}, {a}, {b})")));
    }
    let s = p * p + q * q;
    let s4 = 4.0 * s * s;
    let l2 = lambda * lambda;
    let dm = (p * p / (s4 * b * b) + q * q / (s4 * a * a)) * (4.0 * l2 * s * s - m * m);
    let k = l2 / m + m / s4;
    let da = q * q / a * k - 1.0;
    let db = p * p / b * k - 1.0;
    Ok([dm, da, db])
}

/// `(2λ(p²+q²), λq²/(p²+q²), λp²/(p²+q²))`.
pub fn fixed_point_mpq(p: f64, q: f64, lambda: f64) -> [f64; 3] {
    let s = p * p + q * q;
    [2.0 * lambda * s, lambda * q * q / s, lambda * p * p / s]
}

/// `-(p²+q²)²/(λp²q²)`, `-(p²+q²)/(λq²)`, `-(p²+q²)/(λp²)`.
pub fn mpq_fixed_point_eigenvalues(p: f64, q: f64, lambda: f64) -> [f64; 3] {
    let s = p * p + q * q;
    [-s * s / (lambda * p * p * q * q), -s / (lambda * q * q), -s / (lambda * p * p)]
}

/// The closed-form system on `(M, A, B)`.
#[derive(Debug, Clone)]
pub struct MpqOde {
    mpq: MpqSpace,
    lambda: f64,
}

impl MpqOde {
    pub fn new(p: u32, q: u32, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        Ok(MpqOde { mpq: catalog::mpq(p, q)?, lambda })
    }

    pub fn fixed_point(&self) -> [f64; 3] {
        fixed_point_mpq(self.mpq.p() as f64, self.mpq.q() as f64, self.lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mpq(&self) -> &MpqSpace {
        &self.mpq
    }
}

impl VectorField for MpqOde {
    fn metric_dim(&self) -> usize {
        3
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        y.len() == 3 && y.iter().all(|&v| v > 0.0 && v.is_finite())
    }

    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: y.len() });
        }
        Ok(mpq_ode_rhs(y[0], y[1], y[2], self.mpq.p() as f64, self.mpq.q() as f64, self.lambda)?.to_vec())
    }

    fn diagnostics(&self, y: &[f64]) -> Option<Diagnostics> {
        let g = catalog::mpq_diagonal_metric(Float::sqrt(y[0]), Float::sqrt(y[1]), Float::sqrt(y[2])).ok()?;
        let h = self.mpq.harmonic_torsion().scale(self.lambda);
        geometry_diagnostics(self.mpq.space(), &g, &h)
    }
}

/// The flow on a linear family of invariant metrics `g = Σ xᵢ Gᵢ` and
/// potentials `b = Σ yⱼ βⱼ`, with `H = H₀ + Σ yⱼ dβⱼ`. Both time derivatives
/// are least-squares projections onto the respective spans; they are exact
/// whenever the spans contain all invariant tensors of their type.
#[derive(Debug, Clone)]
pub struct GrfField {
    space: ReductiveSpace,
    metric_basis: Vec<Mat>,
    metric_design: Mat,
    h0: AltForm,
    b_basis: Vec<AltForm>,
    b_design: Mat,
    db: Vec<AltForm>,
}

fn design<'a>(columns: impl Iterator<Item = &'a [f64]>, rows: usize) -> Mat {
    let cols: Vec<&[f64]> = columns.collect();
    Mat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

fn full_rank(m: &Mat) -> Result<()> {
    let sv = singular_values(m);
    let rank = numerical_rank(&sv, 1e-10);
    if rank < m.ncols() {
        return Err(Error::ChartDegenerate { rank, expected: m.ncols() });
    }
    Ok(())
}

impl GrfField {
    pub fn new(space: ReductiveSpace, metric_basis: Vec<Mat>, h0: AltForm, b_basis: Vec<AltForm>) -> Result<Self> {
        let n = space.m_dim();
        if h0.degree() != 3 || h0.dim() != n {
            return Err(Error::InvalidInput(format!(
                "H0 must be a 3-form on a {n}-dimensional module (got degree {} on {})",
                h0.degree(),
                h0.dim()
            )));
        }
        for m in &metric_basis {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
        }
        for b in &b_basis {
            if b.degree() != 2 || b.dim() != n {
                return Err(Error::InvalidInput("potential basis must consist of 2-forms on m".into()));
            }
        }
        let metric_design = design(metric_basis.iter().map(|m| m.as_slice()), n * n);
        full_rank(&metric_design)?;
        let b_design = design(b_basis.iter().map(|b| b.components()), if n >= 2 { n * (n - 1) / 2 } else { 0 });
        if !b_basis.is_empty() {
            full_rank(&b_design)?;
        }
        let db = b_basis.iter().map(|b| koszul_d(&space, b)).collect::<Result<Vec<_>>>()?;
        Ok(GrfField { space, metric_basis, metric_design, h0, b_basis, b_design, db })
    }

    /// `M_{p,q}` with the three-parameter family `(M, A, B)` (plus `c`, `s`
    /// when `p = q`), `H₀ = λ(q e¹²³ + p e¹⁴⁵)` and all invariant 2-forms as
    /// potentials.
    pub fn mpq(mpq: &MpqSpace, lambda: f64) -> Result<Self> {
        let h0 = mpq.harmonic_torsion().scale(lambda);
        Self::mpq_with_torsion(mpq, h0)
    }

    pub fn mpq_with_torsion(mpq: &MpqSpace, h0: AltForm) -> Result<Self> {
        let b = invariant_form_basis(mpq.space(), 2)?;
        Self::new(mpq.space().clone(), mpq.metric_basis(), h0, b)
    }

    pub fn space(&self) -> &ReductiveSpace {
        &self.space
    }

    pub fn b_basis(&self) -> &[AltForm] {
        &self.b_basis
    }

    pub fn metric(&self, x: &[f64]) -> Result<Metric> {
        let n = self.space.m_dim();
        let mut g = Mat::zeros(n, n);
        for (c, m) in x.iter().zip(&self.metric_basis) {
            g += m * *c;
        }
        Metric::new(g)
    }

    pub fn torsion(&self, y: &[f64]) -> AltForm {
        let mut h = self.h0.clone();
        for (c, d) in y.iter().zip(&self.db) {
            h = h.add(&d.scale(*c)).expect("same shape");
        }
        h
    }

    fn split<'a>(&self, y: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: y.len() });
        }
        Ok(y.split_at(self.metric_dim()))
    }
}

impl VectorField for GrfField {
    fn metric_dim(&self) -> usize {
        self.metric_basis.len()
    }

    fn b_dim(&self) -> usize {
        self.b_basis.len()
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        y.len() == self.dim() && y.iter().all(|v| v.is_finite()) && self.metric(&y[..self.metric_dim()]).is_ok()
    }

    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (x, b) = self.split(y)?;
        let g = self.metric(x).map_err(|_| Error::OutOfDomain(format!("metric parameters {x:?}")))?;
        let h = self.torsion(b);
        let ric = ricci(&self.space, &g)?;
        let h2 = h_squared(&g, &h)?;
        let target = ric.0 * -2.0 + h2.0 * 0.5;
        let mut out = lstsq(&self.metric_design, target.as_slice())
            .ok_or(Error::ChartDegenerate { rank: 0, expected: self.metric_dim() })?;
        if !self.b_basis.is_empty() {
            let delta = codifferential(&self.space, &g, &h)?.scale(-1.0);
            let db = lstsq(&self.b_design, delta.components())
                .ok_or(Error::ChartDegenerate { rank: 0, expected: self.b_dim() })?;
            out.extend(db);
        }
        Ok(out)
    }

    fn diagnostics(&self, y: &[f64]) -> Option<Diagnostics> {
        let (x, b) = self.split(y).ok()?;
        let g = self.metric(x).ok()?;
        geometry_diagnostics(&self.space, &g, &self.torsion(b))
    }
}

/// `-f`, for backward-in-time integration.
pub struct Reversed<'a, F: VectorField + ?Sized>(pub &'a F);

impl<F: VectorField + ?Sized> VectorField for Reversed<'_, F> {
    fn metric_dim(&self) -> usize {
        self.0.metric_dim()
    }
    fn b_dim(&self) -> usize {
        self.0.b_dim()
    }
    fn in_domain(&self, y: &[f64]) -> bool {
        self.0.in_domain(y)
    }
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.eval(y)?.into_iter().map(|v| -v).collect())
    }
    fn diagnostics(&self, y: &[f64]) -> Option<Diagnostics> {
        self.0.diagnostics(y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub metric_params: Vec<f64>,
    pub b_params: Vec<f64>,
}

impl FlowState {
    pub fn new(t: f64, metric_params: Vec<f64>, b_params: Vec<f64>) -> Self {
        FlowState { t, metric_params, b_params }
    }

    fn joined(&self) -> Vec<f64> {
        let mut v = self.metric_params.clone();
        v.extend_from_slice(&self.b_params);
        v
    }

    fn from_joined(t: f64, y: &[f64], metric_dim: usize) -> Self {
        FlowState { t, metric_params: y[..metric_dim].to_vec(), b_params: y[metric_dim..].to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    /// Strictly increasing in `t`; the last entry is the state where the
    /// integration stopped.
    pub states: Vec<FlowState>,
    pub diagnostics: Vec<Option<Diagnostics>>,
    /// `‖f‖∞` fell below the stop tolerance.
    pub converged: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_field_norm: f64,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trajectories are never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub t_max: f64,
    /// Times (in `(t₀, t_max]`) at which dense output is recorded.
    pub sample_times: Vec<f64>,
    pub rk: RkOptions,
}

impl IntegrateOptions {
    pub fn new(t_max: f64) -> Self {
        IntegrateOptions { t_max, sample_times: Vec::new(), rk: RkOptions::default() }
    }

    /// `n` equally spaced samples ending at `t_max`.
    pub fn with_uniform_samples(mut self, t0: f64, n: usize) -> Self {
        self.sample_times = (1..=n).map(|i| t0 + (self.t_max - t0) * i as f64 / n as f64).collect();
        self
    }
}

/// Integrates the field with the embedded 5(4) pair, recording the initial
/// state, every requested sample time reached and the stopping state.
pub fn integrate(field: &dyn VectorField, initial: &FlowState, options: &IntegrateOptions) -> Result<FlowTrajectory> {
    let md = field.metric_dim();
    let y0 = initial.joined();
    if y0.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), found: y0.len() });
    }
    if !field.in_domain(&y0) {
        return Err(Error::OutOfDomain(format!("initial state {y0:?}")));
    }
    let mut samples: Vec<f64> =
        options.sample_times.iter().cloned().filter(|&t| t > initial.t && t <= options.t_max).collect();
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite sample times"));
    samples.dedup();
    let mut states = vec![initial.clone()];
    let mut next = 0;
    let outcome = rk::dopri5(
        |y| field.eval(y),
        |y| field.in_domain(y),
        &y0,
        initial.t,
        options.t_max,
        &options.rk,
        |_, t1, dense| {
            while next < samples.len() && samples[next] <= t1 {
                let ts = samples[next];
                let y = if ts == t1 { dense.eval(t1) } else { dense.eval(ts) };
                states.push(FlowState::from_joined(ts, &y, md));
                next += 1;
            }
        },
    )?;
    let last_t = states.last().map(|s| s.t).unwrap_or(initial.t);
    if outcome.t > last_t {
        states.push(FlowState::from_joined(outcome.t, &outcome.y, md));
    } else if let Some(last) = states.last_mut() {
        // the final sample coincides with the stopping time: use the step end
        if outcome.t == last.t && outcome.accepted > 0 {
            *last = FlowState::from_joined(outcome.t, &outcome.y, md);
        }
    }
    let diagnostics = states.iter().map(|s| field.diagnostics(&s.joined())).collect();
    Ok(FlowTrajectory {
        states,
        diagnostics,
        converged: outcome.converged,
        accepted_steps: outcome.accepted,
        rejected_steps: outcome.rejected,
        final_field_norm: outcome.field_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// Every eigenvalue has negative real part.
    AsymptoticallyStable,
    NotAsymptoticallyStable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub point: Vec<f64>,
    pub jacobian: Mat,
    /// `(re, im)`, sorted by real part.
    pub eigenvalues: Vec<(f64, f64)>,
    pub classification: Stability,
}

/// Central-difference Jacobian of the field at `point` and its spectrum.
pub fn jacobian_eigen(field: &dyn VectorField, point: &[f64]) -> Result<StabilityReport> {
    let jac = numdiff::jacobian(|y| field.eval(y), point, |y| field.in_domain(y), numdiff::STEP)?;
    let n = jac.nrows();
    let mut eigenvalues: Vec<(f64, f64)> = if n == 0 {
        Vec::new()
    } else {
        jac.clone().complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
    };
    eigenvalues.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal).then(a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal)));
    let classification = if !eigenvalues.is_empty() && eigenvalues.iter().all(|e| e.0 < 0.0) {
        Stability::AsymptoticallyStable
    } else {
        Stability::NotAsymptoticallyStable
    };
    Ok(StabilityReport { point: point.to_vec(), jacobian: jac, eigenvalues, classification })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        assert_eq!(fixed_point_mpq(2.0, 1.0, 1.0), [10.0, 0.2, 0.8]);
        assert_eq!(fixed_point_mpq(1.0, 1.0, 1.0), [4.0, 0.5, 0.5]);
        for v in mpq_ode_rhs(10.0, 0.2, 0.8, 2.0, 1.0, 1.0).unwrap() {
            assert!(v.abs() < 1e-14);
        }
        assert_eq!(mpq_ode_rhs(10.0, 0.7, 3.1, 2.0, 1.0, 1.0).unwrap()[0], 0.0);
        assert!(matches!(mpq_ode_rhs(0.0, 1.0, 1.0, 2.0, 1.0, 1.0), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn hand_substitution() {
        // (1,1,1; p=2,q=1,λ=1): s = 5, 4s² = 100
        let [dm, da, db] = mpq_ode_rhs(1.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        assert!((dm - (4.0 / 100.0 + 1.0 / 100.0) * 99.0).abs() < 1e-14);
        assert!((da - (1.0 + 0.01 - 1.0)).abs() < 1e-14);
        assert!((db - (4.0 * 1.01 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn generic_field_agrees_with_closed_form() {
        let mpq = catalog::mpq(2, 1).unwrap();
        let f = GrfField::mpq(&mpq, 1.3).unwrap();
        assert_eq!(f.b_dim(), 2);
        let y = [3.0, 0.4, 1.7, 0.25, -0.5];
        let v = f.eval(&y).unwrap();
        let w = mpq_ode_rhs(3.0, 0.4, 1.7, 2.0, 1.0, 1.3).unwrap();
        for i in 0..3 {
            assert!((v[i] - w[i]).abs() < 1e-12 * w[i].abs().max(1.0), "{v:?} {w:?}");
        }
        assert!(v[3].abs() < 1e-14 && v[4].abs() < 1e-14);
    }

    #[test]
    fn torus_field_vanishes() {
        let t = catalog::flat_torus(3).unwrap();
        let basis = crate::forms::invariant_symmetric_basis(&t.space);
        let f = GrfField::new(t.space.clone(), basis, t.torsion.clone(), Vec::new()).unwrap();
        let mut y = vec![0.0; f.dim()];
        // identity metric in whatever basis was produced
        let coeffs = lstsq(&f.metric_design, Mat::identity(3, 3).as_slice()).unwrap();
        y.copy_from_slice(&coeffs);
        assert!(f.eval(&y).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn starting_at_fixed_point_stops_immediately() {
        let ode = MpqOde::new(2, 1, 1.0).unwrap();
        let fp = ode.fixed_point().to_vec();
        let traj = integrate(&ode, &FlowState::new(0.0, fp.clone(), vec![]), &IntegrateOptions::new(10.0)).unwrap();
        assert!(traj.converged);
        assert!(traj.states.iter().all(|s| s.metric_params == fp));
    }

    #[test]
    fn stability_at_fixed_point() {
        let ode = MpqOde::new(2, 1, 1.0).unwrap();
        let rep = jacobian_eigen(&ode, &ode.fixed_point()).unwrap();
        let expected = [-6.25, -5.0, -1.25];
        for (e, x) in rep.eigenvalues.iter().zip(expected) {
            assert!((e.0 - x).abs() < 1e-8 && e.1 == 0.0, "{:?}", rep.eigenvalues);
        }
        assert_eq!(rep.classification, Stability::AsymptoticallyStable);
    }

    #[test]
    fn converges_to_fixed_point() {
        let ode = MpqOde::new(2, 1, 1.0).unwrap();
        let traj = integrate(&ode, &FlowState::new(0.0, vec![1.0, 0.3, 2.0], vec![]), &IntegrateOptions::new(200.0)).unwrap();
        let last = &traj.last().metric_params;
        let fp = ode.fixed_point();
        let d: f64 = last.iter().zip(fp).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(d < 1e-8, "{last:?} {traj:?}");
    }
}
