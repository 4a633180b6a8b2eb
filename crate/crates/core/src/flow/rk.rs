//! Dormand–Prince 5(4) with PI step control, FSAL and the standard
//! fourth-order dense output.

use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Stop once `‖f(y)‖∞` drops below this.
    pub stop_tol: f64,
    pub safety: f64,
    /// Bounds on `h_new / h`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub beta: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rtol: 1e-10,
            atol: 1e-12,
            stop_tol: 1e-12,
            safety: 0.9,
            min_ratio: 0.2,
            max_ratio: 5.0,
            beta: 0.04,
            min_step: 1e-14,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RkOutcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub converged: bool,
    pub accepted: usize,
    pub rejected: usize,
    pub field_norm: f64,
}

/// Dense-output coefficients of the last accepted step.
pub struct Dense<'a> {
    t0: f64,
    h: f64,
    r: &'a [Vec<f64>; 5],
}

impl Dense<'_> {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = self.r;
        (0..r1.len()).map(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])))).collect()
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(k) {
            *o += h * c * v;
        }
    }
    out
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    Float::sqrt(v.map(|x| x * x).sum::<f64>() / n as f64)
}

enum Stage {
    Ok(Vec<f64>),
    Outside,
}

fn call<F, D>(f: &F, domain: &D, y: &[f64]) -> Result<Stage>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
{
    if !domain(y) {
        return Ok(Stage::Outside);
    }
    match f(y) {
        Ok(v) if v.iter().all(|x| x.is_finite()) => Ok(Stage::Ok(v)),
        Ok(_) | Err(Error::OutOfDomain(_)) => Ok(Stage::Outside),
        Err(e) => Err(e),
    }
}

/// Integrates `y' = f(y)` from `t0` to `t_max`. `on_step` receives every
/// accepted step as `(t_start, t_end, dense)`.
pub fn dopri5<F, D, S>(f: F, domain: D, y0: &[f64], t0: f64, t_max: f64, opts: &RkOptions, mut on_step: S) -> Result<RkOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
    S: FnMut(f64, f64, &Dense<'_>),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k1 = match call(&f, &domain, &y)? {
        Stage::Ok(v) => v,
        Stage::Outside => return Err(Error::OutOfDomain("initial state".into())),
    };
    let mut outcome = RkOutcome { t, y: y.clone(), converged: false, accepted: 0, rejected: 0, field_norm: sup(&k1) };
    if outcome.field_norm < opts.stop_tol {
        outcome.converged = true;
        return Ok(outcome);
    }
    if t_max <= t0 {
        return Ok(outcome);
    }
    let scale = |a: &[f64], b: &[f64], i: usize| opts.atol + opts.rtol * a[i].abs().max(b[i].abs());
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => initial_step(&f, &domain, &y, &k1, opts)?,
    }
    .min(t_max - t);
    let expo1 = 0.2 - opts.beta * 0.75;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut dense = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut steps = 0;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        steps += 1;
        if h < opts.min_step {
            return Err(Error::StepUnderflow { t });
        }
        // stages; any stage outside the domain halves the step
        let attempt = (|| -> Result<Option<[Vec<f64>; 6]>> {
            let s2 = axpy(&y, h, &[(A21, &k1)]);
            let Stage::Ok(k2) = call(&f, &domain, &s2)? else { return Ok(None) };
            let s3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
            let Stage::Ok(k3) = call(&f, &domain, &s3)? else { return Ok(None) };
            let s4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            let Stage::Ok(k4) = call(&f, &domain, &s4)? else { return Ok(None) };
            let s5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            let Stage::Ok(k5) = call(&f, &domain, &s5)? else { return Ok(None) };
            let s6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let Stage::Ok(k6) = call(&f, &domain, &s6)? else { return Ok(None) };
            let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let Stage::Ok(k7) = call(&f, &domain, &y1)? else { return Ok(None) };
            Ok(Some([k3, k4, k5, k6, y1, k7]))
        })()?;
        let Some([k3, k4, k5, k6, y1, k7]) = attempt else {
            outcome.rejected += 1;
            h *= 0.5;
            last_rejected = true;
            if h < opts.min_step {
                return Err(Error::DomainExit { t, state: y });
            }
            continue;
        };
        let err = rms(
            (0..n).map(|i| {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                e / scale(&y, &y1, i)
            }),
            n,
        );
        let fac11 = Float::powf(err, expo1);
        if err <= 1.0 {
            let mut fac = fac11 / Float::powf(facold, opts.beta);
            fac = (fac / opts.safety).clamp(1.0 / opts.max_ratio, 1.0 / opts.min_ratio);
            facold = err.max(1e-4);
            for i in 0..n {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                dense[0][i] = y[i];
                dense[1][i] = ydiff;
                dense[2][i] = bspl;
                dense[3][i] = ydiff - h * k7[i] - bspl;
                dense[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let t1 = if t_max - (t + h) <= 1e-14 * t_max.abs().max(1.0) { t_max } else { t + h };
            on_step(t, t1, &Dense { t0: t, h, r: &dense });
            outcome.accepted += 1;
            t = t1;
            y = y1;
            k1 = k7;
            outcome.t = t;
            outcome.y = y.clone();
            outcome.field_norm = sup(&k1);
            if outcome.field_norm < opts.stop_tol {
                outcome.converged = true;
                return Ok(outcome);
            }
            if t >= t_max {
                return Ok(outcome);
            }
            let mut hnew = h / fac;
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
            h = hnew.min(t_max - t);
        } else {
            outcome.rejected += 1;
            h /= (fac11 / opts.safety).min(1.0 / opts.min_ratio);
            last_rejected = true;
        }
    }
}

fn initial_step<F, D>(f: &F, domain: &D, y: &[f64], f0: &[f64], opts: &RkOptions) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
{
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let d0 = rms(y.iter().zip(&sk).map(|(a, s)| a / s), n);
    let d1 = rms(f0.iter().zip(&sk).map(|(a, s)| a / s), n);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let mut tries = 0;
    let f1 = loop {
        let y1 = axpy(y, h0, &[(1.0, f0)]);
        match call(f, domain, &y1)? {
            Stage::Ok(v) => break v,
            Stage::Outside if tries < 60 => {
                h0 *= 0.5;
                tries += 1;
            }
            Stage::Outside => return Ok(opts.min_step),
        }
    };
    let d2 = rms(f1.iter().zip(f0).zip(&sk).map(|((a, b), s)| (a - b) / s), n) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { Float::powf(0.01 / m, 0.2) };
    Ok((100.0 * h0).min(h1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = RkOptions { stop_tol: 0.0, ..RkOptions::default() };
        let out = dopri5(|y: &[f64]| Ok(vec![-y[0]]), |_| true, &[1.0], 0.0, 3.0, &opts, |_, _, _| {}).unwrap();
        assert_eq!(out.t, 3.0);
        assert!((out.y[0] - (-3f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_solution() {
        let opts = RkOptions { stop_tol: 0.0, rtol: 1e-12, atol: 1e-14, ..RkOptions::default() };
        let mut worst: f64 = 0.0;
        let f = |y: &[f64]| Ok(vec![y[1], -y[0]]);
        dopri5(f, |_| true, &[0.0, 1.0], 0.0, 6.0, &opts, |a, b, d| {
            for k in 0..=4 {
                let t = a + (b - a) * k as f64 / 4.0;
                let v = d.eval(t);
                worst = worst.max((v[0] - t.sin()).abs()).max((v[1] - t.cos()).abs());
            }
        })
        .unwrap();
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn domain_exit_reported() {
        // y' = -1 leaves y > 0 at t = 1
        let opts = RkOptions { stop_tol: 0.0, ..RkOptions::default() };
        let r = dopri5(|_: &[f64]| Ok(vec![-1.0]), |y| y[0] > 0.0, &[1.0], 0.0, 2.0, &opts, |_, _, _| {});
        match r {
            Err(Error::DomainExit { t, state }) => {
                assert!(t > 0.99 && t < 1.0 && state[0] > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
