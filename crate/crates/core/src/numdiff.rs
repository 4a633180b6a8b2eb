//! Central finite-difference Jacobians with singular-value rank analysis.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, singular_values, Mat};

/// Relative step: `h = STEP · max(1, |x|)`.
pub const STEP: f64 = 1e-6;
/// Singular values above `RANK_RTOL · σ_max` count towards the rank.
pub const RANK_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialReport {
    pub matrix: Mat,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Jacobian of `map` at `x` by central differences. `in_domain` is consulted
/// for every stencil point.
pub fn jacobian<F, D>(map: F, x: &[f64], in_domain: D, step: f64) -> Result<Mat>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
{
    if !in_domain(x) {
        return Err(Error::OutOfDomain(format!("base point {x:?}")));
    }
    let f0 = map(x)?;
    let (m, n) = (f0.len(), x.len());
    let mut jac = Mat::zeros(m, n);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..n {
        let h = step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        for pt in [&xp, &xm] {
            if !in_domain(pt) {
                return Err(Error::OutOfDomain(format!("stencil point {pt:?}")));
            }
        }
        let (fp, fm) = (map(&xp)?, map(&xm)?);
        // use the actual spacing so the quotient is exact in the arguments
        let width = xp[j] - xm[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / width;
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    Ok(jac)
}

/// Jacobian plus its singular values and numerical rank.
pub fn differential<F, D>(map: F, x: &[f64], in_domain: D) -> Result<DifferentialReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
{
    let matrix = jacobian(map, x, in_domain, STEP)?;
    Ok(report(matrix))
}

pub fn report(matrix: Mat) -> DifferentialReport {
    let sv = singular_values(&matrix);
    let rank = numerical_rank(&sv, RANK_RTOL);
    DifferentialReport { matrix, singular_values: sv, rank }
}
