//! Small dense helpers on top of nalgebra.

use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    Float::sqrt(dot(x, x))
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = alloc::vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Quadratic form `x^T a y`.
pub fn bilinear(a: &Mat, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows() {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..a.ncols() {
            s += x[i] * a[(i, j)] * y[j];
        }
    }
    s
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// Number of singular values above `rtol * sigma_max`.
pub fn numerical_rank(singular_values: &[f64], rtol: f64) -> usize {
    let smax = singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rtol * smax).count()
}

/// Singular values sorted in decreasing order.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Orthonormal basis of the null space of `a`: right singular vectors whose
/// singular values are at most `tol * max(1, σ_max)`.
pub fn null_space(a: &Mat, tol: f64) -> Vec<Vector> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return (0..n).map(|i| Vector::from_vec(unit(n, i))).collect();
    }
    // pad to at least n rows so that the SVD returns a full V
    let rows = a.nrows().max(n);
    let padded = Mat::from_fn(rows, n, |i, j| if i < a.nrows() { a[(i, j)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max).max(1.0);
    let mut idx: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol * smax).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
    idx.into_iter().map(|i| vt.row(i).transpose()).collect()
}

/// Least-squares solution of `a x = b` (minimum norm when rank deficient).
pub fn lstsq(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd.solve(&Vector::from_column_slice(b), 1e-14 * smax.max(f64::MIN_POSITIVE)).ok()?;
    Some(x.iter().cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let a = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0] + v[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_counts_relative_threshold() {
        assert_eq!(numerical_rank(&[10.0, 1.0, 1e-8], 1e-6), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], 1e-6), 0);
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0]);
        let x = lstsq(&a, &[1.0, 4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
