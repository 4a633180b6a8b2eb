//! Invariant tensors on `m`: metrics, bilinear forms and alternating forms,
//! with the exterior calculus of invariant forms.
//!
//! Inner products on forms use the full ordered contraction: for a `k`-form
//! `‖α‖² = Σ α(u_{i_1}, …, u_{i_k})²` over *all* ordered tuples of a
//! `g`-orthonormal frame, i.e. `k!` times the determinant normalization.
//! With this choice `tr_g H² = ‖H‖²`.

use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::lie::ReductiveSpace;
use crate::linalg::{max_abs, null_space, Mat};

/// Multilinear maps on `m` evaluated on coefficient vectors.
pub trait Multilinear {
    fn order(&self) -> usize;
    fn dim(&self) -> usize;
    fn eval(&self, args: &[&[f64]]) -> f64;
    fn is_alternating(&self) -> bool {
        false
    }
}

pub(crate) fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Increasing `k`-tuples of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binom(n, k));
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Lexicographic rank of an increasing tuple.
fn rank(tuple: &[usize], n: usize) -> usize {
    let k = tuple.len();
    let mut r = 0;
    let mut prev: isize = -1;
    for (i, &c) in tuple.iter().enumerate() {
        for j in (prev + 1) as usize..c {
            r += binom(n - 1 - j, k - 1 - i);
        }
        prev = c as isize;
    }
    r
}

/// Sorts a tuple, returning the permutation sign, or `None` on a repeat.
fn sort_with_sign(tuple: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut t = tuple.to_vec();
    let mut sign = 1.0;
    for i in 1..t.len() {
        let mut j = i;
        while j > 0 && t[j - 1] > t[j] {
            t.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if t.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((t, sign))
}

fn det(m: &Mat) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.clone().lu().determinant(),
    }
}

/// An alternating `k`-form on an `n`-dimensional space, stored by its values
/// on increasing index tuples (lexicographic order).
#[derive(Debug, Clone, PartialEq)]
pub struct AltForm {
    dim: usize,
    degree: usize,
    comps: Vec<f64>,
}

impl AltForm {
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        if degree > dim {
            return Err(Error::DegreeOverflow { degree, dim });
        }
        Ok(AltForm { dim, degree, comps: vec![0.0; binom(dim, degree)] })
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        AltForm { dim, degree: 0, comps: vec![value] }
    }

    /// Builds `Σ val · e^{idx}` from 0-based index tuples in any order;
    /// repeated indices contribute nothing.
    pub fn from_terms(dim: usize, degree: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        let mut f = Self::zero(dim, degree)?;
        for (idx, val) in terms {
            if idx.len() != degree {
                return Err(Error::InvalidDegree(idx.len()));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: bad + 1 });
            }
            if let Some((sorted, sign)) = sort_with_sign(idx) {
                f.comps[rank(&sorted, dim)] += sign * val;
            }
        }
        Ok(f)
    }

    pub fn from_components(dim: usize, degree: usize, comps: Vec<f64>) -> Result<Self> {
        if degree > dim {
            return Err(Error::DegreeOverflow { degree, dim });
        }
        if comps.len() != binom(dim, degree) {
            return Err(Error::DimensionMismatch { expected: binom(dim, degree), found: comps.len() });
        }
        Ok(AltForm { dim, degree, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Values on increasing tuples, lexicographic order.
    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    /// Value on basis vectors `e_{idx[0]}, …`, extended by antisymmetry.
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.degree);
        match sort_with_sign(idx) {
            Some((sorted, sign)) => sign * self.comps[rank(&sorted, self.dim)],
            None => 0.0,
        }
    }

    /// Nonzero `(increasing tuple, value)` pairs.
    pub fn terms(&self) -> Vec<(Vec<usize>, f64)> {
        combinations(self.dim, self.degree)
            .into_iter()
            .zip(self.comps.iter().cloned())
            .filter(|(_, v)| *v != 0.0)
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.comps.iter().cloned())
    }

    fn check_same_shape(&self, other: &AltForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::InvalidDegree(other.degree));
        }
        Ok(())
    }

    pub fn add(&self, other: &AltForm) -> Result<AltForm> {
        self.check_same_shape(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Ok(AltForm { comps, ..*self })
    }

    pub fn sub(&self, other: &AltForm) -> Result<AltForm> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> AltForm {
        AltForm { dim: self.dim, degree: self.degree, comps: self.comps.iter().map(|v| v * s).collect() }
    }

    /// Exterior product.
    pub fn wedge(&self, other: &AltForm) -> Result<AltForm> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut out = AltForm::zero(self.dim, self.degree + other.degree)?;
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                let joined: Vec<usize> = i.iter().chain(&j).cloned().collect();
                if let Some((sorted, sign)) = sort_with_sign(&joined) {
                    out.comps[rank(&sorted, self.dim)] += sign * a * b;
                }
            }
        }
        Ok(out)
    }

    /// Interior product `ı_v α = α(v, ·, …)`.
    pub fn interior(&self, v: &[f64]) -> Result<AltForm> {
        if self.degree == 0 {
            return Err(Error::InvalidDegree(0));
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let mut out = AltForm::zero(self.dim, self.degree - 1)?;
        let mut idx = vec![0; self.degree];
        for (r, j) in combinations(self.dim, self.degree - 1).into_iter().enumerate() {
            idx[1..].copy_from_slice(&j);
            let mut s = 0.0;
            for (l, &vl) in v.iter().enumerate() {
                if vl != 0.0 {
                    idx[0] = l;
                    s += vl * self.get(&idx);
                }
            }
            out.comps[r] = s;
        }
        Ok(out)
    }

    /// Values on the vectors given by the columns of `m`:
    /// `β(e_J) = α(v_{j_1}, …)` with `v_j = Σ_i m[(i, j)] e_i`.
    pub fn transform(&self, m: &Mat) -> AltForm {
        let n = self.dim;
        let k = self.degree;
        let out_dim = m.ncols();
        let terms = self.terms();
        let comps = combinations(out_dim, k)
            .into_iter()
            .map(|j| {
                terms
                    .iter()
                    .map(|(i, a)| a * det(&Mat::from_fn(k, k, |r, c| m[(i[r], j[c])])))
                    .sum()
            })
            .collect();
        debug_assert_eq!(m.nrows(), n);
        AltForm { dim: out_dim, degree: k, comps }
    }
}

impl Multilinear for AltForm {
    fn order(&self) -> usize {
        self.degree
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, args: &[&[f64]]) -> f64 {
        let k = self.degree;
        self.terms()
            .iter()
            .map(|(i, a)| a * det(&Mat::from_fn(k, k, |r, c| args[c][i[r]])))
            .sum()
    }
    fn is_alternating(&self) -> bool {
        true
    }
}

/// A positive definite symmetric matrix `g_ij` on `m`, with its Cholesky
/// factor `g = L Lᵀ` and the orthonormal frame `U = L⁻ᵀ` (columns).
#[derive(Debug, Clone)]
pub struct Metric {
    g: Mat,
    lower: Mat,
    frame: Mat,
    inverse: Mat,
}

impl Metric {
    pub fn new(g: Mat) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::DimensionMismatch { expected: g.nrows(), found: g.ncols() });
        }
        let scale = g.abs().max().max(1.0);
        let asym = (&g - g.transpose()).abs().max();
        if asym > 1e-14 * scale {
            return Err(Error::AsymmetricMetric(asym));
        }
        let g = (&g + g.transpose()) * 0.5;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMetric);
        }
        let chol = g.clone().cholesky().ok_or(Error::SingularMetric)?;
        let lower = chol.l();
        let frame = lower.clone().try_inverse().ok_or(Error::SingularMetric)?.transpose();
        let inverse = chol.inverse();
        Ok(Metric { g, lower, frame, inverse })
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::new(Mat::from_diagonal(&crate::linalg::Vector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Mat::identity(n, n)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.g
    }

    pub fn inverse(&self) -> &Mat {
        &self.inverse
    }

    /// Lower Cholesky factor `L` with `g = L Lᵀ`.
    pub fn lower(&self) -> &Mat {
        &self.lower
    }

    /// Orthonormal frame as columns; upper triangular with positive diagonal,
    /// so it is positively oriented.
    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    pub fn frame_vector(&self, i: usize) -> Vec<f64> {
        self.frame.column(i).iter().cloned().collect()
    }

    pub fn sqrt_det(&self) -> f64 {
        (0..self.dim()).map(|i| self.lower[(i, i)]).product()
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        crate::linalg::bilinear(&self.g, x, y)
    }

    pub fn scaled(&self, t: f64) -> Result<Metric> {
        Metric::new(&self.g * t)
    }
}

impl Multilinear for Metric {
    fn order(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        self.g.nrows()
    }
    fn eval(&self, args: &[&[f64]]) -> f64 {
        crate::linalg::bilinear(&self.g, args[0], args[1])
    }
}

/// A general bilinear form on `m`, `B(e_i, e_j) = matrix[(i, j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bilinear(pub Mat);

impl Bilinear {
    pub fn zeros(n: usize) -> Self {
        Bilinear(Mat::zeros(n, n))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn symmetric_part(&self) -> Bilinear {
        Bilinear((&self.0 + self.0.transpose()) * 0.5)
    }

    pub fn antisymmetric_part(&self) -> Bilinear {
        Bilinear((&self.0 - self.0.transpose()) * 0.5)
    }

    /// The bilinear form `(X, Y) ↦ ω(X, Y)` of a 2-form.
    pub fn from_two_form(omega: &AltForm) -> Result<Bilinear> {
        if omega.degree() != 2 {
            return Err(Error::InvalidDegree(omega.degree()));
        }
        let n = omega.dim();
        Ok(Bilinear(Mat::from_fn(n, n, |i, j| omega.get(&[i, j]))))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.abs().max()
    }

    /// `tr_g B = Σ g^{ij} B_ij`.
    pub fn trace(&self, g: &Metric) -> f64 {
        g.inverse().component_mul(&self.0.transpose()).sum()
    }
}

impl Multilinear for Bilinear {
    fn order(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn eval(&self, args: &[&[f64]]) -> f64 {
        crate::linalg::bilinear(&self.0, args[0], args[1])
    }
}

fn check_dim(space: &ReductiveSpace, n: usize) -> Result<()> {
    if space.m_dim() != n {
        return Err(Error::DimensionMismatch { expected: space.m_dim(), found: n });
    }
    Ok(())
}

fn check_metric(g: &Metric, alpha: &AltForm) -> Result<()> {
    if g.dim() != alpha.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: alpha.dim() });
    }
    Ok(())
}

/// Exterior differential of an invariant form:
/// `dα(X_0, …, X_k) = Σ_{i<j} (-1)^{i+j} α([X_i, X_j]_m, X_0, …, X̂_i, …, X̂_j, …, X_k)`.
pub fn koszul_d(space: &ReductiveSpace, alpha: &AltForm) -> Result<AltForm> {
    let n = alpha.dim();
    check_dim(space, n)?;
    let k = alpha.degree();
    if k >= n {
        return Err(Error::DegreeOverflow { degree: k + 1, dim: n });
    }
    let mut out = AltForm::zero(n, k + 1)?;
    if k == 0 {
        return Ok(out);
    }
    let mut args = vec![0usize; k];
    for (r, tuple) in combinations(n, k + 1).into_iter().enumerate() {
        let mut s = 0.0;
        for i in 0..=k {
            for j in (i + 1)..=k {
                let mut pos = 1;
                for (t, &x) in tuple.iter().enumerate() {
                    if t != i && t != j {
                        args[pos] = x;
                        pos += 1;
                    }
                }
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                for l in 0..n {
                    let c = space.mb(tuple[i], tuple[j], l);
                    if c != 0.0 {
                        args[0] = l;
                        s += sign * c * alpha.get(&args);
                    }
                }
            }
        }
        out.comps[r] = s;
    }
    Ok(out)
}

/// Hodge star for the volume form `± √det g · e^{1…n}` (sign from the space's
/// orientation), determined by `α ∧ *β = ⟨α, β⟩_det vol`.
pub fn hodge_star(space: &ReductiveSpace, g: &Metric, alpha: &AltForm) -> Result<AltForm> {
    let n = alpha.dim();
    check_dim(space, n)?;
    check_metric(g, alpha)?;
    let k = alpha.degree();
    let in_frame = alpha.transform(g.frame());
    let orient = space.orientation().sign();
    let mut star = AltForm::zero(n, n - k)?;
    for (r, j) in combinations(n, n - k).into_iter().enumerate() {
        let i: Vec<usize> = (0..n).filter(|x| !j.contains(x)).collect();
        let joined: Vec<usize> = i.iter().chain(&j).cloned().collect();
        let (_, sign) = sort_with_sign(&joined).expect("complementary tuples are disjoint");
        star.comps[r] = orient * sign * in_frame.get(&i);
    }
    Ok(star.transform(&g.lower().transpose()))
}

/// Formal adjoint of [`koszul_d`] for the full-contraction inner product:
/// `δ = k (-1)^{n(k+1)+1} * d *` on `k`-forms.
pub fn codifferential(space: &ReductiveSpace, g: &Metric, alpha: &AltForm) -> Result<AltForm> {
    let k = alpha.degree();
    if k == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let n = alpha.dim();
    let star = hodge_star(space, g, alpha)?;
    let d_star = koszul_d(space, &star)?;
    let sign = if (n * (k + 1) + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(hodge_star(space, g, &d_star)?.scale(sign * k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonicity {
    pub harmonic: bool,
    pub d_norm: f64,
    pub delta_norm: f64,
}

pub const HARMONIC_TOL: f64 = 1e-10;

pub fn is_harmonic(space: &ReductiveSpace, g: &Metric, alpha: &AltForm) -> Result<Harmonicity> {
    let d_norm = if alpha.degree() < alpha.dim() { Float::sqrt(form_norm_sq(g, &koszul_d(space, alpha)?)?) } else { 0.0 };
    let delta_norm = if alpha.degree() > 0 { Float::sqrt(form_norm_sq(g, &codifferential(space, g, alpha)?)?) } else { 0.0 };
    Ok(Harmonicity { harmonic: d_norm < HARMONIC_TOL && delta_norm < HARMONIC_TOL, d_norm, delta_norm })
}

/// `⟨α, β⟩_g` with the full ordered contraction.
pub fn form_inner(g: &Metric, alpha: &AltForm, beta: &AltForm) -> Result<f64> {
    check_metric(g, alpha)?;
    check_metric(g, beta)?;
    if alpha.degree() != beta.degree() {
        return Err(Error::InvalidDegree(beta.degree()));
    }
    let a = alpha.transform(g.frame());
    let b = beta.transform(g.frame());
    let s: f64 = a.comps.iter().zip(&b.comps).map(|(x, y)| x * y).sum();
    Ok(factorial(alpha.degree()) * s)
}

pub fn form_norm_sq(g: &Metric, alpha: &AltForm) -> Result<f64> {
    form_inner(g, alpha, alpha)
}

/// `α̂(X, Y) = Σ α(X, u_{i_2}, …, u_{i_k}) α(Y, u_{i_2}, …, u_{i_k})` over all
/// ordered tuples of an orthonormal frame. For a 3-form this is `H²`.
pub fn contraction_square(g: &Metric, alpha: &AltForm) -> Result<Bilinear> {
    check_metric(g, alpha)?;
    let k = alpha.degree();
    let n = alpha.dim();
    if k == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let a = alpha.transform(g.frame());
    let rest = combinations(n, k - 1);
    let mut idx_x = vec![0; k];
    let mut idx_y = vec![0; k];
    let mut in_frame = Mat::zeros(n, n);
    for x in 0..n {
        for y in x..n {
            let mut s = 0.0;
            for j in &rest {
                idx_x[0] = x;
                idx_y[0] = y;
                idx_x[1..].copy_from_slice(j);
                idx_y[1..].copy_from_slice(j);
                s += a.get(&idx_x) * a.get(&idx_y);
            }
            in_frame[(x, y)] = s * factorial(k - 1);
            in_frame[(y, x)] = in_frame[(x, y)];
        }
    }
    let l = g.lower();
    Ok(Bilinear(l * in_frame * l.transpose()))
}

/// `H²(X, Y) = g(ı_X H, ı_Y H)`.
pub fn h_squared(g: &Metric, h: &AltForm) -> Result<Bilinear> {
    if h.degree() != 3 {
        return Err(Error::InvalidDegree(h.degree()));
    }
    contraction_square(g, h)
}

/// `σ_H = ½ Σ_i ı_{u_i} H ∧ ı_{u_i} H` over an orthonormal frame.
pub fn fundamental_four_form(g: &Metric, h: &AltForm) -> Result<AltForm> {
    check_metric(g, h)?;
    if h.degree() != 3 {
        return Err(Error::InvalidDegree(h.degree()));
    }
    let n = h.dim();
    let mut sigma = AltForm::zero(n, 4)?;
    for i in 0..n {
        let ih = h.interior(&g.frame_vector(i))?;
        sigma = sigma.add(&ih.wedge(&ih)?)?;
    }
    Ok(sigma.scale(0.5))
}

/// Basis of the isotropy-invariant `k`-forms on `m`.
pub fn invariant_form_basis(space: &ReductiveSpace, k: usize) -> Result<Vec<AltForm>> {
    let n = space.m_dim();
    if k > n {
        return Err(Error::DegreeOverflow { degree: k, dim: n });
    }
    let tuples = combinations(n, k);
    let nk = space.k_dim();
    let mut rows = Mat::zeros(nk * tuples.len(), tuples.len());
    for a in 0..nk {
        let rho = space.isotropy_action(a);
        for col in 0..tuples.len() {
            let mut unit = AltForm::zero(n, k)?;
            unit.comps[col] = 1.0;
            let images: Vec<Vec<f64>> = (0..n).map(|j| rho.column(j).iter().cloned().collect()).collect();
            let basis: Vec<Vec<f64>> = (0..n).map(|j| crate::linalg::unit(n, j)).collect();
            for (row, j) in tuples.iter().enumerate() {
                let mut s = 0.0;
                for slot in 0..k {
                    let args: Vec<&[f64]> =
                        (0..k).map(|t| if t == slot { images[j[t]].as_slice() } else { basis[j[t]].as_slice() }).collect();
                    s += unit.eval(&args);
                }
                rows[(a * tuples.len() + row, col)] = s;
            }
        }
    }
    Ok(null_space(&rows, 1e-10)
        .into_iter()
        .map(|v| AltForm { dim: n, degree: k, comps: v.iter().cloned().collect() })
        .collect())
}

/// Basis of the isotropy-invariant symmetric bilinear forms on `m`.
pub fn invariant_symmetric_basis(space: &ReductiveSpace) -> Vec<Mat> {
    let n = space.m_dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let unit = |&(i, j): &(usize, usize)| {
        let mut m = Mat::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
        m
    };
    let nk = space.k_dim();
    let mut rows = Mat::zeros(nk * n * n, pairs.len());
    for a in 0..nk {
        let rho = space.isotropy_action(a);
        for (col, pair) in pairs.iter().enumerate() {
            let s = unit(pair);
            let d = rho.transpose() * &s + &s * rho;
            for r in 0..n * n {
                rows[(a * n * n + r, col)] = d[(r / n, r % n)];
            }
        }
    }
    null_space(&rows, 1e-10)
        .into_iter()
        .map(|v| pairs.iter().zip(v.iter()).fold(Mat::zeros(n, n), |acc, (p, &c)| acc + unit(p) * c))
        .collect()
}
