//! Lie algebras given by structure constants and reductive splittings
//! `g = k ⊕ m`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::Multilinear;
use crate::linalg::{max_abs, Mat};
use crate::validation_tolerance;

/// A finite-dimensional real Lie algebra, `[e_i, e_j] = Σ_k C[i][j][k] e_k`.
///
/// Constants are stored dense; every algebra used here has dimension ≤ 10.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<f64>,
    labels: Vec<String>,
}

impl LieAlgebra {
    /// Builds and validates an algebra from a dense `n x n x n` array.
    pub fn new(constants: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = constants.len();
        let mut c = Vec::with_capacity(n * n * n);
        for (i, plane) in constants.iter().enumerate() {
            if plane.len() != n {
                return Err(Error::NotCubical(format!("row {i} has {} entries", plane.len())));
            }
            for (j, row) in plane.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::NotCubical(format!("C[{i}][{j}] has {} entries", row.len())));
                }
                c.extend_from_slice(row);
            }
        }
        Self::from_flat(n, c)
    }

    /// Builds from constants flattened in `i, j, k` row-major order.
    pub fn from_flat(dim: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::NotCubical(format!("{} values for dimension {dim}", c.len())));
        }
        let labels = (1..=dim).map(|i| format!("e{i}")).collect();
        let alg = LieAlgebra { dim, c, labels };
        alg.validate()?;
        Ok(alg)
    }

    /// Builds from a list of brackets `[e_i, e_j] = Σ coeff e_k` given as
    /// `(i, j, k, coeff)`; the antisymmetric partner is filled in.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in brackets {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: i.max(j).max(k) + 1 });
            }
            c[(i * dim + j) * dim + k] = v;
            c[(j * dim + i) * dim + k] = -v;
        }
        Self::from_flat(dim, c)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra {
            dim,
            c: vec![0.0; dim * dim * dim],
            labels: (1..=dim).map(|i| format!("e{i}")).collect(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.c
    }

    fn validate(&self) -> Result<()> {
        let tol = validation_tolerance();
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let defect = (self.c(i, j, k) + self.c(j, i, k)).abs();
                    if defect > tol {
                        return Err(Error::AntisymmetryViolation { i, j, k, defect });
                    }
                }
            }
        }
        let (defect, triple) = self.jacobi_defect();
        if defect > tol {
            return Err(Error::JacobiViolation { triple, defect });
        }
        Ok(())
    }

    /// Largest component of `[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]`
    /// over all basis triples, together with the worst triple.
    pub fn jacobi_defect(&self) -> (f64, [usize; 3]) {
        let n = self.dim;
        let mut worst = (0.0, [0, 0, 0]);
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c(j, k, m) * self.c(i, m, l)
                                + self.c(k, i, m) * self.c(j, m, l)
                                + self.c(i, j, m) * self.c(k, m, l);
                        }
                        if s.abs() > worst.0 {
                            worst = (s.abs(), [i, j, k]);
                        }
                    }
                }
            }
        }
        worst
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.c(i, j, k);
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad(x)`; column `j` holds the coordinates of `[x, e_j]`.
    pub fn ad(&self, x: &[f64]) -> Result<Mat> {
        self.check_len(x)?;
        let n = self.dim;
        Ok(Mat::from_fn(n, n, |k, j| (0..n).map(|i| x[i] * self.c(i, j, k)).sum()))
    }

    fn ad_basis(&self, i: usize) -> Mat {
        let n = self.dim;
        Mat::from_fn(n, n, |k, j| self.c(i, j, k))
    }

    /// Cartan–Killing form `B(X, Y) = tr(ad X ∘ ad Y)` in the stored basis.
    pub fn killing_form(&self) -> Mat {
        let n = self.dim;
        let ads: Vec<Mat> = (0..n).map(|i| self.ad_basis(i)).collect();
        Mat::from_fn(n, n, |i, j| (&ads[i] * &ads[j]).trace())
    }

    /// `tr ad(e_i)` for every basis vector.
    pub fn ad_traces(&self) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.c(i, j, j)).sum()).collect()
    }

    pub fn is_unimodular(&self) -> bool {
        max_abs(self.ad_traces()) <= validation_tolerance()
    }

    /// `self ⊕ other` with the basis of `self` first.
    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let (n1, n2) = (self.dim, other.dim);
        let n = n1 + n2;
        let mut c = vec![0.0; n * n * n];
        for i in 0..n1 {
            for j in 0..n1 {
                for k in 0..n1 {
                    c[(i * n + j) * n + k] = self.c(i, j, k);
                }
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                for k in 0..n2 {
                    c[((n1 + i) * n + n1 + j) * n + n1 + k] = other.c(i, j, k);
                }
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        LieAlgebra { dim: n, c, labels }
    }

    /// Re-expresses the algebra in a new basis whose `i`-th vector is column
    /// `i` of `basis` (coordinates in the current basis).
    pub fn change_basis(&self, basis: &Mat) -> Result<LieAlgebra> {
        let n = self.dim;
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: basis.nrows() });
        }
        let lu = basis.clone().lu();
        if lu.determinant().abs() < 1e-300 {
            return Err(Error::InvalidInput("basis matrix is singular".into()));
        }
        let cols: Vec<Vec<f64>> = (0..n).map(|i| basis.column(i).iter().cloned().collect()).collect();
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let v = self.bracket(&cols[i], &cols[j])?;
                let x = lu
                    .solve(&crate::linalg::Vector::from_vec(v))
                    .ok_or_else(|| Error::InvalidInput("basis matrix is singular".into()))?;
                for k in 0..n {
                    // exact-rational inputs: scrub round-off around zero
                    let val = if x[k].abs() < 1e-15 { 0.0 } else { x[k] };
                    c[(i * n + j) * n + k] = val;
                }
            }
        }
        let labels = (1..=n).map(|i| format!("e{i}")).collect();
        let alg = LieAlgebra { dim: n, c, labels };
        alg.validate()?;
        Ok(alg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// A reductive decomposition `g = k ⊕ m` along coordinate index sets.
///
/// The `m`-basis is `m_indices` in the given order; all tensors in
/// [`crate::forms`] live on that basis.
#[derive(Debug, Clone)]
pub struct ReductiveSpace {
    algebra: LieAlgebra,
    k_idx: Vec<usize>,
    m_idx: Vec<usize>,
    orientation: Orientation,
    // [m_i, m_j]_m, indexed (i * nm + j) * nm + l
    mb: Vec<f64>,
    // [m_i, m_j]_k, indexed (i * nm + j) * nk + a
    kb: Vec<f64>,
    // ad(k_a) restricted to m; column j = [k_a, m_j]
    iso: Vec<Mat>,
    killing_m: Mat,
}

impl ReductiveSpace {
    /// Splits `algebra` and verifies `[k,k] ⊆ k` and `[k,m] ⊆ m`.
    pub fn new(
        algebra: LieAlgebra,
        isotropy_indices: &[usize],
        m_indices: &[usize],
        orientation: Orientation,
    ) -> Result<Self> {
        let n = algebra.dim();
        let mut seen = vec![false; n];
        for &i in isotropy_indices.iter().chain(m_indices) {
            if i >= n {
                return Err(Error::BadPartition(format!("index {i} out of range for dimension {n}")));
            }
            if seen[i] {
                return Err(Error::BadPartition(format!("index {i} appears twice")));
            }
            seen[i] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::BadPartition(format!("index {i} missing")));
        }
        let tol = validation_tolerance();
        let (k_idx, m_idx) = (isotropy_indices.to_vec(), m_indices.to_vec());
        for &a in &k_idx {
            for &b in &k_idx {
                for &l in &m_idx {
                    let v = algebra.c(a, b, l);
                    if v.abs() > tol {
                        return Err(Error::NotReductive { which: "m", i: a, j: b, value: v });
                    }
                }
            }
            for &j in &m_idx {
                for &b in &k_idx {
                    let v = algebra.c(a, j, b);
                    if v.abs() > tol {
                        return Err(Error::NotReductive { which: "k", i: a, j, value: v });
                    }
                }
            }
        }
        let (nm, nk) = (m_idx.len(), k_idx.len());
        let mut mb = vec![0.0; nm * nm * nm];
        let mut kb = vec![0.0; nm * nm * nk];
        for (i, &gi) in m_idx.iter().enumerate() {
            for (j, &gj) in m_idx.iter().enumerate() {
                for (l, &gl) in m_idx.iter().enumerate() {
                    mb[(i * nm + j) * nm + l] = algebra.c(gi, gj, gl);
                }
                for (a, &ga) in k_idx.iter().enumerate() {
                    kb[(i * nm + j) * nk + a] = algebra.c(gi, gj, ga);
                }
            }
        }
        let iso = k_idx
            .iter()
            .map(|&ga| Mat::from_fn(nm, nm, |l, j| algebra.c(ga, m_idx[j], m_idx[l])))
            .collect();
        let kf = algebra.killing_form();
        let killing_m = Mat::from_fn(nm, nm, |i, j| kf[(m_idx[i], m_idx[j])]);
        Ok(ReductiveSpace { algebra, k_idx, m_idx, orientation, mb, kb, iso, killing_m })
    }

    /// The Lie group case `k = 0`.
    pub fn group(algebra: LieAlgebra) -> Self {
        let idx: Vec<usize> = (0..algebra.dim()).collect();
        Self::new(algebra, &[], &idx, Orientation::Positive).expect("trivial split is reductive")
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn m_dim(&self) -> usize {
        self.m_idx.len()
    }

    pub fn k_dim(&self) -> usize {
        self.k_idx.len()
    }

    pub fn isotropy_indices(&self) -> &[usize] {
        &self.k_idx
    }

    pub fn m_indices(&self) -> &[usize] {
        &self.m_idx
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `[m_i, m_j]_m` coefficient on `m_l`.
    #[inline]
    pub fn mb(&self, i: usize, j: usize, l: usize) -> f64 {
        let nm = self.m_idx.len();
        self.mb[(i * nm + j) * nm + l]
    }

    /// `[m_i, m_j]_k` coefficient on `k_a`.
    #[inline]
    pub fn kb(&self, i: usize, j: usize, a: usize) -> f64 {
        let (nm, nk) = (self.m_idx.len(), self.k_idx.len());
        self.kb[(i * nm + j) * nk + a]
    }

    /// Projected bracket `[X, Y]_m` of two vectors of `m`.
    pub fn bracket_m(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nm = self.m_dim();
        let mut out = vec![0.0; nm];
        for i in 0..nm {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..nm {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (l, o) in out.iter_mut().enumerate() {
                    *o += w * self.mb(i, j, l);
                }
            }
        }
        out
    }

    /// `[X, Y]_k` of two vectors of `m`, in `k`-coordinates.
    pub fn bracket_k(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let (nm, nk) = (self.m_dim(), self.k_dim());
        let mut out = vec![0.0; nk];
        for i in 0..nm {
            for j in 0..nm {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (a, o) in out.iter_mut().enumerate() {
                    *o += w * self.kb(i, j, a);
                }
            }
        }
        out
    }

    /// `ad(k_a)` acting on `m`.
    pub fn isotropy_action(&self, a: usize) -> &Mat {
        &self.iso[a]
    }

    /// Killing form of the ambient algebra restricted to `m`.
    pub fn killing_on_m(&self) -> &Mat {
        &self.killing_m
    }

    /// Embeds a vector of `m` into the ambient algebra.
    pub fn embed_m(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.algebra.dim()];
        for (i, &g) in self.m_idx.iter().enumerate() {
            v[g] = x[i];
        }
        v
    }

    /// Projects an ambient vector onto `m`.
    pub fn project_m(&self, v: &[f64]) -> Vec<f64> {
        self.m_idx.iter().map(|&g| v[g]).collect()
    }

    pub fn project_k(&self, v: &[f64]) -> Vec<f64> {
        self.k_idx.iter().map(|&g| v[g]).collect()
    }
}

/// Infinitesimal isotropy invariance of a tensor on `m`: the largest value of
/// `Σ_s T(X_1, …, [Z, X_s]_m, …, X_r)` over `Z` in a basis of `k` and basis
/// tuples `X_i`. Returns `(defect < INVARIANCE_TOL, defect)`.
pub fn isotropy_invariance_check<T: Multilinear + ?Sized>(space: &ReductiveSpace, tensor: &T) -> (bool, f64) {
    let defect = isotropy_defect(space, tensor);
    (defect < crate::INVARIANCE_TOL, defect)
}

pub fn isotropy_defect<T: Multilinear + ?Sized>(space: &ReductiveSpace, tensor: &T) -> f64 {
    let nm = space.m_dim();
    let r = tensor.order();
    if space.k_dim() == 0 || r == 0 {
        return 0.0;
    }
    let basis: Vec<Vec<f64>> = (0..nm).map(|i| crate::linalg::unit(nm, i)).collect();
    let alternating = tensor.is_alternating();
    let mut worst: f64 = 0.0;
    let mut tuple = vec![0usize; r];
    for rho in &space.iso {
        let images: Vec<Vec<f64>> = (0..nm).map(|j| rho.column(j).iter().cloned().collect()).collect();
        for code in 0..nm.pow(r as u32) {
            let mut c = code;
            for t in tuple.iter_mut().rev() {
                *t = c % nm;
                c /= nm;
            }
            if alternating && !tuple.windows(2).all(|w| w[0] < w[1]) {
                continue;
            }
            let mut s = 0.0;
            for slot in 0..r {
                let args: Vec<&[f64]> = (0..r)
                    .map(|t| if t == slot { images[tuple[t]].as_slice() } else { basis[tuple[t]].as_slice() })
                    .collect();
                s += tensor.eval(&args);
            }
            worst = worst.max(s.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn jacobi_oracle(alg: &LieAlgebra) -> f64 {
        // brute force over all ordered triples, using the bracket itself
        let n = alg.dim();
        let e = |i| crate::linalg::unit(n, i);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let a = alg.bracket(&e(i), &alg.bracket(&e(j), &e(k)).unwrap()).unwrap();
                    let b = alg.bracket(&e(j), &alg.bracket(&e(k), &e(i)).unwrap()).unwrap();
                    let c = alg.bracket(&e(k), &alg.bracket(&e(i), &e(j)).unwrap()).unwrap();
                    for l in 0..n {
                        worst = worst.max((a[l] + b[l] + c[l]).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn su2_is_valid_and_brackets_match() {
        let su2 = catalog::su2();
        assert_eq!(su2.dim(), 3);
        let (h, e, v) = (crate::linalg::unit(3, 0), crate::linalg::unit(3, 1), crate::linalg::unit(3, 2));
        assert_eq!(su2.bracket(&h, &e).unwrap(), v);
        assert_eq!(su2.bracket(&h, &v).unwrap(), vec![0.0, -1.0, 0.0]);
        assert_eq!(su2.bracket(&e, &v).unwrap(), vec![0.5, 0.0, 0.0]);
        assert!(jacobi_oracle(&su2) < 1e-15);
    }

    #[test]
    fn abelian_is_valid() {
        let a = LieAlgebra::from_flat(3, vec![0.0; 27]).unwrap();
        assert_eq!(a.killing_form(), Mat::zeros(3, 3));
    }

    #[test]
    fn jacobi_violation_is_reported() {
        // [e1,e2] = e2, [e2,e3] = e1: the cyclic sum on (e1,e2,e3) is -e1
        let mut c = vec![0.0; 27];
        let idx = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
        c[idx(0, 1, 1)] = 1.0;
        c[idx(1, 0, 1)] = -1.0;
        c[idx(1, 2, 0)] = 1.0;
        c[idx(2, 1, 0)] = -1.0;
        let unchecked = LieAlgebra { dim: 3, c: c.clone(), labels: Vec::new() };
        assert!((jacobi_oracle(&unchecked) - 1.0).abs() < 1e-15);
        match LieAlgebra::from_flat(3, c) {
            Err(Error::JacobiViolation { triple, defect }) => {
                assert_eq!(triple, [0, 1, 2]);
                assert!((defect - 1.0).abs() < 1e-15);
            }
            other => panic!("expected JacobiViolation, got {other:?}"),
        }
    }

    #[test]
    fn semidirect_example_satisfies_jacobi() {
        // [e1,e2] = e3, [e1,e3] = e2 only involves ad(e1): a valid algebra
        let alg = LieAlgebra::from_brackets(3, &[(0, 1, 2, 1.0), (0, 2, 1, 1.0)]).unwrap();
        assert!(jacobi_oracle(&alg) < 1e-15);
    }

    #[test]
    fn antisymmetry_violation_is_reported() {
        let mut c = vec![0.0; 8];
        c[1] = 1.0; // C[0][0][1]
        assert!(matches!(LieAlgebra::from_flat(2, c), Err(Error::AntisymmetryViolation { .. })));
    }

    #[test]
    fn bracket_checks_dimensions() {
        let su2 = catalog::su2();
        assert_eq!(
            su2.bracket(&[1.0, 0.0], &[0.0, 1.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn su2_killing_values() {
        let b = catalog::su2().killing_form();
        let expected = Mat::from_diagonal(&crate::linalg::Vector::from_vec(vec![-2.0, -1.0, -1.0]));
        assert!((b - expected).abs().max() < 1e-15);
    }

    #[test]
    fn killing_form_is_ad_invariant() {
        let alg = catalog::mpq(3, 2).unwrap().space().algebra().clone();
        let b = alg.killing_form();
        let n = alg.dim();
        let mut worst: f64 = 0.0;
        for z in 0..n {
            let adz = alg.ad(&crate::linalg::unit(n, z)).unwrap();
            let m = adz.transpose() * &b + &b * &adz;
            worst = worst.max(m.abs().max());
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn direct_sum_blocks() {
        let su2 = catalog::su2();
        let g = su2.direct_sum(&su2);
        assert_eq!(g.dim(), 6);
        let e = |i| crate::linalg::unit(6, i);
        assert_eq!(g.bracket(&e(1), &e(4)).unwrap(), vec![0.0; 6]);
        assert_eq!(g.killing_form()[(1, 1)], -1.0);
        assert_eq!(g.killing_form()[(4, 4)], -1.0);
        let with_line = su2.direct_sum(&LieAlgebra::abelian(1));
        assert_eq!(with_line.dim(), 4);
        let b = with_line.killing_form();
        assert!((0..4).all(|i| b[(3, i)] == 0.0));
    }

    #[test]
    fn reductive_split_examples() {
        let su2 = catalog::su2();
        // k = span(H): [H,E] = V, [H,V] = -E stay in m
        let s = ReductiveSpace::new(su2.clone(), &[0], &[1, 2], Orientation::Positive).unwrap();
        assert_eq!(s.m_dim(), 2);
        // basis (E+H, E, V) with k = span(E+H) is not reductive
        let p = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let tilted = su2.change_basis(&p).unwrap();
        assert!(matches!(
            ReductiveSpace::new(tilted, &[0], &[1, 2], Orientation::Positive),
            Err(Error::NotReductive { which: "k", .. })
        ));
        // trivial isotropy is always fine
        let g = ReductiveSpace::group(su2.clone());
        assert_eq!(g.k_dim(), 0);
        assert!(matches!(
            ReductiveSpace::new(su2, &[0], &[0, 1], Orientation::Positive),
            Err(Error::BadPartition(_))
        ));
    }

    #[test]
    fn mpq_projected_bracket() {
        for (p, q) in [(1u32, 1u32), (2, 1), (3, 2)] {
            let mpq = catalog::mpq(p, q).unwrap();
            let s = mpq.space();
            let (pf, qf) = (p as f64, q as f64);
            let d = 2.0 * (pf * pf + qf * qf);
            let full = s.algebra().bracket(&crate::linalg::unit(6, 1), &crate::linalg::unit(6, 2)).unwrap();
            let expected = [qf / d, 0.0, 0.0, 0.0, 0.0, pf / d];
            for i in 0..6 {
                assert!((full[i] - expected[i]).abs() < 1e-15, "{p},{q}: {full:?}");
            }
            let m = s.bracket_m(&crate::linalg::unit(5, 1), &crate::linalg::unit(5, 2));
            assert!((m[0] - qf / d).abs() < 1e-15);
            assert!(m[1..].iter().all(|v| v.abs() < 1e-15));
            // round trip: [X,Y] - embed([X,Y]_m) only has k components
            let k = s.bracket_k(&crate::linalg::unit(5, 1), &crate::linalg::unit(5, 2));
            assert!((k[0] - pf / d).abs() < 1e-15);
        }
    }

    #[test]
    fn invariance_examples() {
        let mpq = catalog::mpq(2, 1).unwrap();
        let s = mpq.space();
        let g = catalog::mpq_diagonal_metric(1.3, 0.7, 1.9).unwrap();
        assert!(isotropy_invariance_check(s, &g).0);
        let bad = crate::AltForm::from_terms(5, 2, &[(&[1, 3], 1.0)]).unwrap();
        let (ok, defect) = isotropy_invariance_check(s, &bad);
        assert!(!ok && defect > 0.5);
        let torus = catalog::flat_torus(3).unwrap();
        assert!(isotropy_invariance_check(&torus.space, &bad_on(3)).0);
    }

    fn bad_on(n: usize) -> crate::AltForm {
        crate::AltForm::from_terms(n, 2, &[(&[0, 1], 1.0)]).unwrap()
    }
}
