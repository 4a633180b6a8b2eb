//! Ricci tensors of invariant metrics, Nomizu maps of invariant connections,
//! and their curvature.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::{codifferential, h_squared, AltForm, Bilinear, Metric};
use crate::lie::{isotropy_defect, ReductiveSpace};
use crate::linalg::{max_abs, Mat};
use crate::{validation_tolerance, INVARIANCE_TOL};

fn check(space: &ReductiveSpace, g: &Metric) -> Result<()> {
    if g.dim() != space.m_dim() {
        return Err(Error::DimensionMismatch { expected: space.m_dim(), found: g.dim() });
    }
    Ok(())
}

/// Ricci tensor of an invariant metric on a reductive space with unimodular
/// ambient algebra, from the polarized homogeneous formula
///
/// `Ric(X,Y) = -½ Σ_i g([X,E_i]_m, [Y,E_i]_m) - ½ B(X,Y)
///             + ½ Σ_{i<j} g([E_i,E_j]_m, X) g([E_i,E_j]_m, Y)`
///
/// over a `g`-orthonormal frame `{E_i}`.
pub fn ricci(space: &ReductiveSpace, g: &Metric) -> Result<Bilinear> {
    check(space, g)?;
    let traces = space.algebra().ad_traces();
    if let Some((index, &trace)) = traces.iter().enumerate().find(|(_, t)| t.abs() > validation_tolerance()) {
        return Err(Error::NotUnimodular { index, trace });
    }
    let defect = isotropy_defect(space, g);
    if defect >= INVARIANCE_TOL {
        return Err(Error::NonInvariantMetric(defect));
    }
    Ok(ricci_unchecked(space, g, g.frame()))
}

/// The homogeneous Ricci formula evaluated with an explicit orthonormal frame
/// (columns of `frame`); no hypotheses are checked.
pub fn ricci_with_frame(space: &ReductiveSpace, g: &Metric, frame: &Mat) -> Bilinear {
    ricci_unchecked(space, g, frame)
}

fn ricci_unchecked(space: &ReductiveSpace, g: &Metric, frame: &Mat) -> Bilinear {
    let n = space.m_dim();
    let gm = g.matrix();
    let e: Vec<Vec<f64>> = (0..n).map(|i| frame.column(i).iter().cloned().collect()).collect();
    let basis: Vec<Vec<f64>> = (0..n).map(|i| crate::linalg::unit(n, i)).collect();
    // ad_m(E_i) applied to basis vectors: col x = [e_x, E_i]_m
    let brackets: Vec<Vec<Vec<f64>>> =
        e.iter().map(|ei| basis.iter().map(|bx| space.bracket_m(bx, ei)).collect()).collect();
    // g([E_i,E_j]_m, e_x) for i < j
    let mut pair_terms: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let b = space.bracket_m(&e[i], &e[j]);
            pair_terms.push(crate::linalg::mat_vec(gm, &b));
        }
    }
    let killing = space.killing_on_m();
    let mut ric = Mat::zeros(n, n);
    for x in 0..n {
        for y in x..n {
            let mut s = -0.5 * killing[(x, y)];
            for bi in &brackets {
                s -= 0.5 * g.inner(&bi[x], &bi[y]);
            }
            for t in &pair_terms {
                s += 0.5 * t[x] * t[y];
            }
            ric[(x, y)] = s;
            ric[(y, x)] = s;
        }
    }
    Bilinear(ric)
}

/// `tr_g Ric`.
pub fn scalar(space: &ReductiveSpace, g: &Metric) -> Result<f64> {
    Ok(ricci(space, g)?.trace(g))
}

/// `Ric^∇ = Ric_g - ¼ H² - δ_g H` with `δ_g H` read as the bilinear form
/// `(X, Y) ↦ δ_g H(X, Y)`.
pub fn bismut_ricci(space: &ReductiveSpace, g: &Metric, h: &AltForm) -> Result<Bilinear> {
    let ric = ricci(space, g)?;
    let h2 = h_squared(g, h)?;
    let delta = Bilinear::from_two_form(&codifferential(space, g, h)?)?;
    Ok(Bilinear(ric.0 - h2.0 * 0.25 - delta.0))
}

/// An invariant connection `Λ: m → End(m)`, `Λ(e_i) e_j = Σ_k Λ[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NomizuMap {
    n: usize,
    comps: Vec<f64>,
}

impl NomizuMap {
    pub fn zeros(n: usize) -> Self {
        NomizuMap { n, comps: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.comps[(i * self.n + j) * self.n + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.comps[(i * self.n + j) * self.n + k] = v;
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    /// `Λ(e_i)` as a matrix (column `j` is `Λ(e_i) e_j`).
    pub fn endomorphism(&self, i: usize) -> Mat {
        Mat::from_fn(self.n, self.n, |k, j| self.get(i, j, k))
    }

    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.get(i, j, k);
                }
            }
        }
        out
    }

    /// Largest `|g(Λ(X)Y, Z) + g(Y, Λ(X)Z)|` over basis vectors.
    pub fn metric_defect(&self, g: &Metric) -> f64 {
        let gm = g.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let l = self.endomorphism(i);
            let m = l.transpose() * gm + gm * &l;
            worst = worst.max(m.abs().max());
        }
        worst
    }

    /// Torsion `T(e_i, e_j) = Λ(e_i)e_j - Λ(e_j)e_i - [e_i, e_j]_m`, indexed
    /// `[i][j][k]`.
    pub fn torsion(&self, space: &ReductiveSpace) -> Vec<f64> {
        let n = self.n;
        let mut t = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t[(i * n + j) * n + k] = self.get(i, j, k) - self.get(j, i, k) - space.mb(i, j, k);
                }
            }
        }
        t
    }
}

/// Levi-Civita connection: `Λ(X)Y = ½[X,Y]_m + U(X,Y)` with
/// `2 g(U(X,Y), Z) = g([Z,X]_m, Y) + g(X, [Z,Y]_m)`.
pub fn levi_civita_nomizu(space: &ReductiveSpace, g: &Metric) -> Result<NomizuMap> {
    check(space, g)?;
    let n = space.m_dim();
    let gm = g.matrix();
    let ginv = g.inverse();
    let mut lam = NomizuMap::zeros(n);
    for i in 0..n {
        for j in 0..n {
            // w_z = g(U(e_i, e_j), e_z)
            let w: Vec<f64> = (0..n)
                .map(|z| {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += space.mb(z, i, l) * gm[(l, j)] + gm[(i, l)] * space.mb(z, j, l);
                    }
                    0.5 * s
                })
                .collect();
            for k in 0..n {
                let u: f64 = (0..n).map(|z| ginv[(k, z)] * w[z]).sum();
                lam.set(i, j, k, 0.5 * space.mb(i, j, k) + u);
            }
        }
    }
    Ok(lam)
}

/// Bismut connection `g(∇_X Y, Z) = g(∇^g_X Y, Z) + ½ H(X, Y, Z)`.
pub fn bismut_nomizu(space: &ReductiveSpace, g: &Metric, h: &AltForm) -> Result<NomizuMap> {
    if h.degree() != 3 {
        return Err(Error::InvalidDegree(h.degree()));
    }
    if h.dim() != space.m_dim() {
        return Err(Error::DimensionMismatch { expected: space.m_dim(), found: h.dim() });
    }
    let mut lam = levi_civita_nomizu(space, g)?;
    let n = space.m_dim();
    let ginv = g.inverse();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let s: f64 = (0..n).map(|z| ginv[(k, z)] * h.get(&[i, j, z])).sum();
                let v = lam.get(i, j, k) + 0.5 * s;
                lam.set(i, j, k, v);
            }
        }
    }
    Ok(lam)
}

/// `R(e_i, e_j) e_k = Σ_l R[i][j][k][l] e_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    comps: Vec<f64>,
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.comps[((i * n + j) * n + k) * n + l]
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.comps.iter().cloned())
    }

    /// `Ric(Y, Z) = tr(X ↦ R(X, Y) Z)`.
    pub fn ricci_contraction(&self) -> Bilinear {
        let n = self.n;
        Bilinear(Mat::from_fn(n, n, |y, z| (0..n).map(|i| self.get(i, y, z, i)).sum()))
    }

    /// Largest component of `R(X,Y)Z + R(Y,Z)X + R(Z,X)Y` over basis vectors.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(i, j, k, l) + self.get(j, i, k, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `R(X,Y) = [Λ(X), Λ(Y)] - Λ([X,Y]_m) - ad([X,Y]_k)|_m`.
pub fn curvature_tensor(space: &ReductiveSpace, lam: &NomizuMap) -> Result<CurvatureTensor> {
    let n = lam.dim();
    if n != space.m_dim() {
        return Err(Error::DimensionMismatch { expected: space.m_dim(), found: n });
    }
    let ends: Vec<Mat> = (0..n).map(|i| lam.endomorphism(i)).collect();
    let mut comps = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            let mut r = &ends[i] * &ends[j] - &ends[j] * &ends[i];
            for l in 0..n {
                let c = space.mb(i, j, l);
                if c != 0.0 {
                    r -= &ends[l] * c;
                }
            }
            for a in 0..space.k_dim() {
                let c = space.kb(i, j, a);
                if c != 0.0 {
                    r -= space.isotropy_action(a) * c;
                }
            }
            for k in 0..n {
                for l in 0..n {
                    comps[((i * n + j) * n + k) * n + l] = r[(l, k)];
                }
            }
        }
    }
    Ok(CurvatureTensor { n, comps })
}

pub const FLAT_TOL: f64 = 1e-10;

/// `(max |R| < 1e-10, max |R|)`.
pub fn is_flat(r: &CurvatureTensor) -> (bool, f64) {
    let m = r.max_abs();
    (m < FLAT_TOL, m)
}
