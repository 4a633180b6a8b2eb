//! Constructors for the concrete spaces: su(2), M_{p,q} over su(2)⊕su(2),
//! bi-invariant group models with the standard 3-form, flat tori, and the
//! pointwise Kobayashi circle-bundle checker.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::{contraction_square, form_norm_sq, AltForm, Bilinear, Metric};
use crate::lie::{LieAlgebra, Orientation, ReductiveSpace};
use crate::linalg::Mat;
use num_traits::Float;

/// su(2) in the basis (H, E, V): `[H,E] = V`, `[H,V] = -E`, `[E,V] = ½H`.
pub fn su2() -> LieAlgebra {
    LieAlgebra::from_brackets(3, &[(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, 0.5)])
        .and_then(|a| a.with_labels(vec!["H".into(), "E".into(), "V".into()]))
        .expect("su(2) constants are valid")
}

/// su(2) ⊕ su(2) in the basis (H₁, E₁, V₁, H₂, E₂, V₂).
pub fn su2_sum() -> LieAlgebra {
    let s = su2();
    s.direct_sum(&s)
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `M_{p,q} = SU(2)×SU(2) / K_{p,q}` with the basis
/// `e₁ = (qH, -pH)`, `e₂ = (E,0)`, `e₃ = (V,0)`, `e₄ = (0,E)`, `e₅ = (0,V)`,
/// `e₆ = (pH, qH)`, isotropy `k = span(e₆)` and tangent module `m = span(e₁..e₅)`.
#[derive(Debug, Clone)]
pub struct MpqSpace {
    p: u32,
    q: u32,
    space: ReductiveSpace,
}

pub fn mpq(p: u32, q: u32) -> Result<MpqSpace> {
    if q == 0 || p < q {
        return Err(Error::BadOrder { p, q });
    }
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    let (pf, qf) = (p as f64, q as f64);
    let mut basis = Mat::zeros(6, 6);
    basis[(0, 0)] = qf;
    basis[(3, 0)] = -pf;
    basis[(1, 1)] = 1.0;
    basis[(2, 2)] = 1.0;
    basis[(4, 3)] = 1.0;
    basis[(5, 4)] = 1.0;
    basis[(0, 5)] = pf;
    basis[(3, 5)] = qf;
    let algebra = su2_sum().change_basis(&basis)?;
    let space = ReductiveSpace::new(algebra, &[5], &[0, 1, 2, 3, 4], Orientation::Positive)?;
    Ok(MpqSpace { p, q, space })
}

impl MpqSpace {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `p² + q²`.
    pub fn s(&self) -> f64 {
        let (p, q) = (self.p as f64, self.q as f64);
        p * p + q * q
    }

    pub fn space(&self) -> &ReductiveSpace {
        &self.space
    }

    /// Rotation speeds of `ad(e₆)` on `(e₁; e₂,e₃; e₄,e₅)`.
    pub fn isotropy_speeds(&self) -> [f64; 5] {
        let a = self.space.isotropy_action(0);
        [a[(0, 0)], a[(2, 1)], a[(2, 1)], a[(4, 3)], a[(4, 3)]]
    }

    /// The closed invariant 3-form `q e¹²³ + p e¹⁴⁵`.
    pub fn harmonic_torsion(&self) -> AltForm {
        diagonal_torsion(self.p as f64, self.q as f64, 1.0)
    }

    /// The BRF metric `g_o = 2(p²+q²) e¹e¹ + q²/(p²+q²)(e²e² + e³e³) + p²/(p²+q²)(e⁴e⁴ + e⁵e⁵)`.
    pub fn brf_metric(&self) -> Metric {
        let (p, q, s) = (self.p as f64, self.q as f64, self.s());
        Metric::diagonal(&[2.0 * s, q * q / s, q * q / s, p * p / s, p * p / s]).expect("positive diagonal")
    }

    /// `(λ g_o, λ H_o)`.
    pub fn brf_pair(&self, lambda: f64) -> Result<(Metric, AltForm)> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("scale must be positive, got {lambda}")));
        }
        Ok((self.brf_metric().scaled(lambda)?, self.harmonic_torsion().scale(lambda)))
    }

    /// Basis of invariant symmetric tensors. For `p ≠ q`: the coefficients
    /// are `(μ², a², b²)`; for `p = q` two more follow, `c` (the `e²e⁴ + e³e⁵`
    /// entries) and `s` (`e²e⁵ - e³e⁴`).
    pub fn metric_basis(&self) -> Vec<Mat> {
        let mut out = Vec::new();
        let unit = |pairs: &[(usize, usize, f64)]| {
            let mut m = Mat::zeros(5, 5);
            for &(i, j, v) in pairs {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            m
        };
        out.push(unit(&[(0, 0, 1.0)]));
        out.push(unit(&[(1, 1, 1.0), (2, 2, 1.0)]));
        out.push(unit(&[(3, 3, 1.0), (4, 4, 1.0)]));
        if self.p == self.q {
            out.push(unit(&[(1, 3, 1.0), (2, 4, 1.0)]));
            out.push(unit(&[(1, 4, 1.0), (2, 3, -1.0)]));
        }
        out
    }
}

/// `μ² e¹e¹ + a²(e²e² + e³e³) + b²(e⁴e⁴ + e⁵e⁵)`.
pub fn mpq_diagonal_metric(mu: f64, a: f64, b: f64) -> Result<Metric> {
    if !(mu > 0.0 && a > 0.0 && b > 0.0) {
        return Err(Error::OutOfDomain(format!("need mu, a, b > 0 (got {mu}, {a}, {b})")));
    }
    Metric::diagonal(&[mu * mu, a * a, a * a, b * b, b * b])
}

/// `h₁ (q e¹²³ + p e¹⁴⁵)`.
pub fn diagonal_torsion(p: f64, q: f64, h1: f64) -> AltForm {
    AltForm::from_terms(5, 3, &[(&[0, 1, 2], h1 * q), (&[0, 3, 4], h1 * p)]).expect("valid terms")
}

/// The general invariant metric on `M_{1,1}`:
/// `μ² e¹e¹ + a²(e²e² + e³e³) + b²(e⁴e⁴ + e⁵e⁵) + 2c(e²⊙e⁴ + e³⊙e⁵) + 2s(e²⊙e⁵ - e³⊙e⁴)`.
pub fn mpq_equal_metric(mu: f64, a: f64, b: f64, c: f64, s: f64) -> Result<Metric> {
    if !(mu > 0.0 && a > 0.0 && b > 0.0 && a * a * b * b - c * c - s * s > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "need mu, a, b > 0 and a^2 b^2 - c^2 - s^2 > 0 (got {mu}, {a}, {b}, {c}, {s})"
        )));
    }
    let mut g = Mat::zeros(5, 5);
    g[(0, 0)] = mu * mu;
    g[(1, 1)] = a * a;
    g[(2, 2)] = a * a;
    g[(3, 3)] = b * b;
    g[(4, 4)] = b * b;
    for (i, j, v) in [(1, 3, c), (2, 4, c), (1, 4, s), (2, 3, -s)] {
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    Metric::new(g)
}

/// The general invariant 3-form on `M_{1,1}`:
/// `h₁ e¹²³ + h₂ e¹⁴⁵ + h₃ (e¹²⁵ - e¹³⁴) + h₄ (e¹²⁴ + e¹³⁵)`.
pub fn mpq_equal_torsion(h1: f64, h2: f64, h3: f64, h4: f64) -> AltForm {
    AltForm::from_terms(
        5,
        3,
        &[
            (&[0, 1, 2], h1),
            (&[0, 3, 4], h2),
            (&[0, 1, 4], h3),
            (&[0, 2, 3], -h3),
            (&[0, 1, 3], h4),
            (&[0, 2, 4], h4),
        ],
    )
    .expect("valid terms")
}

/// The coefficient `h₃` making the closed form with `h₂ = h₁`, `h₄ = 0`
/// coclosed for the metric `(μ, a, b, c, 0)`.
pub fn harmonic_h3(a: f64, b: f64, c: f64, h1: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    c * h1 * (a2 + b2) / (a2 * b2 + c * c)
}

/// `ω(X,Y,Z) = B([X,Y],Z)`.
pub fn standard_three_form(algebra: &LieAlgebra) -> AltForm {
    let n = algebra.dim();
    let b = algebra.killing_form();
    let comps = crate::forms::combinations(n, 3)
        .iter()
        .map(|idx| (0..n).map(|l| algebra.c(idx[0], idx[1], l) * b[(l, idx[2])]).sum())
        .collect();
    AltForm::from_components(n, 3, comps).expect("matching length")
}

/// Bi-invariant Lie group model: `k = 0`, `g = -scale·B`, and torsion
/// `H(X,Y,Z) = -g([X,Y],Z) = scale·ω`.
#[derive(Debug, Clone)]
pub struct BiInvariantModel {
    pub space: ReductiveSpace,
    pub metric: Metric,
    pub torsion: AltForm,
    pub scale: f64,
}

pub fn bi_invariant_group(algebra: &LieAlgebra, scale: f64) -> Result<BiInvariantModel> {
    if !(scale > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    let n = algebra.dim();
    let b = algebra.killing_form();
    let eig = b.clone().symmetric_eigen();
    let tol = crate::validation_tolerance();
    if n < 3 || eig.eigenvalues.iter().any(|&l| l > -tol) {
        return Err(Error::NotCompactType);
    }
    let metric = Metric::new(b * (-scale))?;
    let torsion = standard_three_form(algebra).scale(scale);
    Ok(BiInvariantModel { space: ReductiveSpace::group(algebra.clone()), metric, torsion, scale })
}

/// The abelian group `Rⁿ` with the identity metric and no torsion.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    pub space: ReductiveSpace,
    pub metric: Metric,
    pub torsion: AltForm,
}

pub fn flat_torus(n: usize) -> Result<FlatTorus> {
    if n == 0 {
        return Err(Error::InvalidInput("torus dimension must be at least 1".into()));
    }
    let torsion = if n >= 3 { AltForm::zero(n, 3)? } else { AltForm::zero(n, n)? };
    Ok(FlatTorus { space: ReductiveSpace::group(LieAlgebra::abelian(n)), metric: Metric::identity(n), torsion })
}

/// Names of the catalog entries, as accepted by the CLI.
pub fn names() -> Vec<(String, String)> {
    [
        ("su2", "su(2) with the bi-invariant metric -B and torsion B([X,Y],Z)"),
        ("su2+su2", "su(2) + su(2), product of bi-invariant models"),
        ("mpq", "M_{p,q} = SU(2)xSU(2)/U(1)_{p,q}, p >= q >= 1 coprime"),
        ("torus", "abelian R^n with the identity metric and H = 0"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

/// Pointwise data for the Kobayashi circle-bundle construction over a base
/// with metric `g₀`, Ricci tensor `ric₀`, curvature form `α` and auxiliary
/// form `β`.
#[derive(Debug, Clone)]
pub struct KobayashiData {
    pub g0: Metric,
    pub ric0: Bilinear,
    pub alpha: AltForm,
    pub beta: AltForm,
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KobayashiSolution {
    /// Fibre length `c = √(λμ)`.
    pub c: f64,
    /// Torsion scale `h = 2μ√λ`.
    pub h: f64,
    /// `|4c⁴ - λh²|`.
    pub fibre_defect: f64,
    /// `|4c² - h²/μ|`.
    pub scale_defect: f64,
    /// Max entry of `Ric₀ - 2α̂ - (h²/4c²) β̂`.
    pub horizontal_defect: f64,
}

pub const KOBAYASHI_TOL: f64 = 1e-10;

/// Checks `α∧β = 0`, `‖β‖² = λ‖α‖²` and `Ric₀ = 2α̂ + μβ̂`, then returns the
/// bundle constants. Here `ω̂(Z,W) = g₀(ı_Zω, ı_Wω)` and `‖ω‖² = tr ω̂`.
pub fn kobayashi_check(data: &KobayashiData) -> Result<KobayashiSolution> {
    let n = data.g0.dim();
    for (name, f) in [("alpha", &data.alpha), ("beta", &data.beta)] {
        if f.degree() != 2 {
            return Err(Error::InvalidDegree(f.degree()));
        }
        if f.dim() != n {
            return Err(Error::InvalidInput(format!("{name} has dimension {} but the base has {n}", f.dim())));
        }
    }
    if data.ric0.0.nrows() != n || data.ric0.0.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: data.ric0.0.nrows() });
    }
    if !(data.lambda > 0.0 && data.mu > 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda and mu must be positive (got {}, {})",
            data.lambda, data.mu
        )));
    }
    if data.alpha.max_abs() == 0.0 {
        return Err(Error::InvalidInput("alpha must be non-zero".into()));
    }
    let wedge = data.alpha.wedge(&data.beta);
    let a_defect = match wedge {
        Ok(w) => w.max_abs(),
        Err(Error::DegreeOverflow { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    if a_defect >= KOBAYASHI_TOL {
        return Err(Error::ConditionViolated { condition: 'a', defect: a_defect });
    }
    let na = form_norm_sq(&data.g0, &data.alpha)?;
    let nb = form_norm_sq(&data.g0, &data.beta)?;
    let b_defect = (nb - data.lambda * na).abs();
    if b_defect >= KOBAYASHI_TOL * na.max(1.0) {
        return Err(Error::ConditionViolated { condition: 'b', defect: b_defect });
    }
    let ahat = contraction_square(&data.g0, &data.alpha)?;
    let bhat = contraction_square(&data.g0, &data.beta)?;
    let c_defect = (&data.ric0.0 - ahat.0.clone() * 2.0 - bhat.0.clone() * data.mu).abs().max();
    if c_defect >= KOBAYASHI_TOL {
        return Err(Error::ConditionViolated { condition: 'c', defect: c_defect });
    }
    let c = Float::sqrt(data.lambda * data.mu);
    let h = 2.0 * data.mu * Float::sqrt(data.lambda);
    let (c2, h2) = (c * c, h * h);
    Ok(KobayashiSolution {
        c,
        h,
        fibre_defect: (4.0 * c2 * c2 - data.lambda * h2).abs(),
        scale_defect: (4.0 * c2 - h2 / data.mu).abs(),
        horizontal_defect: (&data.ric0.0 - ahat.0 * 2.0 - bhat.0 * (h2 / (4.0 * c2))).abs().max(),
    })
}

/// Synthetic flat-base data on `R⁴`: `g₀ = I`, `α = e¹² - e³⁴`,
/// `β = √λ (e¹² + e³⁴)`, `Ric₀ = (2 + μλ) I`; satisfies all three conditions.
pub fn kobayashi_synthetic(lambda: f64, mu: f64) -> KobayashiData {
    let r = Float::sqrt(lambda);
    KobayashiData {
        g0: Metric::identity(4),
        ric0: Bilinear(Mat::identity(4, 4) * (2.0 + mu * lambda)),
        alpha: AltForm::from_terms(4, 2, &[(&[0, 1], 1.0), (&[2, 3], -1.0)]).expect("valid"),
        beta: AltForm::from_terms(4, 2, &[(&[0, 1], r), (&[2, 3], r)]).expect("valid"),
        lambda,
        mu,
    }
}
