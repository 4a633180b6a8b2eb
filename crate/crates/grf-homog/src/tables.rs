//! Closed-form component tables for `M_{p,q}`, used by `verify` as
//! the expected side of each comparison.

/// Diagonal components of `Ric` for `g = μ²e¹e¹ + a²(e²e² + e³e³) + b²(e⁴e⁴ + e⁵e⁵)`.
pub fn diagonal_ricci(p: f64, q: f64, mu: f64, a: f64, b: f64) -> [f64; 5] {
    let s = p * p + q * q;
    let (a2, b2, mu2) = (a * a, b * b, mu * mu);
    let r1 = mu2 * mu2 * (a2 * a2 * p * p + b2 * b2 * q * q) / (8.0 * a2 * a2 * b2 * b2 * s * s);
    let r2 = (4.0 * a2 * s * s - mu2 * q * q) / (8.0 * a2 * s * s);
    let r4 = (4.0 * b2 * s * s - mu2 * p * p) / (8.0 * b2 * s * s);
    [r1, r2, r2, r4, r4]
}

/// Diagonal components of `H²` for `H = q e¹²³ + p e¹⁴⁵`.
pub fn diagonal_h_squared(p: f64, q: f64, mu: f64, a: f64, b: f64) -> [f64; 5] {
    let (a2, b2, mu2) = (a * a, b * b, mu * mu);
    let h1 = 2.0 * (a2 * a2 * p * p + b2 * b2 * q * q) / (a2 * a2 * b2 * b2);
    let h2 = 2.0 * q * q / (a2 * mu2);
    let h4 = 2.0 * p * p / (b2 * mu2);
    [h1, h2, h2, h4, h4]
}

/// Coefficients of `e²³` and `e⁴⁵` in `*(h₁e¹²³ + h₂e¹⁴⁵)`.
pub fn diagonal_star(mu: f64, a: f64, b: f64, h1: f64, h2: f64) -> (f64, f64) {
    (a * a / (mu * b * b) * h2, b * b / (mu * a * a) * h1)
}

/// `[(1,1), (2,2), (4,4), (2,4)]` components of `Ric` and of `H²` on `M_{1,1}`
/// with `s = 0` and the harmonic torsion of coefficient `h₁`.
pub fn equal_tables(mu: f64, a: f64, b: f64, c: f64, h1: f64) -> ([f64; 4], [f64; 4]) {
    let (a2, b2, c2, mu2) = (a * a, b * b, c * c, mu * mu);
    let (a4, b4, mu4) = (a2 * a2, b2 * b2, mu2 * mu2);
    let (a6, b6, c4) = (a4 * a2, b4 * b2, c2 * c2);
    let minus = a2 * b2 - c2;
    let plus = a2 * b2 + c2;
    let ric = [
        (2.0 * c2 * (64.0 * c2 - 64.0 * a2 * b2 - mu4) + mu4 * (a4 + b4)) / (32.0 * minus * minus),
        (64.0 * a2 * c2 + mu2 * (16.0 * a2 * b2 - b2 * mu2 - 16.0 * c2)) / (32.0 * mu2 * minus),
        (64.0 * b2 * c2 + mu2 * (16.0 * a2 * b2 - a2 * mu2 - 16.0 * c2)) / (32.0 * mu2 * minus),
        c * (64.0 * a2 * b2 - mu4) / (32.0 * mu2 * minus),
    ];
    let k = 2.0 * h1 * h1;
    let den = mu2 * minus * plus * plus;
    let h2 = [
        k * (a4 + b4 - 2.0 * c2) / (minus * plus),
        k * (a2 * c2 * (a4 + b4) - c4 * (2.0 * a2 + b2) + a4 * b6) / den,
        k * (b2 * c2 * (a4 + b4) - c4 * (a2 + 2.0 * b2) + a6 * b4) / den,
        k * c * (a2 * b2 * (a4 + a2 * b2 + b4 - 2.0 * c2) - c4) / den,
    ];
    (ric, h2)
}

/// Expands a 4-entry `M_{1,1}` table to the full symmetric matrix entry.
pub fn equal_entry(table: &[f64; 4], i: usize, j: usize) -> f64 {
    match (i.min(j), i.max(j)) {
        (0, 0) => table[0],
        (1, 1) | (2, 2) => table[1],
        (3, 3) | (4, 4) => table[2],
        (1, 3) | (2, 4) => table[3],
        _ => 0.0,
    }
}

/// Coefficients of `e²³`, `e⁴⁵`, `e²⁴ + e³⁵`, `e²⁵ − e³⁴` in `*H` for
/// `H = h₁e¹²³ + h₁e¹⁴⁵ + h₃(e¹²⁵ − e¹³⁴) + h₄(e¹²⁴ + e¹³⁵)`.
pub fn equal_star(mu: f64, a: f64, b: f64, c: f64, h1: f64, h3: f64, h4: f64) -> [f64; 4] {
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let minus = mu * (a2 * b2 - c2);
    [
        (h1 * (a2 * a2 + c2) - 2.0 * a2 * c * h3) / minus,
        (h1 * (b2 * b2 + c2) - 2.0 * b2 * c * h3) / minus,
        -h4 / mu,
        -(h3 * (a2 * b2 + c2) - c * h1 * (a2 + b2)) / minus,
    ]
}

/// The harmonic `h₃ = c h₁ (a² + b²) / (a²b² + c²)`.
pub fn harmonic_h3(a: f64, b: f64, c: f64, h1: f64) -> f64 {
    c * h1 * (a * a + b * b) / (a * a * b * b + c * c)
}

/// The closed-form differential of `(p₁, p₂, p₃, p₄)` at `x_o = (2√2, 1, 1, 0, 2)`.
pub fn anchor_differential() -> [[f64; 5]; 4] {
    let s2 = std::f64::consts::SQRT_2;
    [
        [128.0 * s2, 0.0, 0.0, 0.0, -128.0],
        [0.0, 256.0, 0.0, 0.0, -64.0],
        [0.0, 0.0, 256.0, 0.0, -64.0],
        [0.0, 0.0, 0.0, -192.0, 0.0],
    ]
}

/// Weighted degrees of `(p₁, p₂, p₃, p₄)` when `(μ, a, b, c, h₁)` carry
/// weights `(1, 1, 1, 1, 2)`.
pub const POLYNOMIAL_DEGREES: [i32; 4] = [12, 14, 14, 13];

/// Eigenvalues of the linearized flow at the fixed point, ascending.
pub fn flow_eigenvalues(p: f64, q: f64, lambda: f64) -> [f64; 3] {
    let s = p * p + q * q;
    let mut e = [-s * s / (lambda * p * p * q * q), -s / (lambda * q * q), -s / (lambda * p * p)];
    e.sort_by(f64::total_cmp);
    e
}
