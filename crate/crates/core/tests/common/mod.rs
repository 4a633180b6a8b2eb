//! Closed-form oracles for the closed-form component tables, plus
//! seeded random sampling helpers shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|x - y| / max(1, |y|)`.
pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Diagonal `M_{p,q}` tables for `g = μ²e¹e¹ + a²(e²e² + e³e³) + b²(e⁴e⁴ + e⁵e⁵)`.
pub mod diagonal {
    pub fn ricci(p: f64, q: f64, mu: f64, a: f64, b: f64) -> [f64; 5] {
        let s = p * p + q * q;
        let (a2, b2, mu2) = (a * a, b * b, mu * mu);
        let r1 = mu2 * mu2 * (a2 * a2 * p * p + b2 * b2 * q * q) / (8.0 * a2 * a2 * b2 * b2 * s * s);
        let r2 = (4.0 * a2 * s * s - mu2 * q * q) / (8.0 * a2 * s * s);
        let r4 = (4.0 * b2 * s * s - mu2 * p * p) / (8.0 * b2 * s * s);
        [r1, r2, r2, r4, r4]
    }

    /// `H²` for `H = q e¹²³ + p e¹⁴⁵`.
    pub fn h_squared(p: f64, q: f64, mu: f64, a: f64, b: f64) -> [f64; 5] {
        let (a2, b2, mu2) = (a * a, b * b, mu * mu);
        let h1 = 2.0 * (a2 * a2 * p * p + b2 * b2 * q * q) / (a2 * a2 * b2 * b2);
        let h2 = 2.0 * q * q / (a2 * mu2);
        let h4 = 2.0 * p * p / (b2 * mu2);
        [h1, h2, h2, h4, h4]
    }

    /// Coefficients of `e²³` and `e⁴⁵` in `*(h₁e¹²³ + h₂e¹⁴⁵)`.
    pub fn star(mu: f64, a: f64, b: f64, h1: f64, h2: f64) -> (f64, f64) {
        (a * a / (mu * b * b) * h2, b * b / (mu * a * a) * h1)
    }
}

/// `p = q = 1` tables with `s = 0`.
pub mod equal {
    pub struct Tables {
        pub ric: [f64; 4],
        pub h2: [f64; 4],
    }

    /// `[(1,1), (2,2), (4,4), (2,4)]` components of `Ric` and of `H²` for the
    /// harmonic torsion with coefficient `h₁`.
    pub fn tables(mu: f64, a: f64, b: f64, c: f64, h1: f64) -> Tables {
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
        Tables { ric, h2 }
    }

    /// Coefficients of `e²³`, `e⁴⁵`, `e²⁴ + e³⁵`, `e²⁵ − e³⁴` in `*H` for
    /// `H = h₁e¹²³ + h₁e¹⁴⁵ + h₃(e¹²⁵ − e¹³⁴) + h₄(e¹²⁴ + e¹³⁵)`.
    pub fn star(mu: f64, a: f64, b: f64, c: f64, h1: f64, h3: f64, h4: f64) -> [f64; 4] {
        let (a2, b2, c2) = (a * a, b * b, c * c);
        let minus = mu * (a2 * b2 - c2);
        [
            (h1 * (a2 * a2 + c2) - 2.0 * a2 * c * h3) / minus,
            (h1 * (b2 * b2 + c2) - 2.0 * b2 * c * h3) / minus,
            -h4 / mu,
            -(h3 * (a2 * b2 + c2) - c * h1 * (a2 + b2)) / minus,
        ]
    }

    /// Coefficients of `e¹²⁵ − e¹³⁴` and `e¹²⁴ + e¹³⁵` in `d*H`.
    pub fn d_star(mu: f64, a: f64, b: f64, c: f64, h1: f64, h3: f64, h4: f64) -> [f64; 2] {
        let (a2, b2, c2) = (a * a, b * b, c * c);
        [
            2.0 * h4 / mu,
            -2.0 * (h3 * (a2 * b2 + c2) - c * h1 * (a2 + b2)) / (mu * (a2 * b2 - c2)),
        ]
    }
}

/// Random `(μ, a, b)` in a box well inside the diagonal domain.
pub fn diagonal_point(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    (uniform(rng, 0.3, 4.0), uniform(rng, 0.3, 3.0), uniform(rng, 0.3, 3.0))
}

/// Random `(μ, a, b, c)` with `a²b² − c²` bounded away from zero.
pub fn equal_point(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    let (mu, a, b) = diagonal_point(rng);
    let c = uniform(rng, -0.8, 0.8) * a * b;
    (mu, a, b, c)
}
