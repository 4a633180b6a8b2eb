//! Invariant Riemannian and Bismut geometry on reductive homogeneous spaces.
//!
//! Everything here is pure linear algebra over the structure constants of a
//! Lie algebra `g = k ⊕ m`: invariant tensors on `m`, the Koszul differential,
//! Hodge star and codifferential, Ricci and Bismut-Ricci tensors, the
//! Bismut-Ricci-flat (BRF) equations on parameter charts, and the generalized
//! Ricci flow restricted to invariant data.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and thread-parallel drivers live in the `grf-homog` crate.
#![no_std]

extern crate alloc;

pub mod brf;
pub mod catalog;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod forms;
pub mod lie;
pub mod linalg;
pub mod numdiff;

pub use error::{Error, Result};
pub use forms::{AltForm, Bilinear, Metric, Multilinear};
pub use lie::{LieAlgebra, ReductiveSpace};

use core::sync::atomic::{AtomicU64, Ordering};

const DEFAULT_VALIDATION_TOL: f64 = 1e-12;

static VALIDATION_TOL_BITS: AtomicU64 = AtomicU64::new(DEFAULT_VALIDATION_TOL.to_bits());

/// Tolerance used when validating structure constants (antisymmetry, Jacobi,
/// reductivity, unimodularity). Defaults to `1e-12`.
pub fn validation_tolerance() -> f64 {
    f64::from_bits(VALIDATION_TOL_BITS.load(Ordering::Relaxed))
}

/// Overrides the structural validation tolerance for the whole process.
pub fn set_validation_tolerance(tol: f64) {
    VALIDATION_TOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

/// Invariance threshold for tensors under the isotropy action.
pub const INVARIANCE_TOL: f64 = 1e-10;
