use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("structure constants must be an n x n x n array (got {0})")]
    NotCubical(String),
    #[error("antisymmetry violated at ({i},{j},{k}): defect {defect:e}")]
    AntisymmetryViolation { i: usize, j: usize, k: usize, defect: f64 },
    #[error("Jacobi identity violated at triple {triple:?}: defect {defect:e}")]
    JacobiViolation { triple: [usize; 3], defect: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index sets do not partition the basis: {0}")]
    BadPartition(String),
    #[error("decomposition is not reductive: [{which}] component of [e{i}, e{j}] is {value:e}")]
    NotReductive { which: &'static str, i: usize, j: usize, value: f64 },
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("invalid degree {0} for this operation")]
    InvalidDegree(usize),
    #[error("metric is singular or not positive definite")]
    SingularMetric,
    #[error("metric is not symmetric (defect {0:e})")]
    AsymmetricMetric(f64),
    #[error("ambient algebra is not unimodular: trace ad(e{index}) = {trace:e}")]
    NotUnimodular { index: usize, trace: f64 },
    #[error("metric is not isotropy invariant (defect {0:e})")]
    NonInvariantMetric(f64),
    #[error("parameters outside the chart domain: {0}")]
    OutOfDomain(String),
    #[error("solver hit the iteration cap ({iterations}) with residual {residual:e} at {params:?}")]
    MaxIterations { iterations: usize, residual: f64, params: Vec<f64> },
    #[error("solver left the chart domain; last in-domain iterate {params:?} with residual {residual:e}")]
    LeftDomain { residual: f64, params: Vec<f64> },
    #[error("chart differential is rank deficient (rank {rank} < {expected})")]
    ChartDegenerate { rank: usize, expected: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("trajectory left the domain at t = {t}; last valid state {state:?}")]
    DomainExit { t: f64, state: Vec<f64> },
    #[error("p and q must be coprime (got p = {p}, q = {q})")]
    NotCoprime { p: u32, q: u32 },
    #[error("expected p >= q >= 1 (got p = {p}, q = {q})")]
    BadOrder { p: u32, q: u32 },
    #[error("Killing form is not negative definite; not of compact type")]
    NotCompactType,
    #[error("Kobayashi condition {condition}) violated (defect {defect:e})")]
    ConditionViolated { condition: char, defect: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
