use thiserror::Error;

/// Failure modes shared by every module of the lab.
///
/// Numeric payloads are carried as `f64` approximations; they are for
/// reporting only and never fed back into a computation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LabError {
    #[error("operator is zero")]
    ZeroOperator,
    #[error("operator is not injective (smallest singular value {sigma_min:e})")]
    NonInjective { sigma_min: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector is zero")]
    ZeroVector,
    #[error("x0 must be a unit vector (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("linear solve failed: {reason}")]
    SolveFailure { reason: String },
    #[error("target distance {target} unattainable, infimum {infimum}")]
    Unattainable { target: f64, infimum: f64 },
    #[error("constraint set empty: distance to Krylov span {distance} exceeds {target}")]
    Infeasible { target: f64, distance: f64 },
    #[error("degenerate triple: independence {measure:e} below {threshold:e}")]
    Degenerate { measure: f64, threshold: f64 },
    #[error("line search found no admissible scale")]
    LineSearchFail,
    #[error("triple is not degenerate: residual {residual:e} above {threshold:e}")]
    NotDegenerate { residual: f64, threshold: f64 },
    #[error("scan exhausted without reaching threshold {threshold:e}")]
    ScanExhausted {
        threshold: f64,
        /// (eps, eps_theta, coefficient norm) at each visited grid point
        growth: Vec<(f64, f64, f64)>,
    },
    #[error("probe set is empty")]
    EmptyProbeSet,
    #[error("Krylov vectors dependent: achieved rank {achieved} of {requested}")]
    RankDeficient { achieved: usize, requested: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type LabResult<T> = Result<T, LabError>;
