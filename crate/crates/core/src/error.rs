use thiserror::Error;

/// Errors raised anywhere in the planning stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionError { expected: usize, got: usize },
    #[error("workspace variant mismatch: {0}")]
    TypeError(String),
    #[error("parameter {0} outside [0, 1]")]
    RangeError(f64),
    #[error("paths do not glue: endpoint gap {gap:e}")]
    GlueError { gap: f64 },
    #[error("target is outside the reachable workspace")]
    Unreachable,
    #[error("target is outside the domain of inverse branch {0}")]
    BranchDomainError(String),
    #[error("mechanism has no global continuous inverse")]
    NoGlobalInverse,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("jacobian degenerates during lift at t={t}: smallest singular value {sigma:e}")]
    SingularEncounter { t: f64, sigma: f64 },
    #[error("newton corrector failed to converge at t={t} (residual {residual:e})")]
    NewtonDivergence { t: f64, residual: f64 },
    #[error("lift start does not match the path start (gap {gap:e})")]
    StartMismatch { gap: f64 },
    #[error("no chart covers the query")]
    NoChart,
    #[error("inverse branches leave workspace points uncovered")]
    CoverageGap { witnesses: usize },
    #[error("algebra too large: {0}")]
    SizeError(String),
    #[error("construction failed: {0}")]
    ConstructionError(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
