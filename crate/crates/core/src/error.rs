use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("diffusion matrix is not positive definite at {point:?}")]
    SingularMatrix { point: Vec<f64> },

    #[error("deterministic quadrature supports d <= 2, got d = {dim}; use the Monte Carlo evaluator")]
    UnsupportedQuadDim { dim: usize },

    #[error("work budget exceeded: {requested} > {budget}")]
    BudgetExceeded { requested: usize, budget: usize },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("validation failed at {point:?}: {what} (value {value:.3e})")]
    ValidationFailed {
        what: String,
        point: Vec<f64>,
        value: f64,
    },

    #[error("bad time grid: {0}")]
    BadGrid(String),

    #[error("insufficient Monte Carlo budget: standard error {stderr:.3e} exceeds tolerance {tol:.3e}")]
    InsufficientBudget { stderr: f64, tol: f64 },

    #[error("quadrature tolerance not met: error estimate {estimate:.3e} > {tol:.3e}")]
    ToleranceNotMet { estimate: f64, tol: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
