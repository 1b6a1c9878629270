use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("unknown inner method `{0}`")]
    UnknownInner(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("degenerate abscissae: {0}")]
    DegenerateAbscissae(String),
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("inner method does not satisfy bushy-tree condition b^T c^{k} = 1/{den}", den = k + 1)]
    BushyTree { k: usize },
    #[error("degenerate embedding: order-{0} embedded residual vector is zero")]
    DegenerateEmbedding(usize),
    #[error("order-{0} residuals are not available")]
    OrderUnavailable(usize),
    #[error("matrix is singular (zero pivot in column {0})")]
    Singular(usize),
    #[error("newton iteration failed: {0}")]
    NewtonFailure(String),
    #[error("fast solve diverged at theta = {0}")]
    FastDivergence(f64),
    #[error("step failed in stage {stage}: {reason}")]
    StepFailure { stage: usize, reason: String },
    #[error("step size {0:e} fell below the minimum")]
    StepSizeTooSmall(f64),
    #[error("adaptive run stuck oscillating between accepted and rejected steps at t = {0}")]
    Oscillation(f64),
    #[error("reference solution did not converge: {0}")]
    ReferenceFailure(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
