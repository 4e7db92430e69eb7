use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("operands live on different bases")]
    BasisMismatch,
    #[error("eigensolver did not converge (best residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("degenerate projection (projected norm {0:.3e})")]
    DegenerateProjection(f64),
    #[error("optimization failed: {0}")]
    Optimization(String),
    #[error("no transition found: {0}")]
    NoTransition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
