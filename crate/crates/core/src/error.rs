use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("integrand is not finite at draw {index}")]
    NonFinite { index: usize },

    #[error("singular system: reciprocal condition number {rcond:.3e}")]
    Singular { rcond: f64 },

    #[error("moment condition violated: {0}")]
    MomentCondition(String),

    #[error("oracle minimum lies on the grid boundary at {at:?}; widen the grid")]
    GridBoundary { at: Vec<f64> },

    #[error("degenerate scale estimate: {0}")]
    DegenerateScale(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("no convergence: {0}")]
    NotConverged(String),

    #[error("{failed} of {total} replicates failed to converge")]
    TooManyFailures { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
