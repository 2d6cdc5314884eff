use thiserror::Error;

/// Errors raised by the estimator and its harness.
///
/// A rounding attempt that ends in FAIL is not an error; see
/// [`crate::rounding::RoundingOutcome`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("support enumeration needs C(n,k) = {supports} supports, budget is {budget}")]
    Budget { supports: u128, budget: u128 },

    #[error("filter exceeded its soft iteration cap of {cap} (|T'| = {remaining})")]
    IterationCap { cap: usize, remaining: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
