use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrator failure at r = {r}: {msg}")]
    Integrator { r: f64, msg: String },
    #[error("no shooting bracket: {0}")]
    NoBracket(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
