use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("flow extinct within step at t = {t}")]
    FlowExtinct { t: f64 },
    #[error("resolution exhausted at t = {t}")]
    ResolutionExhausted { t: f64 },
    #[error("no limit detected: {0}")]
    NoLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
