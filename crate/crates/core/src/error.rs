use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("window too large: {0}")]
    WindowTooLarge(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("step size: {0}")]
    StepSize(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
