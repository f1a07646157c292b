use thiserror::Error;

/// Error type shared by every stage of the simulator.
#[derive(Debug, Error)]
pub enum QdfError {
    /// Malformed or inconsistent input (dimensions, non-finite values, ranges).
    #[error("input error: {0}")]
    Input(String),
    /// A quantum state was requested from data with zero norm.
    #[error("state undefined: {0}")]
    StateUndefined(String),
    /// A simulation would exceed a configured size cap.
    #[error("resource limit: {0}")]
    Resource(String),
    /// The requested precision cannot support a reliable result.
    #[error("precision error: {0}")]
    Precision(String),
    /// The computation degenerated (e.g. zero post-selection probability).
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QdfError>;

impl QdfError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        QdfError::Input(msg.into())
    }
}
