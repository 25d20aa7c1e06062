use std::io;

/// Errors raised by the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Parameters outside the region where a formula or theorem applies.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller broke a structural precondition (size or grid mismatch).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A quadrature or fit could not be trusted.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
