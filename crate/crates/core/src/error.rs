use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("address error: {0}")]
    Address(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("memory guard exceeded: {requested} vertices requested, limit {limit}")]
    Guard { requested: String, limit: u64 },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("inequality violated: {0}")]
    Violation(String),
    #[error("comparison undecided at {0} bits")]
    Undecided(u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that mean a theorem-level inequality did not hold.
    pub fn is_violation(&self) -> bool {
        matches!(self, Error::Violation(_))
    }
}
