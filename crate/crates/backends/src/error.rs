use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    /// A single failed request that may succeed if retried (connection
    /// error, timeout, 429, 5xx).
    #[error("transient backend failure: {0}")]
    Transient(String),
    /// Retries were exhausted.
    #[error("backend {backend} unavailable after {attempts} attempts: {message}")]
    Unavailable { backend: String, attempts: u32, message: String },
    /// The service answered, but not in the agreed shape.
    #[error("backend protocol error: {0}")]
    Protocol(String),
    #[error("backend configuration error: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transient(_))
    }
}
