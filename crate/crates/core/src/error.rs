use thiserror::Error;

/// Errors produced by the transform, codec, oracle and simulator layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Malformed encoded payload. `position` is the byte offset where decoding stopped.
    #[error("format error at byte {position}: {reason}")]
    Format { position: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterate left the region where the oracle norm bound is certified.
    #[error("iterate x_{t} left the trust region: ||x|| = {norm} > R = {radius}")]
    TrustRegion { t: u64, norm: f64, radius: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(position: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            position,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
