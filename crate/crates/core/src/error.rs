use thiserror::Error;

pub type Result<T, E = QrcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QrcError {
    #[error("divergent orbit at step {step}")]
    DivergentOrbit { step: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numerical safety check tripped (trace drift, non-finite values, ...).
    #[error("numerical guard: {0}")]
    NumericalGuard(String),

    #[error("degenerate ranks: rank variance is zero")]
    DegenerateRanks,

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl QrcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QrcError::InvalidInput(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        QrcError::Dimension(msg.into())
    }

    pub(crate) fn guard(msg: impl Into<String>) -> Self {
        QrcError::NumericalGuard(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        QrcError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            QrcError::DivergentOrbit { .. } | QrcError::NumericalGuard(_) => 2,
            _ => 1,
        }
    }
}
