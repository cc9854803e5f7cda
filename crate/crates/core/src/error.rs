use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {op}: {msg}")]
    Dimension { op: &'static str, msg: String },

    #[error("{op}: {msg}")]
    Numerical { op: &'static str, msg: String },

    #[error("partition is not externally equitable (residual {residual:.3e})")]
    NotEquitable { residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Numerical { op, msg: msg.into() }
    }

    pub(crate) fn dim(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Dimension { op, msg: msg.into() }
    }

    /// Process exit code for the command-line front end: 3 for numerical
    /// failures, 2 for everything caused by the caller's input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
