use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("resource cap exceeded: {what} needs {needed_bytes} bytes, cap is {cap_bytes}")]
    Resource {
        what: String,
        needed_bytes: u128,
        cap_bytes: u128,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("numerical failure in {what} (residual {residual:e})")]
    Numeric { what: String, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Parameter(_) | Error::DimensionMismatch { .. } | Error::Validation(_) => 3,
            Error::Resource { .. } => 4,
            Error::Numeric { .. } | Error::Io(_) => 1,
        }
    }
}
