use crate::optics::parse::ParseError;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A state or process failed its physicality invariants (Hermiticity,
    /// unit trace, positivity) beyond the configured slack.
    #[error("physicality violation: {0}")]
    Physicality(String),

    #[error("circuit error: {0}")]
    Circuit(#[from] ParseError),

    #[error("config error: {0}")]
    Config(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn physicality(msg: impl Into<String>) -> Self {
        Error::Physicality(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI front ends: 2 config/input error,
    /// 3 non-convergence, 4 physicality violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 3,
            Error::Physicality(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
