use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("query {value} is outside the measured range (minimum {min})")]
    OutOfRange { value: f64, min: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("instance has {variables} binary variables; the exact solver is limited to {limit}")]
    BudgetExceeded { variables: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{kind} `{key}`: {detail}")]
    ConfigKey {
        kind: KeyIssue,
        key: String,
        detail: String,
    },

    #[error("line {line}: {message}")]
    Syntax { line: u64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serialize(String),
}

/// What is wrong with a configuration key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyIssue {
    Unknown,
    Missing,
    WrongType,
    InvalidValue,
}

impl fmt::Display for KeyIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyIssue::Unknown => "unknown key",
            KeyIssue::Missing => "missing key",
            KeyIssue::WrongType => "wrong type for key",
            KeyIssue::InvalidValue => "invalid value for key",
        })
    }
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
