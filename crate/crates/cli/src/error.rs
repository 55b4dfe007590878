//! Exit-code bearing error type for the binary.

use std::fmt;

/// Failure classes with fixed exit codes: 1 validation, 2 threshold
/// (computation ran but results violated configured acceptance limits),
/// 3 I/O.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Threshold(String),
    Io(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    pub fn threshold(msg: impl Into<String>) -> Self {
        Self::Threshold(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self::Io(msg.into())
    }

    pub fn code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Threshold(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) | Self::Threshold(m) | Self::Io(m) => f.write_str(m),
        }
    }
}

impl From<swarm_escape::Error> for CliError {
    fn from(e: swarm_escape::Error) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
