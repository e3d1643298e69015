//! Error classification mapped onto process exit codes.

use std::fmt;

/// Harness error with a stable exit-code mapping: 1 for invalid
/// configuration, 2 for I/O failures, 3 for task/ansatz inconsistencies.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Task(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Task(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
            CliError::Task(m) => write!(f, "task inconsistency: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
