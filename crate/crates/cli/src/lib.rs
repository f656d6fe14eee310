//! Pipeline stages behind the `lyricarc` command.

use std::fmt;

pub mod artifacts;
pub mod config;
pub mod pipeline;
pub mod svg;

/// Exit code 1 for bad input or configuration, 2 for runtime failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "error: {m}"),
            Self::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
