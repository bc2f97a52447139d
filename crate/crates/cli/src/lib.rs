//! Library side of the `ecs-kit` command-line tool: file formats, the
//! commands themselves, and the seeded round-trip harness. Every command
//! returns its standard output and exit code so it can be driven from tests.

pub mod commands;
pub mod format;
pub mod roundtrip;

use ecs_core::gridmod::GridError;
use ecs_core::{BarcodeError, ReconstructError};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFFER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_MALFORMED: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Malformed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Malformed(_) => EXIT_MALFORMED,
        }
    }
}

impl From<BarcodeError> for CliError {
    fn from(e: BarcodeError) -> Self {
        match e {
            BarcodeError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ReconstructError> for CliError {
    fn from(e: ReconstructError) -> Self {
        match e {
            ReconstructError::Budget(b) => CliError::Budget(b.to_string()),
            m @ ReconstructError::Malformed { .. } => CliError::Malformed(m.to_string()),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// Standard output and exit status of a finished command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    pub fn ok(stdout: String) -> Self {
        Outcome { stdout, code: EXIT_OK }
    }
}
