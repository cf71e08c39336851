//! Command errors and their exit codes.

use std::fmt::Display;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unreadable or malformed files, violated preconditions.
    #[error("validation error: {0}")]
    Validation(String),
    /// A computed check missed its tolerance.
    #[error("tolerance failure: {0}")]
    Tolerance(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn validation(msg: impl Display) -> Self {
        CliError::Validation(msg.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) | CliError::Csv(_) => 2,
            CliError::Tolerance(_) => 3,
        }
    }
}

/// Core errors all describe inputs outside an operation's domain.
macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        }
    )*};
}

validation_from!(
    ustfield_core::builders::BuildError,
    ustfield_core::dpp::DppError,
    ustfield_core::fields::FieldError,
    ustfield_core::forests::ForestError,
    ustfield_core::graph::GraphError,
    ustfield_core::green::GreenError,
    ustfield_core::oracle::OracleError,
    ustfield_core::sandpile::SandpileError,
    crate::formats::FormatError
);
