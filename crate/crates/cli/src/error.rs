use std::process::ExitCode;

use thiserror::Error;

/// Failure category, one exit code each.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("scenario error: {0}")]
    Scenario(aoe_core::Error),
    #[error("compute error: {0}")]
    Compute(aoe_core::Error),
    #[error("I/O error: {0}")]
    Io(aoe_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Scenario(_) => 3,
            CliError::Compute(_) => 4,
            CliError::Io(_) => 5,
        })
    }
}

impl From<aoe_core::Error> for CliError {
    fn from(e: aoe_core::Error) -> Self {
        use aoe_core::Error as E;
        match e {
            E::Parse(_)
            | E::Validation(_)
            | E::DimensionMismatch { .. }
            | E::NonNumericCell { .. }
            | E::UnknownAccessPoint(_) => CliError::Scenario(e),
            E::EmptyMap | E::SearchSpaceOverflow { .. } => CliError::Compute(e),
            E::InvalidArgument(msg) => CliError::Config(msg),
            E::Io { .. } => CliError::Io(e),
        }
    }
}
