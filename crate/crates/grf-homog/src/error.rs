use std::fmt;

use grf_homog_core::Error;

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    CheckFailed = 1,
    Usage = 2,
    Numerical = 3,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { status: ExitStatus::Usage, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { status: ExitStatus::Numerical, message: message.into() }
    }

    pub fn check(message: impl Into<String>) -> Self {
        CliError { status: ExitStatus::CheckFailed, message: message.into() }
    }

    /// Prefixes the message with where the error happened.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Solver and integrator failures are numerical; everything else the core
/// reports stems from the inputs.
pub fn status_of(err: &Error) -> ExitStatus {
    match err {
        Error::MaxIterations { .. }
        | Error::LeftDomain { .. }
        | Error::ChartDegenerate { .. }
        | Error::StepUnderflow { .. }
        | Error::DomainExit { .. } => ExitStatus::Numerical,
        Error::ConditionViolated { .. } => ExitStatus::CheckFailed,
        _ => ExitStatus::Usage,
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError { status: status_of(&err), message: err.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::usage(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::usage(format!("invalid JSON: {err}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
