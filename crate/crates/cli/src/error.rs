use std::fmt;

use tepui_core::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// A check or fixture did not pass.
    Check(String),
    Parse(String),
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn parse(e: impl fmt::Display) -> Self {
        CliError::Parse(e.to_string())
    }

    pub fn domain(e: impl fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Core errors raised while computing (inputs already parsed).
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::UnknownVariable(_) => CliError::parse(e),
            _ => CliError::domain(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
