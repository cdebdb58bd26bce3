use std::fmt;

use ssmlab::Error;

/// Failure of a command, carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// Bad input that the core never saw: malformed flags, table files.
    Input(String),
    Io(String),
    /// An output failed its own schema check.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) | CliError::Input(_) => 2,
            CliError::Output(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(m) => f.write_str(m),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Output(m) => write!(f, "output check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
