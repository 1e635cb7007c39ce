use std::fmt;

use gatedspad::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_VERIFY: u8 = 5;

/// A failure carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERIC, message: message.into() }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        Self { code: EXIT_VERIFY, message: message.into() }
    }

    /// Library errors raised while validating command-line values.
    pub fn from_flag(flag: &str, err: Error) -> Self {
        match err {
            Error::SingularFit(_) | Error::Domain(_) | Error::Convergence { .. } => Self::numeric(err.to_string()),
            _ => Self::usage(format!("{flag}: {err}")),
        }
    }

    /// Library errors raised while reading a user-supplied file.
    pub fn from_file(path: &str, err: Error) -> Self {
        match err {
            Error::SingularFit(_) | Error::Domain(_) | Error::Convergence { .. } => Self::numeric(err.to_string()),
            _ => Self::io(format!("{path}: {err}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {path}: {e}")))
}
