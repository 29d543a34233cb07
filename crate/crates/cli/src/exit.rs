//! Exit codes and the error type that carries them.

use std::fmt;

use helmholtz_core::Error;

pub const OK: u8 = 0;
/// A smallness or contraction gate refused the run.
pub const GATE_FAIL: u8 = 2;
/// The run finished but some identity or residual missed its tolerance.
pub const TOLERANCE_FAIL: u8 = 3;
pub const INPUT_ERROR: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: INPUT_ERROR, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotContractive { .. } => GATE_FAIL,
            Error::MaxIterations { .. } | Error::ExtrapolationUnstable { .. } => TOLERANCE_FAIL,
            _ => INPUT_ERROR,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}
