//! Command failures and their exit codes.

use wgm_qed::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => EXIT_IO,
            Error::Csv(c) if c.is_io_error() => EXIT_IO,
            Error::Pole { .. }
            | Error::Singular(_)
            | Error::NonFinite { .. }
            | Error::DegenerateSteadyState { .. }
            | Error::NoEmission(_)
            | Error::Fit(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}
