use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not a valid {what}: {reason}")]
    InvalidMatrix { what: &'static str, reason: String },

    #[error("transmission pole at omega = {omega} rad/ns (|denominator| = {magnitude:e})")]
    Pole { omega: f64, magnitude: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("time step {dt} ns exceeds the stability limit {limit} ns")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("non-finite density matrix entry at t = {time} ns")]
    NonFinite { time: f64 },

    #[error("steady state is not unique (residual {residual:e})")]
    DegenerateSteadyState { residual: f64 },

    #[error("no emission: {0}")]
    NoEmission(String),

    #[error("fit setup error: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
