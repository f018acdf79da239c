use thiserror::Error;

/// Errors produced by the allocation, simulation and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lambert_w0 argument {0} is below the branch point -1/e")]
    LambertDomain(f64),

    #[error("lambert_w0 failed to converge for x = {x} (residual {residual:e})")]
    LambertConvergence { x: f64, residual: f64 },

    #[error("no sign change found after {doublings} bracket doublings")]
    NoSignChange { doublings: u32 },

    #[error("root finder evaluated a non-finite value at {at}")]
    NonFinite { at: f64 },

    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("allocator produced z_{user} = {z} <= c_{user} = {c} in transmit mode")]
    PositivityViolated { user: usize, z: f64, c: f64 },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
