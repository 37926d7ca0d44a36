use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("unknown leaf label {0}")]
    UnknownLabel(u32),

    #[error("empty sample")]
    EmptySample,

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
