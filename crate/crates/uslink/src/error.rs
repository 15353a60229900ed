//! Crate-wide error type.

use std::fmt;

use crate::params::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates the mathematical domain of an operation.
    Domain(String),
    /// The operation is defined, but not for this configuration
    /// (e.g. spreading codes with anything other than 2-PPM).
    Unsupported(String),
    /// A numerical procedure failed to converge to its tolerance.
    Numeric(String),
    /// A parameter set failed validation; the report lists every violation.
    InvalidParams(ValidationReport),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::InvalidParams(report) => write!(f, "invalid parameters: {report}"),
        }
    }
}

impl std::error::Error for Error {}
