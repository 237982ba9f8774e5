use alloc::boxed::Box;
use alloc::string::String;

use crate::bo::BoTrace;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input is empty")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("points {first} and {second} coincide but carry different values")]
    ConflictingDuplicate { first: usize, second: usize },

    #[error("kernel matrix could not be factorized (last jitter tried: {jitter:e})")]
    IllConditioned { jitter: f64 },

    #[error("subdomain {subdomain}: {source}")]
    Subdomain { subdomain: usize, source: Box<Error> },

    #[error("every trial of the parameter search failed ({} trials)", trace.len())]
    SubdomainSearchFailed { trace: Box<BoTrace> },

    #[error("radius search for center {center} passed the unit-cube diagonal")]
    RadiusSearchDefect { center: usize },

    #[error("relative metric undefined: every reference value is below the zero threshold")]
    UndefinedMetric,
}

impl Error {
    pub(crate) fn in_subdomain(self, subdomain: usize) -> Self {
        Error::Subdomain { subdomain, source: Box::new(self) }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
