use alloc::string::String;

use thiserror::Error;

/// Errors produced by the core numerics.
///
/// The variants map onto three failure classes used by the command line:
/// usage (`InvalidInput`, `InvalidIndex`, `NoCriticalRadius`), domain
/// (`Domain`) and numerical (`Resonance`, `Bisection`).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid harmonic index (n = {n}, k = {k}): require |k| <= n")]
    InvalidIndex { n: usize, k: i64 },

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("resonant (vanishing) transmission denominator at degree {n}")]
    Resonance { n: usize },

    #[error("no critical radius exists in regime {0}")]
    NoCriticalRadius(&'static str),

    #[error("critical-radius bisection failed: {0}")]
    Bisection(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that come from a bad request rather than the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::InvalidIndex { .. } | Error::NoCriticalRadius(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
