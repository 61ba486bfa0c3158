//! Library error type.

use std::fmt;

/// Errors raised by the simulator.
///
/// The three variants map onto the CLI exit-code contract: `Config` and
/// `Usage` are caller mistakes (exit 1), `Domain` is a numerical-domain
/// violation (exit 2).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration invariant is violated (odd element count, bad field
    /// in a sweep spec, non-positive power, ...).
    Config(String),
    /// An operation was asked to evaluate outside its mathematical domain
    /// (pattern radius beyond the Rayleigh distance, rate with zero noise).
    Domain(String),
    /// An operation was called with structurally wrong inputs (empty
    /// codebook, wrong codebook kind).
    Usage(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
