//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised when a computation is handed inputs outside its domain or
/// when persisted artifacts cannot be read back.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter lies outside the range the formula is defined on.
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} index {index} out of range (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{what}: expected length {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The bound diverges at the requested parameter value.
    #[error("bound is singular: {0}")]
    Singularity(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A codebook or config file does not follow the documented format.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}

/// Fails with a domain error unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(domain(name, value, reason))
    }
}
