use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{value} is not a square modulo {modulus}")]
    NoSquareRoot { value: u64, modulus: u64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("found factor {divisor} of {n}")]
    FactorFound { n: u64, divisor: u64 },

    #[error("radicand {c} shares a factor with {q}")]
    SharedFactor { q: u64, c: i64 },

    #[error("norm of the base is divisible by {p}")]
    NormNotInvertible { p: u64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("no Frobenius index <= {cap} for {n}")]
    IndexCapExceeded { n: u64, cap: i64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
