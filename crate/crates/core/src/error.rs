use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field modulus mismatch: GF({0}) vs GF({1})")]
    ModulusMismatch(u64, u64),

    #[error("division by zero in GF({0})")]
    DivisionByZero(u64),

    /// The linear system handed to the solver is singular.
    #[error("rank-deficient system: no nonzero pivot in column {column}")]
    RankDeficient { column: usize },

    /// Problem parameters violate a structural constraint.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The caller passed arguments that do not fit the operation.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("enumeration of {needed} terms exceeds the configured limit of {limit}")]
    EnumerationLimit { needed: u128, limit: u64 },

    #[error("internal consistency violation: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("network failure ({context}): {source}")]
    Network {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// The peer sent bytes that violate the wire format.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// The server rejected the request with the given reason code.
    #[error("server rejected the request: {0}")]
    Remote(String),

    /// A well-formed answer that cannot belong to the query that was sent.
    #[error("answer inconsistent with query: {0}")]
    DecodeInconsistency(String),

    #[error("value out of range for the wire format: {0}")]
    Encoding(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn network(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Network {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
