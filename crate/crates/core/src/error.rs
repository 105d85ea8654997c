use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A map evaluation produced a non-finite value or received an invalid parameter tuple.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("no convergence after {depth} steps (achieved bound {bound:e})")]
    Convergence { depth: usize, bound: f64 },

    #[error("replica {replica}: {inner}")]
    InReplica { replica: usize, inner: Box<Error> },

    #[error("no Cramér exponent in bracket [{lo}, {hi}]")]
    NoCramerExponent { lo: f64, hi: f64 },

    /// The moment function overflowed or lost all precision at `s`.
    #[error("moment function diverges at s = {s}")]
    Divergence { s: f64 },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Convergence,
    Capacity,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InReplica { inner, .. } => inner.kind(),
            Error::InvalidDistribution(_)
            | Error::InvalidModel(_)
            | Error::Configuration(_)
            | Error::Precondition(_) => ErrorKind::Config,
            Error::Convergence { .. } => ErrorKind::Convergence,
            Error::Capacity(_) => ErrorKind::Capacity,
            Error::DomainViolation(_)
            | Error::NoCramerExponent { .. }
            | Error::Divergence { .. }
            | Error::InvalidExponent(_)
            | Error::Degenerate(_) => ErrorKind::Numeric,
        }
    }

    pub(crate) fn in_replica(self, replica: usize) -> Error {
        Error::InReplica {
            replica,
            inner: Box::new(self),
        }
    }
}
