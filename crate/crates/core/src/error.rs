use thiserror::Error;

/// Errors raised by the resolution engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("unsupported reduction: {0}")]
    UnsupportedReduction(String),
    #[error("no center: singular locus is empty")]
    NoCenter,
    #[error("illegal center {0}: not contained in the singular locus")]
    IllegalCenter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported strategy: {0}")]
    UnsupportedStrategy(String),
    #[error("indeterminate result: {0}")]
    Indeterminate(String),
    #[error("smooth input: critical value {0} < 2")]
    SmoothInput(u64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
