use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {lo}..={hi}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("history spaces differ (n = {0} vs n = {1})")]
    SpaceMismatch(usize, usize),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("infeasible normalisation: {0}")]
    InfeasibleNormalization(String),
    #[error("no preclusive coevent: {0}")]
    NoCoevent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range<T>(what: &'static str, value: usize, lo: usize, hi: usize) -> Result<T> {
    Err(Error::OutOfRange {
        what,
        value: value as i64,
        lo: lo as i64,
        hi: hi as i64,
    })
}
