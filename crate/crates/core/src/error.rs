use std::path::PathBuf;

use crate::apfree::RkTable;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The node budget ran out while deciding `r_k(ell)`. The true value lies
    /// in `lower..=upper`; `prefix` holds every row that was fully verified.
    #[error(
        "search budget of {budget} nodes exhausted at ell = {ell} (r_k(ell) in {lower}..={upper})"
    )]
    BudgetExhausted {
        budget: u64,
        ell: usize,
        lower: usize,
        upper: usize,
        prefix: Option<Box<RkTable>>,
    },

    #[error("r_k table for k = {k} reaches ell = {available}, need ell = {required}")]
    TableInsufficient {
        k: usize,
        required: usize,
        available: usize,
    },

    #[error("{what} = {value} exceeds the oracle cap {cap} (exhaustive search is exponential)")]
    OverOracleCap {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt cache file {}: {reason}", path.display())]
    CorruptCache { path: PathBuf, reason: String },

    #[error("cache format version mismatch: file has {found}, this build reads {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("refusing to replace cached table reaching ell = {existing} with a shorter one (ell = {new})")]
    WouldTruncate { existing: usize, new: usize },

    #[error("invalid table: {0}")]
    InvalidTable(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
