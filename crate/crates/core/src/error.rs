use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("user/item pair ({user}, {item}) appears in both {first} and {second}")]
    Overlap {
        user: u32,
        item: u32,
        first: &'static str,
        second: &'static str,
    },

    #[error("{kind} id {id} out of range (count {count})")]
    Range {
        kind: &'static str,
        id: u32,
        count: usize,
    },

    #[error("popularity of item {item} is {stored}, train set has {actual}")]
    PopularityMismatch { item: usize, stored: u32, actual: u32 },

    #[error("split would leave the {0} partition empty")]
    EmptySplit(&'static str),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("lightgcn backbone requires a propagation graph")]
    GraphMissing,

    #[error("item {0} has zero popularity and cannot receive an inverse-propensity weight")]
    ZeroPopularity(usize),

    #[error("user {0} is positive on every item; no negative can be drawn")]
    NoNegativeAvailable(usize),

    #[error("training diverged at epoch {epoch}: {what}")]
    Diverged { epoch: usize, what: String },

    #[error("k = {k} exceeds the {available} candidate items of user {user}")]
    KTooLarge { user: usize, k: usize, available: usize },

    #[error("ground-truth set is empty")]
    EmptyTruth,

    #[error("reference recall is zero")]
    ZeroReference,

    #[error("input is empty")]
    EmptyInput,

    #[error("series is constant; correlation undefined")]
    ConstantSeries,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
