//! Debiased implicit-feedback recommendation.
//!
//! Users and items each carry two embedding tables: a base table that is
//! allowed to absorb popularity and conformity effects, and a debiased
//! table used for ranking. Training combines BPR on the debiased tables
//! with two hinge terms that push the debiased score away from the mixed
//! base/debiased scores.
//!
//! Pipeline: [`ingest`] → [`split`] → [`trainer`] (with [`backbone`],
//! [`objective`], [`sampler`]) → [`eval`]. [`audit`] measures the
//! praise/popularity correlation on star-rated logs and [`synth`] builds
//! confounded data with known ground truth.

pub mod audit;
pub mod backbone;
pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod objective;
pub mod sampler;
pub mod split;
pub mod synth;
pub mod trainer;
pub mod types;

pub use error::{Error, Result};
pub use trainer::{train, Method, TrainReport, Trained};
pub use types::{
    Backbone, EmbeddingSet, HingeOrientation, HyperParams, Interaction, PnsmMode, SplitDataset,
    Table, TableId, TrainTriple,
};
