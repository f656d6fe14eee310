//! Sentiment trajectory analysis for lyric corpora.
//!
//! The pipeline runs in four steps:
//!
//! 1. [`corpus`] loads lyrics with their video metadata and derives
//!    per-100-day engagement rates.
//! 2. [`trajectory`] scores each lyric against a [`lexicon`] with
//!    valence-shifter correction and resamples the result to a fixed
//!    narrative-time grid.
//! 3. [`clustering`] groups trajectories with k-means and summarises
//!    each group's shape.
//! 4. [`stats`] tests cluster co-membership and regresses popularity
//!    counts on cluster membership.

pub mod clustering;
pub mod corpus;
pub mod lexicon;
pub mod stats;
pub mod trajectory;

pub use clustering::{AggregateShape, ClusterDiagnostics, ClusterModel, ShapeStat};
pub use corpus::{LyricRecord, RateMetrics, VideoMetadata};
pub use lexicon::{SentimentLexicon, ShifterClass, ShifterLexicon};
pub use stats::{ChiSquareResult, ContingencyTable2x2, DesignMatrix, NbFit};
pub use trajectory::{SparseSentimentVector, TokenStream, Trajectory};

/// Version string recorded in every output artifact.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
