//! Adaptive clip selection for untrimmed video recognition.
//!
//! Untrimmed videos carry many clips that are uninformative, misleading, or
//! redundant. This crate selects a small, video-dependent subset in three
//! composable stages over precomputed clip logits: an entropy skim drops
//! low-confidence clips, a tiny class discriminator drops clips outside the
//! labeled activity, and a greedy scan keeps adding the clip most divergent
//! from the running aggregate until nothing new remains. A benchmark harness
//! pits the pipeline against dense, random, uniform, and top-confidence
//! baselines under a GFLOPs cost model, and a seeded generator produces
//! synthetic datasets with controllable clip archetypes for testing.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod discriminator;
pub mod error;
pub mod infotheory;
pub mod io;
pub mod learning;
pub mod selection;
pub mod synthgen;

pub use error::{Error, Result};
