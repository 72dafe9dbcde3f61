//! Multi-axis event process typing.
//!
//! An event process (an ordered chain of predicate/object events) is typed
//! along two axes: the overall *action* (a verb label) and the affected
//! *object* (a noun label). Labels are represented through their gloss
//! definitions, encoded with the same text encoder as the process, and the
//! encoder plus two per-axis projections are trained with a margin ranking
//! objective. Inference is a nearest-neighbour scan over gloss embeddings.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`] turns goal/step articles into typed processes, with stats and splits.
//! * [`glosses`] holds the sense inventory and gloss selection strategies.
//! * [`encoder`] renders processes and glosses to token sequences and pools them.
//! * [`model`] has the ranking losses, negative sampling and the training loop.
//! * [`inference`] builds label indexes and ranks labels for a process.
//! * [`evaluation`] computes MRR / recall@k with frequency and length buckets.
//! * [`baselines`] implements the sequence-to-label regressors.
//! * [`config`] parses the flat run configuration.

pub mod baselines;
pub mod config;
pub mod corpus;
pub mod encoder;
pub mod evaluation;
pub mod glosses;
pub mod inference;
pub mod model;
pub mod seed;

mod axis;
mod io;

pub use axis::{Axis, Pos};
pub use io::{read_jsonl, write_jsonl, IoError};
