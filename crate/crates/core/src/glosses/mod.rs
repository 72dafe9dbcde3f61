//! Sense inventory and gloss selection.
//!
//! A label is represented by one (or, for the WSD strategy, several) gloss
//! definitions. Part of speech always follows the axis: action labels are
//! looked up as verbs and object labels as nouns.

mod inventory;
mod select;
mod wsd;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use inventory::{Sense, SenseInventory};
pub use select::{
    candidate_glosses, fallback_nearest_lexeme, select_mfs, select_wsd, GlossAssignment,
    GlossResolver,
};
pub use wsd::{LeskWsd, MfsWsd, WsdBackend};

use crate::Pos;

#[derive(Debug, thiserror::Error)]
pub enum GlossError {
    #[error("sense inventory is empty")]
    EmptyInventory,
    #[error("fallback unavailable: {0}")]
    FallbackUnavailable(String),
    #[error("no gloss for label(s): {}", .0.join(", "))]
    Unresolvable(Vec<String>),
    #[error("inventory line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate rank {rank} for {lexeme}/{pos}")]
    DuplicateRank { lexeme: String, pos: Pos, rank: u32 },
    #[error("unknown gloss strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Io(#[from] crate::IoError),
}

/// How a label's gloss(es) are chosen for training and indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GlossStrategy {
    /// Predominant sense only.
    Mfs,
    /// Sense picked per training case by a WSD backend; every sense is a candidate at inference.
    Wsd,
    /// One synthetic gloss concatenating every sense.
    ConcatAll,
    /// One synthetic gloss concatenating the `k` predominant senses.
    ConcatTopK(usize),
}

impl fmt::Display for GlossStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlossStrategy::Mfs => f.write_str("mfs"),
            GlossStrategy::Wsd => f.write_str("wsd"),
            GlossStrategy::ConcatAll => f.write_str("concat-all"),
            GlossStrategy::ConcatTopK(k) => write!(f, "concat-top-{k}"),
        }
    }
}

impl FromStr for GlossStrategy {
    type Err = GlossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mfs" => Ok(GlossStrategy::Mfs),
            "wsd" | "all" => Ok(GlossStrategy::Wsd),
            "concat-all" => Ok(GlossStrategy::ConcatAll),
            other => other
                .strip_prefix("concat-top-")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k >= 1)
                .map(GlossStrategy::ConcatTopK)
                .ok_or_else(|| GlossError::UnknownStrategy(s.to_string())),
        }
    }
}

impl From<GlossStrategy> for String {
    fn from(s: GlossStrategy) -> Self {
        s.to_string()
    }
}

impl TryFrom<String> for GlossStrategy {
    type Error = GlossError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
