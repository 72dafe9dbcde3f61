use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the two typing axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Action,
    Object,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::Action, Axis::Object];

    /// Part of speech of the labels on this axis. Never guessed from the label.
    pub fn pos(self) -> Pos {
        match self {
            Axis::Action => Pos::Verb,
            Axis::Object => Pos::Noun,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Action => "action",
            Axis::Object => "object",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "action" => Ok(Axis::Action),
            "object" => Ok(Axis::Object),
            other => Err(format!("unknown axis `{other}` (expected action|object)")),
        }
    }
}

/// Part of speech of a lexeme in the sense inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Verb,
    Noun,
}

impl Pos {
    /// Short code used in sense ids, e.g. `make.v.1`.
    pub fn code(self) -> &'static str {
        match self {
            Pos::Verb => "v",
            Pos::Noun => "n",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pos::Verb => "verb",
            Pos::Noun => "noun",
        })
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "v" | "verb" => Ok(Pos::Verb),
            "n" | "noun" => Ok(Pos::Noun),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}
