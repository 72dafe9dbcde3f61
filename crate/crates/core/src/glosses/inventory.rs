use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GlossError;
use crate::encoder::StaticVectors;
use crate::{IoError, Pos};

/// One sense definition of a lexeme. Rank 1 is the predominant sense; rank 0
/// is reserved for synthetic concatenated glosses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sense {
    pub lexeme: String,
    pub pos: Pos,
    pub rank: u32,
    pub definition: String,
}

impl Sense {
    pub fn new(lexeme: impl Into<String>, pos: Pos, rank: u32, definition: impl Into<String>) -> Self {
        Sense {
            lexeme: lexeme.into(),
            pos,
            rank,
            definition: definition.into(),
        }
    }

    /// `make.v.2`, or `make.v.concat` for a synthetic gloss.
    pub fn id(&self) -> String {
        if self.rank == 0 {
            format!("{}.{}.concat", self.lexeme, self.pos.code())
        } else {
            format!("{}.{}.{}", self.lexeme, self.pos.code(), self.rank)
        }
    }

    pub fn is_synthetic(&self) -> bool {
        self.rank == 0
    }
}

/// Immutable sense inventory, optionally with static lemma vectors used by
/// the nearest-lexeme fallback.
#[derive(Debug, Clone, Default)]
pub struct SenseInventory {
    senses: BTreeMap<(String, Pos), Vec<Sense>>,
    lemma_vectors: Option<StaticVectors>,
}

impl SenseInventory {
    pub fn from_senses(senses: impl IntoIterator<Item = Sense>) -> Result<Self, GlossError> {
        let mut map: BTreeMap<(String, Pos), Vec<Sense>> = BTreeMap::new();
        for (i, s) in senses.into_iter().enumerate() {
            if s.definition.trim().is_empty() || s.lexeme.trim().is_empty() || s.rank == 0 {
                return Err(GlossError::Parse {
                    line: i + 1,
                    message: format!("invalid sense {s:?}"),
                });
            }
            map.entry((s.lexeme.clone(), s.pos)).or_default().push(s);
        }
        for ((lexeme, pos), list) in map.iter_mut() {
            list.sort_by_key(|s| s.rank);
            if let Some(w) = list.windows(2).find(|w| w[0].rank == w[1].rank) {
                return Err(GlossError::DuplicateRank {
                    lexeme: lexeme.clone(),
                    pos: *pos,
                    rank: w[0].rank,
                });
            }
        }
        Ok(SenseInventory {
            senses: map,
            lemma_vectors: None,
        })
    }

    /// Parses the tab-separated `lexeme pos rank definition` format.
    pub fn parse_tsv(text: &str) -> Result<Self, GlossError> {
        let mut senses = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| GlossError::Parse { line: i + 1, message };
            let cols: Vec<&str> = line.splitn(4, '\t').collect();
            let [lexeme, pos, rank, definition] = cols[..] else {
                return Err(err(format!("expected 4 tab-separated columns, got {}", cols.len())));
            };
            let pos: Pos = pos.parse().map_err(err)?;
            let rank: u32 = rank
                .trim()
                .parse()
                .map_err(|e| err(format!("bad rank `{rank}`: {e}")))?;
            senses.push(Sense::new(lexeme.trim(), pos, rank, definition.trim()));
        }
        SenseInventory::from_senses(senses)
    }

    pub fn load_tsv(path: &Path) -> Result<Self, GlossError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        SenseInventory::parse_tsv(&text)
    }

    /// Serialises in `(lexeme, pos, rank)` order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for s in self.senses.values().flatten() {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", s.lexeme, s.pos.code(), s.rank, s.definition);
        }
        out
    }

    pub fn with_lemma_vectors(mut self, vectors: StaticVectors) -> Self {
        self.lemma_vectors = Some(vectors);
        self
    }

    pub fn lemma_vectors(&self) -> Option<&StaticVectors> {
        self.lemma_vectors.as_ref()
    }

    /// Senses of `(lexeme, pos)` sorted by rank; empty if absent.
    pub fn senses(&self, lexeme: &str, pos: Pos) -> &[Sense] {
        self.senses
            .get(&(lexeme.to_string(), pos))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, lexeme: &str, pos: Pos) -> bool {
        !self.senses(lexeme, pos).is_empty()
    }

    /// Lexemes with at least one sense of `pos`, in lexicographic order.
    pub fn lexemes(&self, pos: Pos) -> impl Iterator<Item = &str> {
        self.senses
            .keys()
            .filter(move |(_, p)| *p == pos)
            .map(|(l, _)| l.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.senses.values().map(Vec::len).sum()
    }
}
