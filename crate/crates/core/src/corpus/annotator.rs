//! Predicate/argument and head-word annotators.
//!
//! Real SRL and dependency backends plug in through [`FrameAnnotator`] and
//! [`HeadWordAnnotator`]. The rule-based implementations here target
//! imperative how-to titles: the first token is the verb, the argument runs
//! until the first preposition, conjunction or adverb, and the head of an
//! argument is its last content token before any prepositional tail.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Lemmatizer};
use crate::Pos;

/// The predicate and patient argument of one clause. Agent arguments are never kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub verb: String,
    pub arg1: String,
}

pub trait FrameAnnotator: Send + Sync {
    /// First predicate/argument frame of `text`, `None` when the clause has no
    /// verb or no patient argument. `Err` is a backend failure.
    fn frame(&self, text: &str) -> Result<Option<Frame>, String>;
}

pub trait HeadWordAnnotator: Send + Sync {
    /// Surface form of the syntactic head of `phrase`, `None` if it has none.
    fn head(&self, phrase: &str) -> Option<String>;
}

const PREPOSITIONS: &[&str] = &[
    "to", "in", "on", "at", "with", "for", "from", "by", "into", "onto", "over", "under", "via",
    "through", "about", "before", "after", "during", "until", "without", "within", "around",
    "across", "against", "between", "like", "as", "than", "per", "near", "behind", "inside",
    "outside", "along", "toward", "towards", "upon", "off",
];

const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "if", "when", "while", "because", "so", "then", "whether", "unless",
    "once", "how", "why", "where", "what",
];

const ADVERBS: &[&str] = &[
    "online", "offline", "carefully", "quickly", "slowly", "regularly", "properly", "again",
    "first", "now", "daily", "weekly", "well", "together", "here", "there", "often", "always",
    "never", "gently", "thoroughly", "immediately", "early", "late", "completely",
];

const PARTICLES: &[&str] = &["up", "down", "out", "off", "away", "back", "over"];

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
    "their", "some", "any", "each", "every", "all", "both", "no", "another", "such", "which",
    "whose", "few", "many", "several", "much", "more", "most", "'s", "'",
];

fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | '"' | '(' | ')'))
                .to_string()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn in_list(list: &[&str], token: &str) -> bool {
    let lower = token.to_lowercase();
    list.contains(&lower.as_str())
}

/// Rule-based stand-in for a semantic role labeller.
#[derive(Debug, Default, Clone, Copy)]
pub struct RuleFrameAnnotator;

impl FrameAnnotator for RuleFrameAnnotator {
    fn frame(&self, text: &str) -> Result<Option<Frame>, String> {
        let toks = tokens(text);
        let Some((verb, rest)) = toks.split_first() else {
            return Ok(None);
        };
        let rest = {
            let skip = rest.iter().take_while(|t| in_list(PARTICLES, t)).count();
            &rest[skip..]
        };
        let arg: Vec<&str> = rest
            .iter()
            .take_while(|t| {
                !(in_list(PREPOSITIONS, t) || in_list(CONJUNCTIONS, t) || in_list(ADVERBS, t))
            })
            .map(String::as_str)
            .collect();
        if arg.is_empty() {
            return Ok(None);
        }
        Ok(Some(Frame {
            verb: verb.clone(),
            arg1: arg.join(" "),
        }))
    }
}

/// Rule-based head finder: the last non-determiner token before the first
/// preposition (including `of`) or conjunction.
#[derive(Debug, Default, Clone, Copy)]
pub struct RuleHeadAnnotator;

impl HeadWordAnnotator for RuleHeadAnnotator {
    fn head(&self, phrase: &str) -> Option<String> {
        tokens(phrase)
            .into_iter()
            .take_while(|t| !(t.eq_ignore_ascii_case("of") || in_list(PREPOSITIONS, t) || in_list(CONJUNCTIONS, t)))
            .map(|t| t.strip_suffix("'s").map(str::to_string).unwrap_or(t))
            .filter(|t| !t.is_empty() && !in_list(DETERMINERS, t))
            .filter(|t| t.chars().any(char::is_alphanumeric))
            .last()
    }
}

/// Reads pre-computed frames produced by an external labeller.
///
/// Records are JSON lines `{"title": ..., "verb": ..., "arg1": ...}` where
/// `verb`/`arg1` may be null. Looking up a title the table does not contain
/// is a backend failure.
#[derive(Debug, Default, Clone)]
pub struct FrameTable {
    frames: HashMap<String, Option<Frame>>,
}

#[derive(Deserialize)]
struct FrameRecord {
    title: String,
    verb: Option<String>,
    arg1: Option<String>,
}

impl FrameTable {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let records: Vec<FrameRecord> = crate::read_jsonl(path)?;
        let frames = records
            .into_iter()
            .map(|r| {
                let frame = match (r.verb, r.arg1) {
                    (Some(verb), Some(arg1)) if !verb.is_empty() && !arg1.is_empty() => {
                        Some(Frame { verb, arg1 })
                    }
                    _ => None,
                };
                (r.title, frame)
            })
            .collect();
        Ok(FrameTable { frames })
    }

    pub fn insert(&mut self, title: impl Into<String>, frame: Option<Frame>) {
        self.frames.insert(title.into(), frame);
    }
}

impl FrameAnnotator for FrameTable {
    fn frame(&self, text: &str) -> Result<Option<Frame>, String> {
        self.frames
            .get(text)
            .cloned()
            .ok_or_else(|| "title missing from frame table".to_string())
    }
}

/// Lemmatized, lower-cased head noun of `phrase`.
pub(crate) fn head_lemma(
    phrase: &str,
    heads: &dyn HeadWordAnnotator,
    lemmatizer: &dyn Lemmatizer,
) -> Result<String, CorpusError> {
    let head = heads
        .head(phrase)
        .ok_or_else(|| CorpusError::UnheadablePhrase(phrase.to_string()))?;
    let lemma = lemmatizer.lemma(&head, Pos::Noun);
    if lemma.is_empty() {
        return Err(CorpusError::UnheadablePhrase(phrase.to_string()));
    }
    Ok(lemma)
}
