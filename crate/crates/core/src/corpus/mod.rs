//! Typed event-process corpora built from goal/step articles.

mod annotator;
mod build;
mod lemma;
mod split;
mod stats;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use annotator::{
    Frame, FrameAnnotator, FrameTable, HeadWordAnnotator, RuleFrameAnnotator, RuleHeadAnnotator,
};
pub use build::{annotate_step, build_corpus, build_processes, extract_head_lemma, load_articles, Annotators};
pub use lemma::{Lemmatizer, SuffixLemmatizer};
pub use split::{split_dataset, DatasetSplit, SplitManifest, SplitRatios};
pub use stats::{compute_stats, CorpusStats, StatsSummary};

use crate::IoError;

/// Shortest step chain accepted as a process.
pub const MIN_PROCESS_LEN: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid article `{id}`: {reason}")]
    InvalidArticle { id: String, reason: String },
    #[error("annotator failed on `{title}`: {message}")]
    Annotator { title: String, message: String },
    #[error("unheadable phrase `{0}`")]
    UnheadablePhrase(String),
    #[error("goal title `{title}` of article `{id}` has no verb+argument clause")]
    UnparseableGoal { id: String, title: String },
    #[error("invalid event process: {0}")]
    InvalidProcess(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error(transparent)]
    Io(#[from] IoError),
}

/// A goal/step article: one goal title and one or more alternative step sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub goal_title: String,
    pub step_sequences: Vec<Vec<String>>,
}

impl Article {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |reason: &str| {
            Err(CorpusError::InvalidArticle {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if self.goal_title.trim().is_empty() {
            return fail("empty goal title");
        }
        if self.step_sequences.is_empty() {
            return fail("no step sequences");
        }
        if self
            .step_sequences
            .iter()
            .flatten()
            .any(|step| step.trim().is_empty())
        {
            return fail("empty step title");
        }
        Ok(())
    }
}

/// A single predicate with its (full) object phrase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimitiveEvent {
    pub predicate: String,
    pub object: String,
}

impl PrimitiveEvent {
    pub fn new(predicate: impl Into<String>, object: impl Into<String>) -> Self {
        PrimitiveEvent {
            predicate: predicate.into(),
            object: object.into(),
        }
    }
}

/// Ordered chain of events performed by one protagonist.
///
/// Construction only requires a non-empty chain; corpus records additionally
/// require [`MIN_PROCESS_LEN`] events (see [`TypedProcess::validate`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<PrimitiveEvent>", into = "Vec<PrimitiveEvent>")]
pub struct EventProcess {
    events: Vec<PrimitiveEvent>,
}

impl EventProcess {
    pub fn new(events: Vec<PrimitiveEvent>) -> Result<Self, CorpusError> {
        if events.is_empty() {
            return Err(CorpusError::InvalidProcess("no events".into()));
        }
        if let Some(e) = events
            .iter()
            .find(|e| e.predicate.trim().is_empty() || e.object.trim().is_empty())
        {
            return Err(CorpusError::InvalidProcess(format!(
                "event with empty field: {e:?}"
            )));
        }
        Ok(EventProcess { events })
    }

    /// Parses `pred1|obj1 ;; pred2|obj2 ;; ...`.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let events = text
            .split(";;")
            .map(|chunk| {
                let (pred, obj) = chunk.split_once('|').ok_or_else(|| {
                    CorpusError::InvalidProcess(format!("event `{}` lacks `|`", chunk.trim()))
                })?;
                Ok(PrimitiveEvent::new(pred.trim(), obj.trim()))
            })
            .collect::<Result<Vec<_>, CorpusError>>()?;
        EventProcess::new(events)
    }

    pub fn events(&self) -> &[PrimitiveEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

impl TryFrom<Vec<PrimitiveEvent>> for EventProcess {
    type Error = CorpusError;

    fn try_from(events: Vec<PrimitiveEvent>) -> Result<Self, Self::Error> {
        EventProcess::new(events)
    }
}

impl From<EventProcess> for Vec<PrimitiveEvent> {
    fn from(p: EventProcess) -> Self {
        p.events
    }
}

impl fmt::Display for EventProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                f.write_str(" ;; ")?;
            }
            write!(f, "{}|{}", e.predicate, e.object)?;
        }
        Ok(())
    }
}

/// A process with its gold action and object labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedProcess {
    pub id: String,
    #[serde(rename = "events")]
    pub process: EventProcess,
    pub action_label: String,
    pub object_label: String,
    pub source_article: String,
}

impl TypedProcess {
    pub fn label(&self, axis: crate::Axis) -> &str {
        match axis {
            crate::Axis::Action => &self.action_label,
            crate::Axis::Object => &self.object_label,
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.process.len() < MIN_PROCESS_LEN {
            return Err(CorpusError::InvalidProcess(format!(
                "`{}` has {} events, need at least {MIN_PROCESS_LEN}",
                self.id,
                self.process.len()
            )));
        }
        for label in [&self.action_label, &self.object_label] {
            let ok = !label.is_empty()
                && !label.chars().any(char::is_whitespace)
                && *label == label.to_lowercase();
            if !ok {
                return Err(CorpusError::InvalidProcess(format!(
                    "`{}` has malformed label `{label}`",
                    self.id
                )));
            }
        }
        Ok(())
    }
}
