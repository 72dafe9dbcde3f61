//! Gloss-embedding label indexes and nearest-neighbour typing.

mod store;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use store::IndexManifest;

use crate::corpus::{EventProcess, TypedProcess};
use crate::encoder::{EmbeddingVector, EncoderError};
use crate::glosses::{GlossError, GlossResolver, Sense};
use crate::model::{cosine, ModelError, P2GTModel};
use crate::Axis;

#[derive(Debug, thiserror::Error)]
pub enum InferenceError {
    #[error("index fingerprint {index} does not match model fingerprint {model}")]
    FingerprintMismatch { index: String, model: String },
    #[error("index is for the {index} axis, not {requested}")]
    AxisMismatch { index: Axis, requested: Axis },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("label index is empty")]
    EmptyIndex,
    #[error("malformed index: {0}")]
    Format(String),
    #[error(transparent)]
    Gloss(#[from] GlossError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Io(#[from] crate::IoError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub label: String,
    pub sense_id: String,
    pub vector: EmbeddingVector,
}

/// One ranked label with its best-scoring gloss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPrediction {
    pub label: String,
    pub score: f64,
    pub best_sense: String,
}

/// Gloss embeddings for every label of one axis vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelIndex {
    axis: Axis,
    dim: usize,
    entries: Vec<IndexEntry>,
    fingerprint: String,
}

impl LabelIndex {
    pub fn from_entries(
        axis: Axis,
        dim: usize,
        entries: Vec<IndexEntry>,
        fingerprint: impl Into<String>,
    ) -> Result<Self, InferenceError> {
        if entries.is_empty() {
            return Err(InferenceError::EmptyIndex);
        }
        if let Some(e) = entries.iter().find(|e| e.vector.dim() != dim) {
            return Err(InferenceError::Dimension {
                expected: dim,
                got: e.vector.dim(),
            });
        }
        Ok(LabelIndex {
            axis,
            dim,
            entries,
            fingerprint: fingerprint.into(),
        })
    }

    /// Encode every candidate gloss with the model's encoder.
    pub fn from_candidates(
        axis: Axis,
        candidates: &BTreeMap<String, Vec<Sense>>,
        model: &P2GTModel,
    ) -> Result<Self, InferenceError> {
        let flat: Vec<(&String, &Sense)> = candidates
            .iter()
            .flat_map(|(label, senses)| senses.iter().map(move |s| (label, s)))
            .collect();
        let entries = flat
            .par_iter()
            .map(|(label, sense)| {
                Ok(IndexEntry {
                    label: (*label).clone(),
                    sense_id: sense.id(),
                    vector: model.encode_senses(std::slice::from_ref(*sense))?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        LabelIndex::from_entries(axis, model.dim(), entries, model.fingerprint())
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn n_labels(&self) -> usize {
        self.labels().len()
    }

    pub fn check(&self, axis: Axis, model: &P2GTModel) -> Result<(), InferenceError> {
        if self.axis != axis {
            return Err(InferenceError::AxisMismatch {
                index: self.axis,
                requested: axis,
            });
        }
        let fp = model.fingerprint();
        if self.fingerprint != fp {
            return Err(InferenceError::FingerprintMismatch {
                index: self.fingerprint.clone(),
                model: fp,
            });
        }
        Ok(())
    }

    /// Top-`k` labels for an already projected query. Each label is scored
    /// by its closest gloss; equal scores are ordered by label.
    pub fn rank_vector(&self, query: &[f64], k: usize) -> Result<Vec<RankedPrediction>, InferenceError> {
        if query.len() != self.dim {
            return Err(InferenceError::Dimension {
                expected: self.dim,
                got: query.len(),
            });
        }
        let mut best: BTreeMap<&str, (f64, &str)> = BTreeMap::new();
        for e in &self.entries {
            let s = cosine(query, e.vector.as_slice())?;
            match best.get_mut(e.label.as_str()) {
                Some(slot) if s > slot.0 => *slot = (s, &e.sense_id),
                Some(_) => {}
                None => {
                    best.insert(&e.label, (s, &e.sense_id));
                }
            }
        }
        let mut ranked: Vec<RankedPrediction> = best
            .into_iter()
            .map(|(label, (score, sense))| RankedPrediction {
                label: label.to_string(),
                score,
                best_sense: sense.to_string(),
            })
            .collect();
        // BTreeMap iteration is label-ordered, so a stable sort keeps ties lexicographic.
        ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
        ranked.truncate(k);
        Ok(ranked)
    }
}

/// Build the index for `vocab`, failing with every label that has no gloss.
pub fn build_label_index<'a>(
    vocab: impl IntoIterator<Item = &'a str>,
    axis: Axis,
    model: &P2GTModel,
    resolver: &GlossResolver,
) -> Result<LabelIndex, InferenceError> {
    let candidates = resolver.resolve_all(vocab, axis)?;
    LabelIndex::from_candidates(axis, &candidates, model)
}

/// Union of the labels of one axis across the given cases.
pub fn axis_vocabulary<'a>(cases: impl IntoIterator<Item = &'a TypedProcess>, axis: Axis) -> BTreeSet<String> {
    cases.into_iter().map(|c| c.label(axis).to_string()).collect()
}

pub fn rank_labels(
    process: &EventProcess,
    axis: Axis,
    model: &P2GTModel,
    index: &LabelIndex,
    k: usize,
) -> Result<Vec<RankedPrediction>, InferenceError> {
    index.check(axis, model)?;
    let q = model.query(process, axis)?;
    index.rank_vector(q.as_slice(), k)
}

/// Action and object rankings from one encoding of the process.
pub fn type_process(
    process: &EventProcess,
    model: &P2GTModel,
    index_action: &LabelIndex,
    index_object: &LabelIndex,
    k: usize,
) -> Result<(Vec<RankedPrediction>, Vec<RankedPrediction>), InferenceError> {
    index_action.check(Axis::Action, model)?;
    index_object.check(Axis::Object, model)?;
    let [qa, qo] = model.queries(process)?;
    Ok((index_action.rank_vector(qa.as_slice(), k)?, index_object.rank_vector(qo.as_slice(), k)?))
}

/// Anything that ranks the full label vocabulary of an axis for a process.
pub trait Typer: Sync {
    fn rank(&self, process: &EventProcess, axis: Axis) -> Result<Vec<RankedPrediction>, InferenceError>;
}

/// The gloss-grounded model with one index per axis.
pub struct IndexedModel<'a> {
    pub model: &'a P2GTModel,
    pub action: &'a LabelIndex,
    pub object: &'a LabelIndex,
}

impl<'a> IndexedModel<'a> {
    pub fn new(model: &'a P2GTModel, action: &'a LabelIndex, object: &'a LabelIndex) -> Result<Self, InferenceError> {
        action.check(Axis::Action, model)?;
        object.check(Axis::Object, model)?;
        Ok(IndexedModel { model, action, object })
    }
}

impl Typer for IndexedModel<'_> {
    fn rank(&self, process: &EventProcess, axis: Axis) -> Result<Vec<RankedPrediction>, InferenceError> {
        let index = match axis {
            Axis::Action => self.action,
            Axis::Object => self.object,
        };
        let q = self.model.query(process, axis)?;
        index.rank_vector(q.as_slice(), usize::MAX)
    }
}
