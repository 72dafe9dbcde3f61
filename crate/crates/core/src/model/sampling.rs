use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use super::ModelError;
use crate::glosses::{GlossStrategy, Sense};
use crate::Axis;

/// One gloss in the negative pool.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub label: String,
    pub sense: Sense,
}

/// Uniform negative sampler over the training labels' glosses of one axis.
///
/// Under the WSD strategy the pool holds every gloss of every training label;
/// otherwise one gloss per label. A draw never returns a gloss belonging to
/// the positive label (nor an identical sense shared with it through the
/// nearest-lexeme fallback).
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    axis: Axis,
    entries: Vec<PoolEntry>,
    /// sorted pool indices excluded for each positive label
    excluded: HashMap<String, Vec<usize>>,
}

impl NegativeSampler {
    pub fn new(
        axis: Axis,
        candidates: &BTreeMap<String, Vec<Sense>>,
        strategy: GlossStrategy,
    ) -> Self {
        let mut entries = Vec::new();
        for (label, senses) in candidates {
            let take = if strategy == GlossStrategy::Wsd { senses.len() } else { 1 };
            for sense in senses.iter().take(take) {
                entries.push(PoolEntry {
                    label: label.clone(),
                    sense: sense.clone(),
                });
            }
        }
        let mut excluded = HashMap::new();
        for label in candidates.keys() {
            let own: BTreeSet<String> = entries
                .iter()
                .filter(|e| &e.label == label)
                .map(|e| e.sense.id())
                .collect();
            let idx: Vec<usize> = entries
                .iter()
                .enumerate()
                .filter(|(_, e)| &e.label == label || own.contains(&e.sense.id()))
                .map(|(i, _)| i)
                .collect();
            excluded.insert(label.clone(), idx);
        }
        NegativeSampler { axis, entries, excluded }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    /// Number of glosses a draw for `positive` can return.
    pub fn eligible(&self, positive: &str) -> usize {
        self.entries.len() - self.excluded.get(positive).map_or(0, Vec::len)
    }

    /// Index into [`NegativeSampler::entries`] of a uniformly drawn negative.
    pub fn sample_index<R: Rng + ?Sized>(&self, positive: &str, rng: &mut R) -> Result<usize, ModelError> {
        let n = self.eligible(positive);
        if n == 0 {
            return Err(ModelError::DegenerateVocabulary {
                axis: self.axis,
                label: positive.to_string(),
            });
        }
        let mut idx = rng.random_range(0..n);
        // map the idx-th eligible slot past the sorted excluded indices
        if let Some(ex) = self.excluded.get(positive) {
            for &e in ex {
                if e <= idx {
                    idx += 1;
                } else {
                    break;
                }
            }
        }
        Ok(idx)
    }

    pub fn sample<R: Rng + ?Sized>(&self, positive: &str, rng: &mut R) -> Result<&PoolEntry, ModelError> {
        self.sample_index(positive, rng).map(|i| &self.entries[i])
    }
}

/// One negative `(label, sense)` for `positive_label`.
pub fn sample_negative<R: Rng + ?Sized>(
    axis: Axis,
    positive_label: &str,
    train_label_pool: &BTreeMap<String, Vec<Sense>>,
    strategy: GlossStrategy,
    rng: &mut R,
) -> Result<(String, Sense), ModelError> {
    let sampler = NegativeSampler::new(axis, train_label_pool, strategy);
    let e = sampler.sample(positive_label, rng)?;
    Ok((e.label.clone(), e.sense.clone()))
}
