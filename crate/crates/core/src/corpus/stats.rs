use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::annotator::head_lemma;
use super::{CorpusError, HeadWordAnnotator, Lemmatizer, TypedProcess};
use crate::Pos;

/// Exact corpus counts. Percentages are derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub n_processes: usize,
    pub action_freq: BTreeMap<String, usize>,
    pub object_freq: BTreeMap<String, usize>,
    pub n_external_action: usize,
    pub n_external_object: usize,
    pub length_histogram: BTreeMap<usize, usize>,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn pct_below(freq: &BTreeMap<String, usize>, k: usize) -> f64 {
    pct(freq.values().filter(|&&c| c < k).count(), freq.len())
}

/// number of labels per label frequency
fn freq_histogram(freq: &BTreeMap<String, usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &c in freq.values() {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

impl CorpusStats {
    pub fn n_action_labels(&self) -> usize {
        self.action_freq.len()
    }

    pub fn n_object_labels(&self) -> usize {
        self.object_freq.len()
    }

    /// Percentage of action labels occurring fewer than `k` times.
    pub fn pct_action_labels_below(&self, k: usize) -> f64 {
        pct_below(&self.action_freq, k)
    }

    pub fn pct_object_labels_below(&self, k: usize) -> f64 {
        pct_below(&self.object_freq, k)
    }

    pub fn pct_external_action(&self) -> f64 {
        pct(self.n_external_action, self.n_processes)
    }

    pub fn pct_external_object(&self) -> f64 {
        pct(self.n_external_object, self.n_processes)
    }

    pub fn summary(&self) -> StatsSummary {
        StatsSummary {
            n_processes: self.n_processes,
            n_action_labels: self.n_action_labels(),
            n_object_labels: self.n_object_labels(),
            pct_action_labels_below_10: self.pct_action_labels_below(10),
            pct_object_labels_below_10: self.pct_object_labels_below(10),
            pct_external_action: self.pct_external_action(),
            pct_external_object: self.pct_external_object(),
            length_histogram: self.length_histogram.clone(),
            action_freq_histogram: freq_histogram(&self.action_freq),
            object_freq_histogram: freq_histogram(&self.object_freq),
            action_freq: self.action_freq.clone(),
            object_freq: self.object_freq.clone(),
        }
    }
}

/// Serialisable view of [`CorpusStats`] written by `corpus stats`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub n_processes: usize,
    pub n_action_labels: usize,
    pub n_object_labels: usize,
    pub pct_action_labels_below_10: f64,
    pub pct_object_labels_below_10: f64,
    pub pct_external_action: f64,
    pub pct_external_object: f64,
    pub length_histogram: BTreeMap<usize, usize>,
    pub action_freq_histogram: BTreeMap<usize, usize>,
    pub object_freq_histogram: BTreeMap<usize, usize>,
    pub action_freq: BTreeMap<String, usize>,
    pub object_freq: BTreeMap<String, usize>,
}

/// A label is external when it matches no event predicate lemma (action) or
/// no event object head lemma (object).
pub fn compute_stats(
    dataset: &[TypedProcess],
    heads: &dyn HeadWordAnnotator,
    lemmatizer: &dyn Lemmatizer,
) -> Result<CorpusStats, CorpusError> {
    if dataset.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let mut stats = CorpusStats {
        n_processes: dataset.len(),
        action_freq: BTreeMap::new(),
        object_freq: BTreeMap::new(),
        n_external_action: 0,
        n_external_object: 0,
        length_histogram: BTreeMap::new(),
    };
    for tp in dataset {
        *stats.action_freq.entry(tp.action_label.clone()).or_insert(0) += 1;
        *stats.object_freq.entry(tp.object_label.clone()).or_insert(0) += 1;
        *stats.length_histogram.entry(tp.process.len()).or_insert(0) += 1;

        let events = tp.process.events();
        if !events
            .iter()
            .any(|e| lemmatizer.lemma(&e.predicate, Pos::Verb) == tp.action_label)
        {
            stats.n_external_action += 1;
        }
        if !events.iter().any(|e| {
            head_lemma(&e.object, heads, lemmatizer).is_ok_and(|h| h == tp.object_label)
        }) {
            stats.n_external_object += 1;
        }
    }
    Ok(stats)
}
