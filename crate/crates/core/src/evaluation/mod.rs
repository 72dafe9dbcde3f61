//! Ranking metrics and bucketed reports.

mod buckets;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use buckets::{bucket_report, label_frequencies, top_labels, TOP_N, BucketCell, BucketKind, BucketReport, FrequencyBucket, LengthBucket};

use crate::corpus::TypedProcess;
use crate::inference::{InferenceError, RankedPrediction, Typer};
use crate::Axis;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("gold label `{label}` not in candidate space")]
    GoldMissing { label: String },
    #[error("cannot evaluate an empty split")]
    EmptySplit,
    #[error("unknown bucket kind `{0}` (expected freq|length|none)")]
    UnknownBuckets(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// 1-based position of `gold` in `ranking`.
pub fn gold_rank<S: AsRef<str>>(ranking: &[S], gold: &str) -> Result<usize, EvalError> {
    ranking
        .iter()
        .position(|l| l.as_ref() == gold)
        .map(|i| i + 1)
        .ok_or_else(|| EvalError::GoldMissing { label: gold.to_string() })
}

pub fn reciprocal_rank<S: AsRef<str>>(ranking: &[S], gold: &str) -> Result<f64, EvalError> {
    Ok(1.0 / gold_rank(ranking, gold)? as f64)
}

/// Metrics of one axis over a set of cases, as percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisMetrics {
    pub n_cases: usize,
    pub mrr: f64,
    /// `k -> recall@k`
    pub recall: BTreeMap<usize, f64>,
}

impl AxisMetrics {
    /// From 1-based gold ranks.
    pub fn from_ranks(ranks: &[usize], ks: &[usize]) -> Self {
        let n = ranks.len();
        let pct = |x: f64| if n == 0 { 0.0 } else { 100.0 * x / n as f64 };
        let rr: f64 = ranks.iter().map(|&r| 1.0 / r as f64).sum();
        let recall = ks
            .iter()
            .map(|&k| (k, pct(ranks.iter().filter(|&&r| r <= k).count() as f64)))
            .collect();
        AxisMetrics {
            n_cases: n,
            mrr: pct(rr),
            recall,
        }
    }

    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.recall.get(&k).copied()
    }
}

/// Per-case outcome kept for bucketing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub length: usize,
    pub gold_action: String,
    pub gold_object: String,
    pub rank_action: usize,
    pub rank_object: usize,
    pub top_action: String,
    pub top_object: String,
}

impl CaseResult {
    pub fn gold(&self, axis: Axis) -> &str {
        match axis {
            Axis::Action => &self.gold_action,
            Axis::Object => &self.gold_object,
        }
    }

    pub fn rank(&self, axis: Axis) -> usize {
        match axis {
            Axis::Action => self.rank_action,
            Axis::Object => self.rank_object,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split: String,
    pub n_cases: usize,
    pub ks: Vec<usize>,
    pub action: AxisMetrics,
    pub object: AxisMetrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buckets: Option<BucketReport>,
}

impl EvalReport {
    pub fn from_cases(split: &str, cases: &[CaseResult], ks: &[usize]) -> Self {
        let ranks = |axis| cases.iter().map(|c| c.rank(axis)).collect::<Vec<_>>();
        EvalReport {
            split: split.to_string(),
            n_cases: cases.len(),
            ks: ks.to_vec(),
            action: AxisMetrics::from_ranks(&ranks(Axis::Action), ks),
            object: AxisMetrics::from_ranks(&ranks(Axis::Object), ks),
            buckets: None,
        }
    }

    pub fn axis(&self, axis: Axis) -> &AxisMetrics {
        match axis {
            Axis::Action => &self.action,
            Axis::Object => &self.object,
        }
    }
}

pub(crate) fn write_metrics_header(f: &mut fmt::Formatter<'_>, first: &str, ks: &[usize]) -> fmt::Result {
    write!(f, "{first:<16}{:>8}{:>8}", "n", "MRR")?;
    for k in ks {
        write!(f, "{:>8}", format!("R@{k}"))?;
    }
    writeln!(f)
}

pub(crate) fn write_metrics_row(f: &mut fmt::Formatter<'_>, name: &str, m: &AxisMetrics, ks: &[usize]) -> fmt::Result {
    write!(f, "{name:<16}{:>8}{:>8.2}", m.n_cases, m.mrr)?;
    for k in ks {
        write!(f, "{:>8.2}", m.recall_at(*k).unwrap_or(0.0))?;
    }
    writeln!(f)
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "split: {} ({} cases)", self.split, self.n_cases)?;
        write_metrics_header(f, "axis", &self.ks)?;
        write_metrics_row(f, "action", &self.action, &self.ks)?;
        write_metrics_row(f, "object", &self.object, &self.ks)?;
        if let Some(b) = &self.buckets {
            writeln!(f)?;
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Report plus the per-case results it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub cases: Vec<CaseResult>,
}

fn labels(r: &[RankedPrediction]) -> Vec<&str> {
    r.iter().map(|p| p.label.as_str()).collect()
}

/// Rank the full candidate space for every case and aggregate.
pub fn evaluate(typer: &dyn Typer, split: &str, cases: &[TypedProcess], ks: &[usize]) -> Result<Evaluation, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::EmptySplit);
    }
    let results = cases
        .par_iter()
        .map(|case| {
            let ra = typer.rank(&case.process, Axis::Action)?;
            let ro = typer.rank(&case.process, Axis::Object)?;
            Ok(CaseResult {
                id: case.id.clone(),
                length: case.process.len(),
                gold_action: case.action_label.clone(),
                gold_object: case.object_label.clone(),
                rank_action: gold_rank(&labels(&ra), &case.action_label)?,
                rank_object: gold_rank(&labels(&ro), &case.object_label)?,
                top_action: ra[0].label.clone(),
                top_object: ro[0].label.clone(),
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(Evaluation {
        report: EvalReport::from_cases(split, &results, ks),
        cases: results,
    })
}
