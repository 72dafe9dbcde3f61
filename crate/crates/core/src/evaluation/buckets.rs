use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{write_metrics_header, write_metrics_row, AxisMetrics, CaseResult, EvalError};
use crate::corpus::TypedProcess;
use crate::Axis;

/// Number of most frequent labels in the head bucket.
pub const TOP_N: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BucketKind {
    Freq,
    Length,
    None,
}

impl FromStr for BucketKind {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "freq" => Ok(BucketKind::Freq),
            "length" => Ok(BucketKind::Length),
            "none" => Ok(BucketKind::None),
            other => Err(EvalError::UnknownBuckets(other.to_string())),
        }
    }
}

impl fmt::Display for BucketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BucketKind::Freq => "freq",
            BucketKind::Length => "length",
            BucketKind::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyBucket {
    Top100,
    OneShot,
    Rest,
}

impl FrequencyBucket {
    pub const ALL: [FrequencyBucket; 3] = [FrequencyBucket::Top100, FrequencyBucket::OneShot, FrequencyBucket::Rest];

    /// One-shot (frequency at most 1, unseen included) wins over top-100,
    /// which only matters for vocabularies with few frequent labels.
    pub fn assign(label: &str, freq: &BTreeMap<String, usize>, top: &BTreeSet<String>) -> Self {
        if freq.get(label).copied().unwrap_or(0) <= 1 {
            FrequencyBucket::OneShot
        } else if top.contains(label) {
            FrequencyBucket::Top100
        } else {
            FrequencyBucket::Rest
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FrequencyBucket::Top100 => "top-100",
            FrequencyBucket::OneShot => "one-shot",
            FrequencyBucket::Rest => "rest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LengthBucket {
    Two,
    Three,
    Four,
    Five,
    Longer,
}

impl LengthBucket {
    pub const ALL: [LengthBucket; 5] = [
        LengthBucket::Two,
        LengthBucket::Three,
        LengthBucket::Four,
        LengthBucket::Five,
        LengthBucket::Longer,
    ];

    /// Processes shorter than two events (not produced by the corpus
    /// builder) fall into the first bucket.
    pub fn assign(length: usize) -> Self {
        match length {
            0..=2 => LengthBucket::Two,
            3 => LengthBucket::Three,
            4 => LengthBucket::Four,
            5 => LengthBucket::Five,
            _ => LengthBucket::Longer,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LengthBucket::Two => "2",
            LengthBucket::Three => "3",
            LengthBucket::Four => "4",
            LengthBucket::Five => "5",
            LengthBucket::Longer => ">5",
        }
    }
}

/// Label counts of one axis.
pub fn label_frequencies<'a>(cases: impl IntoIterator<Item = &'a TypedProcess>, axis: Axis) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for c in cases {
        *out.entry(c.label(axis).to_string()).or_insert(0) += 1;
    }
    out
}

/// The `n` most frequent labels; equal counts are ordered by label.
pub fn top_labels(freq: &BTreeMap<String, usize>, n: usize) -> BTreeSet<String> {
    let mut v: Vec<(&String, usize)> = freq.iter().map(|(l, &c)| (l, c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v.into_iter().take(n).map(|(l, _)| l.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketCell {
    pub bucket: String,
    pub action: AxisMetrics,
    pub object: AxisMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub kind: BucketKind,
    /// Frequency buckets are assigned per axis from that axis's gold label;
    /// length buckets are shared.
    pub cells: Vec<BucketCell>,
    /// Cases whose gold label never occurs in the frequency base.
    pub unseen_action: usize,
    pub unseen_object: usize,
}

impl BucketReport {
    pub fn cell(&self, bucket: &str) -> Option<&BucketCell> {
        self.cells.iter().find(|c| c.bucket == bucket)
    }
}

impl fmt::Display for BucketReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ks: Vec<usize> = self
            .cells
            .first()
            .map(|c| c.action.recall.keys().copied().collect())
            .unwrap_or_default();
        for axis in Axis::BOTH {
            writeln!(f, "{axis} by {}", self.kind)?;
            write_metrics_header(f, "bucket", &ks)?;
            for c in &self.cells {
                let m = match axis {
                    Axis::Action => &c.action,
                    Axis::Object => &c.object,
                };
                write_metrics_row(f, &c.bucket, m, &ks)?;
            }
        }
        if self.kind == BucketKind::Freq {
            writeln!(f, "unseen gold labels: action {}, object {}", self.unseen_action, self.unseen_object)?;
        }
        Ok(())
    }
}

/// Split per-case results into frequency or length buckets.
///
/// `action_freq`/`object_freq` are the label counts of the frequency base
/// (normally the training split).
pub fn bucket_report(
    cases: &[CaseResult],
    kind: BucketKind,
    action_freq: &BTreeMap<String, usize>,
    object_freq: &BTreeMap<String, usize>,
    ks: &[usize],
) -> Option<BucketReport> {
    let unseen = |axis: Axis, freq: &BTreeMap<String, usize>| {
        cases.iter().filter(|c| !freq.contains_key(c.gold(axis))).count()
    };
    let cells = match kind {
        BucketKind::None => return None,
        BucketKind::Freq => {
            let tops = [top_labels(action_freq, TOP_N), top_labels(object_freq, TOP_N)];
            let freqs = [action_freq, object_freq];
            FrequencyBucket::ALL
                .iter()
                .map(|&b| {
                    let metrics = |i: usize, axis: Axis| {
                        let ranks: Vec<usize> = cases
                            .iter()
                            .filter(|c| FrequencyBucket::assign(c.gold(axis), freqs[i], &tops[i]) == b)
                            .map(|c| c.rank(axis))
                            .collect();
                        AxisMetrics::from_ranks(&ranks, ks)
                    };
                    BucketCell {
                        bucket: b.name().to_string(),
                        action: metrics(0, Axis::Action),
                        object: metrics(1, Axis::Object),
                    }
                })
                .collect()
        }
        BucketKind::Length => LengthBucket::ALL
            .iter()
            .map(|&b| {
                let sel: Vec<&CaseResult> = cases.iter().filter(|c| LengthBucket::assign(c.length) == b).collect();
                let ranks = |axis| sel.iter().map(|c| c.rank(axis)).collect::<Vec<_>>();
                BucketCell {
                    bucket: b.name().to_string(),
                    action: AxisMetrics::from_ranks(&ranks(Axis::Action), ks),
                    object: AxisMetrics::from_ranks(&ranks(Axis::Object), ks),
                }
            })
            .collect(),
    };
    Some(BucketReport {
        kind,
        cells,
        unseen_action: unseen(Axis::Action, action_freq),
        unseen_object: unseen(Axis::Object, object_freq),
    })
}
