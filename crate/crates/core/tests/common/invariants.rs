//! Property checks shared by the proptest suite and the acceptance harness.
//! Each `*_strategy` generates an input and the matching `check_*` asserts
//! the invariant on it.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use p2gt_core::corpus::{split_dataset, EventProcess, PrimitiveEvent, SplitRatios, TypedProcess};
use p2gt_core::encoder::EmbeddingVector;
use p2gt_core::evaluation::{bucket_report, top_labels, BucketKind, CaseResult, TOP_N};
use p2gt_core::glosses::{GlossStrategy, Sense};
use p2gt_core::inference::{IndexEntry, LabelIndex};
use p2gt_core::model::{hinge, process_loss, ModelError, NegativeSampler};
use p2gt_core::{Axis, Pos};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::oracle_cosine;

fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

// ---- hinge ---------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HingeCase {
    pub s_pos: f64,
    pub s_neg: f64,
    pub margin: f64,
    pub process: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn hinge_strategy() -> impl Strategy<Value = HingeCase> {
    (1usize..6).prop_flat_map(|dim| {
        (
            -1.0f64..=1.0,
            -1.0f64..=1.0,
            0.0f64..1.0,
            nonzero_vec(dim),
            nonzero_vec(dim),
            prop::collection::vec(nonzero_vec(dim), 1..4),
        )
            .prop_map(|(s_pos, s_neg, margin, process, positive, negatives)| HingeCase {
                s_pos,
                s_neg,
                margin,
                process,
                positive,
                negatives,
            })
    })
}

pub fn check_hinge(c: &HingeCase) -> Result<(), TestCaseError> {
    let h = hinge(c.s_pos, c.s_neg, c.margin);
    prop_assert!((0.0..=2.0 + c.margin).contains(&h), "hinge {h} out of bounds");
    prop_assert_eq!(h == 0.0, c.s_neg - c.s_pos + c.margin <= 0.0);
    if (c.s_pos - c.s_neg - c.margin).abs() > 1e-12 {
        prop_assert_eq!(h == 0.0, c.s_pos >= c.s_neg + c.margin);
    }

    let dim = c.process.len();
    let negs: Vec<&[f64]> = c.negatives.iter().map(Vec::as_slice).collect();
    let loss = process_loss(&c.process, &c.positive, &negs, &Array2::eye(dim), c.margin).unwrap();
    prop_assert!((0.0..=2.0 + c.margin + 1e-12).contains(&loss), "loss {loss} out of bounds");
    let s_pos = oracle_cosine(&c.process, &c.positive);
    let expected: f64 = c
        .negatives
        .iter()
        .map(|n| (oracle_cosine(&c.process, n) - s_pos + c.margin).max(0.0))
        .sum::<f64>()
        / c.negatives.len() as f64;
    prop_assert!((loss - expected).abs() < 1e-12, "loss {loss} vs oracle {expected}");
    // zero exactly when every negative is beaten by the margin
    let all_satisfied = c.negatives.iter().all(|n| s_pos >= oracle_cosine(&c.process, n) + c.margin + 1e-12);
    if all_satisfied {
        prop_assert_eq!(loss, 0.0);
    }
    if loss == 0.0 {
        prop_assert!(c.negatives.iter().all(|n| s_pos + 1e-12 >= oracle_cosine(&c.process, n) + c.margin));
    }
    Ok(())
}

// ---- negative sampling ----------------------------------------------------

#[derive(Debug, Clone)]
pub struct SamplerCase {
    pub candidates: BTreeMap<String, Vec<Sense>>,
    pub strategy: GlossStrategy,
    pub positive: String,
    pub seed: u64,
}

const LEXEMES: [&str; 4] = ["make", "bake", "cook", "form"];

pub fn sampler_strategy() -> impl Strategy<Value = SamplerCase> {
    // labels draw senses from a small shared lexeme set, so identical senses
    // under different labels (the nearest-lexeme fallback) occur often
    let senses = prop::collection::btree_set((0usize..4, 1u32..4), 1..4);
    (
        prop::collection::btree_map("[a-f]", senses, 1..6),
        prop::bool::ANY,
        any::<prop::sample::Index>(),
        any::<u64>(),
    )
        .prop_map(|(raw, wsd, pick, seed)| {
            let candidates: BTreeMap<String, Vec<Sense>> = raw
                .into_iter()
                .map(|(label, ids)| {
                    let senses = ids
                        .into_iter()
                        .map(|(l, r)| Sense::new(LEXEMES[l], Pos::Verb, r, format!("{} sense {r}", LEXEMES[l])))
                        .collect();
                    (label, senses)
                })
                .collect();
            let labels: Vec<&String> = candidates.keys().collect();
            let positive = labels[pick.index(labels.len())].clone();
            SamplerCase {
                candidates,
                strategy: if wsd { GlossStrategy::Wsd } else { GlossStrategy::Mfs },
                positive,
                seed,
            }
        })
}

pub fn check_sampler(c: &SamplerCase) -> Result<(), TestCaseError> {
    let sampler = NegativeSampler::new(Axis::Action, &c.candidates, c.strategy);
    let take = |senses: &[Sense]| if c.strategy == GlossStrategy::Wsd { senses.len() } else { 1 };
    let own = &c.candidates[&c.positive];
    let own_ids: BTreeSet<String> = own[..take(own)].iter().map(Sense::id).collect();
    // reference eligible set
    let eligible: Vec<(String, String)> = c
        .candidates
        .iter()
        .filter(|(l, _)| **l != c.positive)
        .flat_map(|(l, s)| s[..take(s)].iter().map(move |x| (l.clone(), x.id())))
        .filter(|(_, id)| !own_ids.contains(id))
        .collect();
    prop_assert_eq!(sampler.eligible(&c.positive), eligible.len());

    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    if eligible.is_empty() {
        let err = sampler.sample(&c.positive, &mut rng).unwrap_err();
        let degenerate = matches!(err, ModelError::DegenerateVocabulary { .. });
        prop_assert!(degenerate, "unexpected error {err}");
        return Ok(());
    }
    for _ in 0..20 {
        let e = sampler.sample(&c.positive, &mut rng).unwrap();
        prop_assert_ne!(&e.label, &c.positive);
        prop_assert!(!own_ids.contains(&e.sense.id()), "drew a gloss of the positive: {}", e.sense.id());
        prop_assert!(eligible.contains(&(e.label.clone(), e.sense.id())));
    }
    Ok(())
}

// ---- index duplication -------------------------------------------------------

#[derive(Debug, Clone)]
pub struct IndexCase {
    pub entries: Vec<(String, Vec<f64>)>,
    pub duplicates: Vec<prop::sample::Index>,
    pub query: Vec<f64>,
    pub k: usize,
}

pub fn index_strategy() -> impl Strategy<Value = IndexCase> {
    (1usize..5).prop_flat_map(|dim| {
        (
            prop::collection::vec(("[a-h]", nonzero_vec(dim)), 1..20),
            prop::collection::vec(any::<prop::sample::Index>(), 1..10),
            nonzero_vec(dim),
            1usize..12,
        )
            .prop_map(|(entries, duplicates, query, k)| IndexCase {
                entries,
                duplicates,
                query,
                k,
            })
    })
}

fn index_of(entries: &[(String, Vec<f64>)], dim: usize) -> LabelIndex {
    let entries = entries
        .iter()
        .enumerate()
        .map(|(i, (label, v))| IndexEntry {
            label: label.clone(),
            sense_id: format!("{label}.n.{}", i + 1),
            vector: EmbeddingVector::from(v.clone()),
        })
        .collect();
    LabelIndex::from_entries(Axis::Object, dim, entries, "fp").unwrap()
}

pub fn check_index_duplication(c: &IndexCase) -> Result<(), TestCaseError> {
    let dim = c.query.len();
    let base = index_of(&c.entries, dim).rank_vector(&c.query, c.k).unwrap();
    let mut dup = c.entries.clone();
    for i in &c.duplicates {
        let e = c.entries[i.index(c.entries.len())].clone();
        dup.push(e);
    }
    dup.reverse();
    let again = index_of(&dup, dim).rank_vector(&c.query, c.k).unwrap();
    let strip = |r: &[p2gt_core::inference::RankedPrediction]| {
        r.iter().map(|p| (p.label.clone(), p.score)).collect::<Vec<_>>()
    };
    prop_assert_eq!(strip(&base), strip(&again));
    let distinct: BTreeSet<&String> = c.entries.iter().map(|(l, _)| l).collect();
    prop_assert_eq!(base.len(), c.k.min(distinct.len()));
    Ok(())
}

// ---- bucket partition -------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BucketCase {
    pub cases: Vec<CaseResult>,
    pub action_freq: BTreeMap<String, usize>,
    pub object_freq: BTreeMap<String, usize>,
}

fn label_strategy() -> impl Strategy<Value = String> {
    "[a-z]{1,2}"
}

pub fn bucket_strategy() -> impl Strategy<Value = BucketCase> {
    let case = (label_strategy(), label_strategy(), 1usize..9, 1usize..30, 1usize..30).prop_map(
        |(a, o, length, ra, ro)| CaseResult {
            id: String::new(),
            length,
            gold_action: a.clone(),
            gold_object: o.clone(),
            rank_action: ra,
            rank_object: ro,
            top_action: a,
            top_object: o,
        },
    );
    // frequency tables big enough to exercise the top-100 cut
    let freq = || prop::collection::btree_map(label_strategy(), 1usize..6, 0..160);
    (prop::collection::vec(case, 1..60), freq(), freq()).prop_map(|(cases, action_freq, object_freq)| BucketCase {
        cases,
        action_freq,
        object_freq,
    })
}

pub fn check_bucket_partition(c: &BucketCase) -> Result<(), TestCaseError> {
    let n = c.cases.len();
    let ks = [1, 10];
    for kind in [BucketKind::Freq, BucketKind::Length] {
        let r = bucket_report(&c.cases, kind, &c.action_freq, &c.object_freq, &ks).unwrap();
        let sum_a: usize = r.cells.iter().map(|x| x.action.n_cases).sum();
        let sum_o: usize = r.cells.iter().map(|x| x.object.n_cases).sum();
        prop_assert_eq!(sum_a, n);
        prop_assert_eq!(sum_o, n);
        let names: BTreeSet<&str> = r.cells.iter().map(|x| x.bucket.as_str()).collect();
        prop_assert_eq!(names.len(), r.cells.len());
    }
    // per-case assignment against the stated rule
    let r = bucket_report(&c.cases, BucketKind::Freq, &c.action_freq, &c.object_freq, &ks).unwrap();
    for (axis, freq) in [(Axis::Action, &c.action_freq), (Axis::Object, &c.object_freq)] {
        let top = top_labels(freq, TOP_N);
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for case in &c.cases {
            let f = freq.get(case.gold(axis)).copied().unwrap_or(0);
            let b = if f <= 1 {
                "one-shot"
            } else if top.contains(case.gold(axis)) {
                "top-100"
            } else {
                "rest"
            };
            *counts.entry(b).or_insert(0) += 1;
        }
        for cell in &r.cells {
            let got = match axis {
                Axis::Action => cell.action.n_cases,
                Axis::Object => cell.object.n_cases,
            };
            prop_assert_eq!(got, counts.get(cell.bucket.as_str()).copied().unwrap_or(0));
        }
    }
    Ok(())
}

// ---- split determinism --------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SplitCase {
    pub ids: Vec<u32>,
    pub ratios: (f64, f64, f64),
    pub seed: u64,
    pub rotate: prop::sample::Index,
}

pub fn split_strategy() -> impl Strategy<Value = SplitCase> {
    (
        prop::collection::btree_set(0u32..100_000, 10..200),
        (0.05f64..0.3, 0.05f64..0.3),
        any::<u64>(),
        any::<prop::sample::Index>(),
    )
        .prop_map(|(ids, (dev, test), seed, rotate)| SplitCase {
            ids: ids.into_iter().collect(),
            ratios: (1.0 - dev - test, dev, test),
            seed,
            rotate,
        })
}

fn dummy(id: u32) -> TypedProcess {
    TypedProcess {
        id: format!("p{id:06}"),
        process: EventProcess::new(vec![PrimitiveEvent::new("dig", "a hole"), PrimitiveEvent::new("fill", "it")])
            .unwrap(),
        action_label: "plant".into(),
        object_label: "tree".into(),
        source_article: format!("a{id}"),
    }
}

pub fn check_split(c: &SplitCase) -> Result<(), TestCaseError> {
    let data: Vec<TypedProcess> = c.ids.iter().map(|&i| dummy(i)).collect();
    let (tr, de, te) = c.ratios;
    let Ok(ratios) = SplitRatios::new(tr, de, te) else {
        return Ok(());
    };
    let a = match split_dataset(&data, ratios, c.seed) {
        Ok(s) => s,
        // ratios that leave a split empty must fail deterministically too
        Err(_) => {
            prop_assert!(split_dataset(&data, ratios, c.seed).is_err());
            return Ok(());
        }
    };
    let b = split_dataset(&data, ratios, c.seed).unwrap();
    prop_assert_eq!(&a.train, &b.train);
    prop_assert_eq!(&a.dev, &b.dev);
    prop_assert_eq!(&a.test, &b.test);
    prop_assert_eq!(a.manifest(), b.manifest());

    // the input order does not matter
    let mut rotated = data.clone();
    rotated.rotate_left(c.rotate.index(data.len()));
    let r = split_dataset(&rotated, ratios, c.seed).unwrap();
    prop_assert_eq!(&a.dev, &r.dev);
    prop_assert_eq!(&a.test, &r.test);

    // partition with floored dev/test sizes
    let n = data.len();
    let floor = |x: f64| (n as f64 * x + 1e-9).floor() as usize;
    prop_assert_eq!(a.dev.len(), floor(de));
    prop_assert_eq!(a.test.len(), floor(te));
    prop_assert_eq!(a.train.len() + a.dev.len() + a.test.len(), n);
    let all: BTreeSet<&str> = a.all().map(|p| p.id.as_str()).collect();
    prop_assert_eq!(all.len(), n);
    Ok(())
}
