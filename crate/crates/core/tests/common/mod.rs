//! Shared fixtures for the integration tests: a generated toy corpus whose
//! labels are recoverable from gloss/process word overlap, plus brute-force
//! reference implementations of the ranking metrics and label ranking.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

pub mod invariants;

use p2gt_core::corpus::{EventProcess, PrimitiveEvent, TypedProcess};
use p2gt_core::glosses::{GlossResolver, GlossStrategy, MfsWsd, Sense, SenseInventory};
use p2gt_core::Pos;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// An action label: two predicates it shares with a sibling action and two
/// tool nouns of its own.
pub struct ToyAction {
    pub label: &'static str,
    pub verbs: [&'static str; 2],
    pub tools: [&'static str; 2],
}

/// An object label: two nouns shared with a sibling object and two verbs of
/// its own.
pub struct ToyObject {
    pub label: &'static str,
    pub nouns: [&'static str; 2],
    pub verbs: [&'static str; 2],
}

// Siblings (0,1), (2,3), (4,5) share predicates, so the action is only
// identifiable from the tool nouns in the object slots. Likewise objects
// share nouns pairwise and differ in their characteristic verbs.
pub const ACTIONS: [ToyAction; 6] = [
    ToyAction { label: "bake", verbs: ["heat", "mix"], tools: ["oven", "tray"] },
    ToyAction { label: "fry", verbs: ["heat", "mix"], tools: ["skillet", "oil"] },
    ToyAction { label: "plant", verbs: ["dig", "press"], tools: ["spade", "compost"] },
    ToyAction { label: "sculpt", verbs: ["dig", "press"], tools: ["chisel", "clay"] },
    ToyAction { label: "wash", verbs: ["rinse", "wipe"], tools: ["soap", "sponge"] },
    ToyAction { label: "polish", verbs: ["rinse", "wipe"], tools: ["wax", "cloth"] },
];

pub const OBJECTS: [ToyObject; 8] = [
    ToyObject { label: "bread", nouns: ["loaf", "crust"], verbs: ["knead", "slice"] },
    ToyObject { label: "pie", nouns: ["loaf", "crust"], verbs: ["fill", "crimp"] },
    ToyObject { label: "rose", nouns: ["stem", "petal"], verbs: ["prune", "sniff"] },
    ToyObject { label: "tulip", nouns: ["stem", "petal"], verbs: ["bundle", "arrange"] },
    ToyObject { label: "car", nouns: ["hood", "bumper"], verbs: ["drive", "park"] },
    ToyObject { label: "boat", nouns: ["hood", "bumper"], verbs: ["sail", "moor"] },
    ToyObject { label: "statue", nouns: ["pedestal", "bust"], verbs: ["unveil", "mount"] },
    ToyObject { label: "vase", nouns: ["pedestal", "bust"], verbs: ["glaze", "fire"] },
];

/// Test-only action for the zero-shot check; none of its words occur in
/// the generated training processes.
pub const ZERO_SHOT: ToyAction = ToyAction { label: "grate", verbs: ["shred", "zest"], tools: ["grater", "rind"] };

pub fn action_gloss(a: &ToyAction) -> String {
    format!("{} or {} things using a {} and {}", a.verbs[0], a.verbs[1], a.tools[0], a.tools[1])
}

pub fn object_gloss(o: &ToyObject) -> String {
    format!("a {} with a {} that people {} and {}", o.nouns[0], o.nouns[1], o.verbs[0], o.verbs[1])
}

pub fn toy_inventory() -> SenseInventory {
    let mut senses = Vec::new();
    for a in ACTIONS.iter().chain([&ZERO_SHOT]) {
        senses.push(Sense::new(a.label, Pos::Verb, 1, action_gloss(a)));
    }
    for o in &OBJECTS {
        senses.push(Sense::new(o.label, Pos::Noun, 1, object_gloss(o)));
    }
    SenseInventory::from_senses(senses).unwrap()
}

pub fn toy_resolver() -> GlossResolver {
    GlossResolver::new(toy_inventory(), GlossStrategy::Mfs, Box::new(MfsWsd))
}

fn toy_process<R: Rng>(a: &ToyAction, o: &ToyObject, rng: &mut R) -> EventProcess {
    let n = rng.random_range(3..=5);
    let mut events = Vec::with_capacity(n);
    // action predicates acting on the object's nouns
    for _ in 0..n - 2 {
        let v = *a.verbs.choose(rng).unwrap();
        let x = *o.nouns.choose(rng).unwrap();
        events.push(PrimitiveEvent::new(v, format!("the {x}")));
    }
    // object verbs acting on the action's tools
    for _ in 0..2 {
        let v = *o.verbs.choose(rng).unwrap();
        let t = *a.tools.choose(rng).unwrap();
        events.push(PrimitiveEvent::new(v, format!("the {t}")));
    }
    events.shuffle(rng);
    EventProcess::new(events).unwrap()
}

/// 60 processes covering all 48 action/object pairs, 12 of them twice.
pub fn toy_corpus() -> Vec<TypedProcess> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut pairs: Vec<(usize, usize)> = (0..6).flat_map(|a| (0..8).map(move |o| (a, o))).collect();
    for i in 0..12 {
        pairs.push((i % 6, (i * 3) % 8));
    }
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, o))| TypedProcess {
            id: format!("toy{i:03}"),
            process: toy_process(&ACTIONS[a], &OBJECTS[o], &mut rng),
            action_label: ACTIONS[a].label.to_string(),
            object_label: OBJECTS[o].label.to_string(),
            source_article: format!("toy{i:03}"),
        })
        .collect()
}

/// A process for the zero-shot action acting on `object`.
pub fn zero_shot_case(object: usize) -> TypedProcess {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    TypedProcess {
        id: "zero-shot".into(),
        process: toy_process(&ZERO_SHOT, &OBJECTS[object], &mut rng),
        action_label: ZERO_SHOT.label.into(),
        object_label: OBJECTS[object].label.into(),
        source_article: "zero-shot".into(),
    }
}

// ---- reference implementations ----------------------------------------

/// MRR and recall@k as percentages, by direct counting.
pub fn oracle_metrics(rankings: &[Vec<String>], golds: &[String], ks: &[usize]) -> (f64, Vec<f64>) {
    let mut rr_sum = 0.0;
    let mut hits = vec![0usize; ks.len()];
    for (ranking, gold) in rankings.iter().zip(golds) {
        let mut rank = 0;
        for (i, l) in ranking.iter().enumerate() {
            if l == gold {
                rank = i + 1;
                break;
            }
        }
        assert!(rank > 0, "gold missing in oracle input");
        rr_sum += 1.0 / rank as f64;
        for (h, &k) in hits.iter_mut().zip(ks) {
            if rank <= k {
                *h += 1;
            }
        }
    }
    let n = golds.len() as f64;
    (100.0 * rr_sum / n, hits.into_iter().map(|h| 100.0 * h as f64 / n).collect())
}

pub fn oracle_cosine(u: &[f64], v: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for i in 0..u.len() {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0)
}

/// Every cosine, grouped per label by max, sorted by score then label.
pub fn oracle_ranking(entries: &[(String, Vec<f64>)], query: &[f64]) -> Vec<(String, f64)> {
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    for (label, v) in entries {
        let s = oracle_cosine(query, v);
        let e = best.entry(label.clone()).or_insert(f64::NEG_INFINITY);
        if s > *e {
            *e = s;
        }
    }
    let mut out: Vec<(String, f64)> = best.into_iter().collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out
}

// ---- golden corpus ------------------------------------------------------

pub const GOLDEN_FILES: [&str; 6] = [
    "dataset.jsonl",
    "stats.json",
    "split.train.jsonl",
    "split.dev.jsonl",
    "split.test.jsonl",
    "split.manifest.json",
];

/// Rebuilds the fixture corpus into `out` and returns the golden files whose
/// bytes differ.
pub fn rebuild_golden(out: &std::path::Path) -> Vec<String> {
    use p2gt_core::corpus::{
        build_corpus, compute_stats, load_articles, split_dataset, Annotators, RuleHeadAnnotator,
        SplitRatios, SuffixLemmatizer,
    };
    let articles = load_articles(&fixtures().join("articles")).unwrap();
    let dataset = build_corpus(&articles, &Annotators::rules()).unwrap();
    p2gt_core::write_jsonl(&out.join("dataset.jsonl"), &dataset).unwrap();
    let stats = compute_stats(&dataset, &RuleHeadAnnotator, &SuffixLemmatizer).unwrap();
    let mut json = serde_json::to_string_pretty(&stats.summary()).unwrap();
    json.push('\n');
    std::fs::write(out.join("stats.json"), json).unwrap();
    split_dataset(&dataset, SplitRatios::DEFAULT, 0)
        .unwrap()
        .write(&out.join("split"))
        .unwrap();
    let golden = fixtures().join("golden");
    GOLDEN_FILES
        .iter()
        .filter(|f| std::fs::read(out.join(f)).ok() != std::fs::read(golden.join(f)).ok())
        .map(|f| f.to_string())
        .collect()
}

// ---- toy training runs ----------------------------------------------------

use p2gt_core::corpus::{split_dataset, DatasetSplit, SplitRatios};
use p2gt_core::encoder::ToyEncoder;
use p2gt_core::evaluation::{evaluate, EvalReport};
use p2gt_core::inference::{axis_vocabulary, build_label_index, IndexedModel, LabelIndex};
use p2gt_core::model::{train, P2GTModel, TrainConfig, TrainOutcome};
use p2gt_core::Axis;

pub const TOY_DIM: usize = 128;

pub fn toy_split(seed: u64) -> DatasetSplit {
    split_dataset(&toy_corpus(), SplitRatios::DEFAULT, seed).unwrap()
}

pub fn toy_config(seed: u64) -> TrainConfig {
    TrainConfig {
        batch_size: 8,
        epochs: 50,
        seed,
        ..TrainConfig::joint()
    }
}

pub fn toy_single(axis: Axis, seed: u64) -> TrainConfig {
    TrainConfig {
        batch_size: 8,
        epochs: 50,
        seed,
        ..TrainConfig::single(axis)
    }
}

pub fn toy_train(split: &DatasetSplit, config: TrainConfig) -> TrainOutcome {
    let encoder = ToyEncoder::new(p2gt_core::seed::sub_seed(config.seed, p2gt_core::seed::ENCODER), TOY_DIM, 256, true);
    train(split, &toy_resolver(), encoder, config).unwrap()
}

/// Indexes over every label in the split plus `extra` action labels.
pub fn toy_indexes(model: &P2GTModel, split: &DatasetSplit, extra_actions: &[&str]) -> [LabelIndex; 2] {
    let resolver = toy_resolver();
    let mut actions = axis_vocabulary(split.all(), Axis::Action);
    actions.extend(extra_actions.iter().map(|s| s.to_string()));
    let objects = axis_vocabulary(split.all(), Axis::Object);
    [
        build_label_index(actions.iter().map(String::as_str), Axis::Action, model, &resolver).unwrap(),
        build_label_index(objects.iter().map(String::as_str), Axis::Object, model, &resolver).unwrap(),
    ]
}

pub fn toy_eval(model: &P2GTModel, indexes: &[LabelIndex; 2], name: &str, cases: &[TypedProcess]) -> EvalReport {
    let typer = IndexedModel::new(model, &indexes[0], &indexes[1]).unwrap();
    evaluate(&typer, name, cases, &[1, 3, 10]).unwrap().report
}
