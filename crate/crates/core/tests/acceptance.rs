//! Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::invariants::*;
use common::*;
use p2gt_core::corpus::{
    compute_stats, load_articles, EventProcess, PrimitiveEvent, RuleHeadAnnotator, SuffixLemmatizer, TypedProcess,
};
use p2gt_core::encoder::{tokenize, EmbeddingVector, ToyEncoder};
use p2gt_core::evaluation::evaluate;
use p2gt_core::inference::{rank_labels, IndexEntry, InferenceError, LabelIndex, RankedPrediction, Typer};
use p2gt_core::model::{hinge, joint_loss, process_loss, P2GTModel, ProcessRendering, TrainConfig};
use p2gt_core::{read_jsonl, Axis};
use ndarray::Array2;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, t: Instant) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure(e < limit, || format!("took {e:?}, limit {limit:?}"))?;
    Ok(e)
}

// ---- AC1 ---------------------------------------------------------------------

/// Returns fixed rankings keyed by the process's first predicate.
struct FixedTyper(Vec<[Vec<String>; 2]>);

impl Typer for FixedTyper {
    fn rank(&self, process: &EventProcess, axis: Axis) -> Result<Vec<RankedPrediction>, InferenceError> {
        let i: usize = process.events()[0].predicate[1..].parse().unwrap();
        let r = &self.0[i][axis as usize];
        Ok(r.iter()
            .enumerate()
            .map(|(j, l)| RankedPrediction {
                label: l.clone(),
                score: 1.0 - j as f64 / r.len() as f64,
                best_sense: format!("{l}.v.1"),
            })
            .collect())
    }
}

fn ac1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ks = [1, 10];
    let mut n_rankings = 0;
    for trial in 0..25 {
        let n_cases = 4;
        let mut rankings = Vec::new();
        let mut cases = Vec::new();
        for i in 0..n_cases {
            let mut pair: [Vec<String>; 2] = Default::default();
            let mut gold = [String::new(), String::new()];
            for a in 0..2 {
                let vocab = rng.random_range(1..=50);
                let mut labels: Vec<String> = (0..vocab).map(|v| format!("l{v}")).collect();
                labels.shuffle(&mut rng);
                gold[a] = labels[rng.random_range(0..vocab)].clone();
                pair[a] = labels;
            }
            rankings.push(pair);
            cases.push(TypedProcess {
                id: format!("t{trial}-{i}"),
                process: EventProcess::new(vec![
                    PrimitiveEvent::new(format!("p{i}"), "x"),
                    PrimitiveEvent::new("q", "y"),
                ])
                .unwrap(),
                action_label: gold[0].clone(),
                object_label: gold[1].clone(),
                source_article: "t".into(),
            });
        }
        n_rankings += 2 * n_cases;
        let typer = FixedTyper(rankings.clone());
        let report = evaluate(&typer, "synthetic", &cases, &ks).map_err(|e| e.to_string())?.report;
        for axis in Axis::BOTH {
            let rs: Vec<Vec<String>> = rankings.iter().map(|r| r[axis as usize].clone()).collect();
            let golds: Vec<String> = cases.iter().map(|c| c.label(axis).to_string()).collect();
            let (mrr, recall) = oracle_metrics(&rs, &golds, &ks);
            let m = report.axis(axis);
            ensure(m.mrr == mrr, || format!("trial {trial} {axis}: mrr {} vs oracle {mrr}", m.mrr))?;
            for (k, r) in ks.iter().zip(&recall) {
                let got = m.recall_at(*k).unwrap();
                ensure(got == *r, || format!("trial {trial} {axis}: recall@{k} {got} vs oracle {r}"))?;
            }
        }
    }
    let e = within(Duration::from_secs(5), t)?;
    Ok(format!("{n_rankings} rankings identical to brute force ({e:.2?})"))
}

// ---- AC2 ---------------------------------------------------------------------

fn ac2() -> Outcome {
    let eye = Array2::eye(2);
    let p = [1.0, 0.0];
    let a = process_loss(&p, &[1.0, 0.0], &[&[0.0, 1.0]], &eye, 0.2).map_err(|e| e.to_string())?;
    let b = process_loss(&p, &[0.0, 1.0], &[&[1.0, 0.0]], &eye, 0.2).map_err(|e| e.to_string())?;
    let j = joint_loss(a, b);
    let checks = [
        ("hinge(0.9,0.3,0.2)", hinge(0.9, 0.3, 0.2), 0.0),
        ("hinge(0.5,0.6,0.1)", hinge(0.5, 0.6, 0.1), 0.2),
        ("hinge(0.37,0.37,0)", hinge(0.37, 0.37, 0.0), 0.0),
        ("loss satisfied", a, 0.0),
        ("loss violated", b, 1.2),
        ("joint", j, 1.2),
    ];
    for (name, got, want) in checks {
        ensure((got - want).abs() <= 1e-6, || format!("{name}: {got} vs {want}"))?;
    }
    Ok(format!("{} fixed cases within 1e-6", checks.len()))
}

// ---- AC3 ---------------------------------------------------------------------

fn ac3() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 4;
    let model = P2GTModel::new(ToyEncoder::new(11, dim, 64, true), TrainConfig::joint());
    let mut ties = 0;
    for trial in 0..100 {
        // a small pool of integer directions, reused and scaled by powers of
        // two so that exact score ties between labels are common
        let pool: Vec<Vec<f64>> = (0..rng.random_range(2..6))
            .map(|_| loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-2..=2) as f64).collect();
                if v.iter().any(|x| *x != 0.0) {
                    break v;
                }
            })
            .collect();
        let n_labels = rng.random_range(1..=20);
        let mut entries = Vec::new();
        for l in 0..n_labels {
            for s in 0..rng.random_range(1..=3) {
                let scale = [1.0, 2.0, 4.0][rng.random_range(0..3)];
                let v: Vec<f64> = pool[rng.random_range(0..pool.len())].iter().map(|x| x * scale).collect();
                entries.push((format!("label{l:02}"), s, v));
            }
        }
        entries.shuffle(&mut rng);
        let index = LabelIndex::from_entries(
            Axis::Object,
            dim,
            entries
                .iter()
                .map(|(l, s, v)| IndexEntry {
                    label: l.clone(),
                    sense_id: format!("{l}.n.{}", s + 1),
                    vector: EmbeddingVector::from(v.clone()),
                })
                .collect(),
            model.fingerprint(),
        )
        .map_err(|e| e.to_string())?;
        let words = ["dig", "hole", "seed", "water", "soil", "pot"];
        let process = EventProcess::new(
            (0..rng.random_range(2..5))
                .map(|_| PrimitiveEvent::new(words[rng.random_range(0..6)], format!("the {}", words[rng.random_range(0..6)])))
                .collect(),
        )
        .unwrap();
        let got = rank_labels(&process, Axis::Object, &model, &index, usize::MAX).map_err(|e| e.to_string())?;
        let q = model.query(&process, Axis::Object).map_err(|e| e.to_string())?;
        let flat: Vec<(String, Vec<f64>)> = entries.into_iter().map(|(l, _, v)| (l, v)).collect();
        let want = oracle_ranking(&flat, q.as_slice());
        ties += want.windows(2).filter(|w| w[0].1 == w[1].1).count();
        let got_labels: Vec<&str> = got.iter().map(|p| p.label.as_str()).collect();
        let want_labels: Vec<&str> = want.iter().map(|p| p.0.as_str()).collect();
        ensure(got_labels == want_labels, || format!("trial {trial}: {got_labels:?} vs {want_labels:?}"))?;
        for (g, w) in got.iter().zip(&want) {
            ensure((g.score - w.1).abs() < 1e-12, || format!("trial {trial}: score {} vs {}", g.score, w.1))?;
        }
    }
    let e = within(Duration::from_secs(5), t)?;
    Ok(format!("100 indexes match brute force, {ties} tied neighbours ({e:.2?})"))
}

// ---- AC4 ---------------------------------------------------------------------

fn ac4() -> Outcome {
    let articles = load_articles(&fixtures().join("articles")).map_err(|e| e.to_string())?;
    ensure(articles.len() >= 10, || format!("only {} fixture articles", articles.len()))?;
    ensure(articles.iter().any(|a| a.step_sequences.len() > 1), || "no multi-alternative article".into())?;
    ensure(articles.iter().any(|a| a.validate().is_err()), || "no invalid article".into())?;
    for run in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let diff = rebuild_golden(dir.path());
        ensure(diff.is_empty(), || format!("run {run}: differs from golden: {diff:?}"))?;
    }
    Ok(format!("{} articles, {} files byte-identical over 2 runs", articles.len(), GOLDEN_FILES.len()))
}

// ---- AC5 / AC7 ---------------------------------------------------------------

const TOY_SEED: u64 = 7;
const STOPWORDS: [&str; 8] = ["or", "things", "using", "a", "and", "with", "that", "people"];

fn gloss_overlap_ok() -> Result<(), String> {
    for case in toy_corpus() {
        let words: std::collections::BTreeSet<String> = tokenize(&case.process.to_string()).into_iter().collect();
        let a = ACTIONS.iter().find(|a| a.label == case.action_label).unwrap();
        let o = OBJECTS.iter().find(|o| o.label == case.object_label).unwrap();
        for gloss in [action_gloss(a), object_gloss(o)] {
            let shared = tokenize(&gloss)
                .into_iter()
                .filter(|w| !STOPWORDS.contains(&w.as_str()) && words.contains(w))
                .collect::<std::collections::BTreeSet<_>>();
            ensure(shared.len() >= 2, || format!("{}: gloss `{gloss}` shares {shared:?}", case.id))?;
        }
    }
    Ok(())
}

fn ac5() -> Outcome {
    let corpus = toy_corpus();
    let n_a = corpus.iter().map(|c| &c.action_label).collect::<std::collections::BTreeSet<_>>().len();
    let n_o = corpus.iter().map(|c| &c.object_label).collect::<std::collections::BTreeSet<_>>().len();
    ensure(corpus.len() == 60 && n_a == 6 && n_o == 8, || format!("corpus {} / {n_a} / {n_o}", corpus.len()))?;
    gloss_overlap_ok()?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let t = Instant::now();
        let split = toy_split(TOY_SEED);
        let out = toy_train(&split, toy_config(TOY_SEED));
        let idx = toy_indexes(&out.model, &split, &[]);
        let train = toy_eval(&out.model, &idx, "train", &split.train);
        let held: Vec<TypedProcess> = split.dev.iter().chain(&split.test).cloned().collect();
        let held = toy_eval(&out.model, &idx, "held-out", &held);
        let e = within(Duration::from_secs(120), t)?;
        let r1 = |r: &p2gt_core::evaluation::EvalReport, a| r.axis(a).recall_at(1).unwrap();
        let (ta, to, ha, ho) = (r1(&train, Axis::Action), r1(&train, Axis::Object), r1(&held, Axis::Action), r1(&held, Axis::Object));
        ensure(ta >= 90.0 && to >= 90.0, || format!("train recall@1 {ta:.2}/{to:.2}"))?;
        ensure(ha >= 60.0 && ho >= 60.0, || format!("held-out recall@1 {ha:.2}/{ho:.2}"))?;
        Ok(format!(
            "train R@1 {ta:.2}/{to:.2}, held-out ({} cases) R@1 {ha:.2}/{ho:.2}, {e:.2?} on 1 thread",
            held.n_cases
        ))
    })
}

fn ac7() -> Outcome {
    let split = toy_split(TOY_SEED);
    ensure(split.all().all(|c| c.action_label != ZERO_SHOT.label), || "zero-shot label seen in data".into())?;
    let out = toy_train(&split, toy_config(TOY_SEED));
    let idx = toy_indexes(&out.model, &split, &[ZERO_SHOT.label]);
    let case = zero_shot_case(0);
    let ranked = rank_labels(&case.process, Axis::Action, &out.model, &idx[0], 3).map_err(|e| e.to_string())?;
    ensure(ranked[0].label == ZERO_SHOT.label, || format!("top-3 {:?} for `{}`", ranked, case.process))?;
    Ok(format!(
        "`{}` ranked top-1 ({:.4} vs {:.4}) among {} actions",
        ZERO_SHOT.label,
        ranked[0].score,
        ranked[1].score,
        idx[0].n_labels()
    ))
}

// ---- AC6 ---------------------------------------------------------------------

fn dev_mrr(split: &p2gt_core::corpus::DatasetSplit, config: TrainConfig) -> (f64, f64) {
    let out = toy_train(split, config);
    let idx = toy_indexes(&out.model, split, &[]);
    let r = toy_eval(&out.model, &idx, "dev", &split.dev);
    (r.action.mrr, r.object.mrr)
}

fn ac6() -> Outcome {
    let mut full_wins = 0;
    let mut joint_wins = 0;
    let mut rows = Vec::new();
    for seed in 0..5 {
        let split = toy_split(seed);
        let full = dev_mrr(&split, toy_config(seed));
        let partial = dev_mrr(&split, TrainConfig { rendering: ProcessRendering::Partial, ..toy_config(seed) });
        let single = (dev_mrr(&split, toy_single(Axis::Action, seed)).0, dev_mrr(&split, toy_single(Axis::Object, seed)).1);
        let mean = |p: (f64, f64)| (p.0 + p.1) / 2.0;
        full_wins += usize::from(mean(full) >= mean(partial));
        joint_wins += usize::from(mean(full) >= mean(single));
        rows.push(format!("{:.1}/{:.1}/{:.1}", mean(full), mean(partial), mean(single)));
    }
    let detail = format!("full>=partial {full_wins}/5, joint>=single {joint_wins}/5 [full/partial/single MRR: {}]", rows.join(", "));
    ensure(full_wins >= 4 && joint_wins >= 3, || detail.clone())?;
    Ok(detail)
}

// ---- AC8 ---------------------------------------------------------------------

fn run_suite<S: proptest::strategy::Strategy>(
    name: &str,
    strategy: S,
    check: impl Fn(&S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, |v| check(&v)).map_err(|e| format!("{name}: {e}"))
}

fn ac8() -> Outcome {
    run_suite("hinge bounds", hinge_strategy(), check_hinge)?;
    run_suite("negative exclusion", sampler_strategy(), check_sampler)?;
    run_suite("index duplication", index_strategy(), check_index_duplication)?;
    run_suite("bucket partition", bucket_strategy(), check_bucket_partition)?;
    run_suite("split determinism", split_strategy(), check_split)?;
    Ok("5 suites x 1000 trials".into())
}

// ---- AC9 ---------------------------------------------------------------------

fn ac9() -> Outcome {
    let dataset: Vec<TypedProcess> = read_jsonl(&fixtures().join("golden/dataset.jsonl")).map_err(|e| e.to_string())?;
    let s = compute_stats(&dataset, &RuleHeadAnnotator, &SuffixLemmatizer).map_err(|e| e.to_string())?.summary();
    let hist = |m: &std::collections::BTreeMap<usize, usize>| m.iter().map(|(a, b)| (*a, *b)).collect::<Vec<_>>();
    let checks = [
        ("processes", s.n_processes == 13),
        ("action labels", s.n_action_labels == 10),
        ("object labels", s.n_object_labels == 12),
        ("external action", (s.pct_external_action - 900.0 / 13.0).abs() < 1e-9),
        ("external object", (s.pct_external_object - 700.0 / 13.0).abs() < 1e-9),
        ("length histogram", hist(&s.length_histogram) == [(2, 2), (3, 7), (4, 3), (6, 1)]),
        ("action frequencies", hist(&s.action_freq_histogram) == [(1, 7), (2, 3)]),
        ("object frequencies", hist(&s.object_freq_histogram) == [(1, 11), (2, 1)]),
        ("labels below 10", s.pct_action_labels_below_10 == 100.0 && s.pct_object_labels_below_10 == 100.0),
    ];
    for (name, ok) in checks {
        ensure(ok, || format!("{name} differs from hand count: {s:?}"))?;
    }
    Ok(format!(
        "external {:.2}%/{:.2}%, histograms match hand counts",
        s.pct_external_action, s.pct_external_object
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1", "metric oracle equivalence", ac1),
        ("AC2", "loss arithmetic", ac2),
        ("AC3", "inference oracle equivalence", ac3),
        ("AC4", "corpus golden files", ac4),
        ("AC5", "end-to-end toy learning", ac5),
        ("AC6", "ablation trends at toy scale", ac6),
        ("AC7", "zero-shot via glosses", ac7),
        ("AC8", "invariant suites", ac8),
        ("AC9", "fixture statistics", ac9),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
