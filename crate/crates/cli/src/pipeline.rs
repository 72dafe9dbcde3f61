//! Glue between the run config, the artifact layout and the core library.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use p2gt_core::config::{LemmaVectors, RunConfig, WsdBackendKind};
use p2gt_core::corpus::{DatasetSplit, TypedProcess};
use p2gt_core::encoder::StaticVectors;
use p2gt_core::evaluation::{bucket_report, label_frequencies, BucketKind, EvalReport, Evaluation};
use p2gt_core::glosses::{GlossResolver, LeskWsd, MfsWsd, SenseInventory, WsdBackend};
use p2gt_core::{write_jsonl, Axis, Pos};

pub const RESOLVED_CONFIG: &str = "config.resolved.cfg";

pub fn load_config(path: Option<&Path>, out: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = RunConfig::resolve(path).context("loading run config")?;
    if let Some(o) = out {
        cfg.output_dir = o.to_path_buf();
    }
    Ok(cfg)
}

pub fn load_split(cfg: &RunConfig) -> Result<DatasetSplit> {
    let Some(prefix) = &cfg.split_prefix else {
        bail!("config does not set data.split_prefix");
    };
    DatasetSplit::read(prefix).with_context(|| format!("reading split {}", prefix.display()))
}

pub fn split_cases<'a>(split: &'a DatasetSplit, name: &str) -> &'a [TypedProcess] {
    match name {
        "train" => &split.train,
        "dev" => &split.dev,
        _ => &split.test,
    }
}

/// Gloss resolver with fallback lemma vectors covering the inventory and
/// every label of the split.
pub fn resolver(cfg: &RunConfig, split: &DatasetSplit) -> Result<GlossResolver> {
    let Some(path) = &cfg.inventory else {
        bail!("config does not set glosses.inventory");
    };
    let mut inventory = SenseInventory::load_tsv(path).with_context(|| format!("loading {}", path.display()))?;
    match &cfg.lemma_vectors {
        LemmaVectors::None => {}
        LemmaVectors::File(f) => {
            let v = StaticVectors::load_text(f).with_context(|| format!("loading {}", f.display()))?;
            inventory = inventory.with_lemma_vectors(v);
        }
        LemmaVectors::Encoder => {
            let enc = cfg.encoder.build(cfg.seed)?;
            let mut words: Vec<String> = Vec::new();
            for pos in [Pos::Verb, Pos::Noun] {
                words.extend(inventory.lexemes(pos).map(str::to_string));
            }
            for c in split.all() {
                words.push(c.action_label.clone());
                words.push(c.object_label.clone());
            }
            let v = StaticVectors::from_encoder(&enc, words.iter().map(String::as_str));
            inventory = inventory.with_lemma_vectors(v);
        }
    }
    let wsd: Box<dyn WsdBackend> = match cfg.wsd_backend {
        WsdBackendKind::Mfs => Box::new(MfsWsd),
        WsdBackendKind::Lesk => Box::new(LeskWsd),
    };
    let mut r = GlossResolver::new(inventory, cfg.strategy, wsd);
    r.process_context = cfg.wsd_process_context;
    Ok(r)
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn snapshot_config(cfg: &RunConfig, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    write_text(&dir.join(RESOLVED_CONFIG), &cfg.to_text())
}

pub fn checkpoint_dir(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    explicit.map_or_else(|| cfg.output_dir.join("checkpoint"), Path::to_path_buf)
}

pub fn index_dir(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    explicit.map_or_else(|| cfg.output_dir.join("index"), Path::to_path_buf)
}

pub fn index_file(dir: &Path, axis: Axis) -> PathBuf {
    dir.join(format!("{axis}.index.bin"))
}

pub fn check_split_digest(expected: Option<&str>, split: &DatasetSplit) -> Result<()> {
    if let Some(d) = expected {
        let got = split.manifest().digest;
        if got != d {
            bail!("split digest {got} does not match the digest recorded at training time ({d})");
        }
    }
    Ok(())
}

/// Add buckets, then write `<name>.report.json`, `<name>.report.txt` and
/// `<name>.cases.jsonl` into `dir`.
pub fn finish_report(
    cfg: &RunConfig,
    split: &DatasetSplit,
    mut evaluation: Evaluation,
    buckets: BucketKind,
    dir: &Path,
) -> Result<EvalReport> {
    let base: Vec<&TypedProcess> = match cfg.freq_base {
        p2gt_core::config::FrequencyBase::Train => split.train.iter().collect(),
        p2gt_core::config::FrequencyBase::All => split.all().collect(),
    };
    let fa = label_frequencies(base.iter().copied(), Axis::Action);
    let fo = label_frequencies(base.iter().copied(), Axis::Object);
    let ks = evaluation.report.ks.clone();
    evaluation.report.buckets = bucket_report(&evaluation.cases, buckets, &fa, &fo, &ks);
    create_dir(dir)?;
    let name = &evaluation.report.split;
    write_json(&dir.join(format!("{name}.report.json")), &evaluation.report)?;
    write_text(&dir.join(format!("{name}.report.txt")), &evaluation.report.to_string())?;
    let cases = dir.join(format!("{name}.cases.jsonl"));
    write_jsonl(&cases, &evaluation.cases)?;
    Ok(evaluation.report)
}
