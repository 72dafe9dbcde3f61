//! Flat `section.key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key must be
//! known; relative paths are resolved against the directory of the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::{EncoderKind, S2LConfig};
use crate::encoder::EncoderConfig;
use crate::evaluation::BucketKind;
use crate::glosses::GlossStrategy;
use crate::model::{ProcessRendering, TrainConfig};
use crate::{Axis, IoError};

/// Environment variable consulted when no config path is given.
pub const CONFIG_ENV: &str = "P2GT_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("duplicate config key `{0}`")]
    DuplicateKey(String),
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("no config given and {CONFIG_ENV} is not set")]
    Missing,
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsdBackendKind {
    Mfs,
    Lesk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyBase {
    Train,
    All,
}

/// Where fallback lemma vectors come from.
#[derive(Debug, Clone, PartialEq)]
pub enum LemmaVectors {
    /// Mean static token embeddings of the toy encoder.
    Encoder,
    File(PathBuf),
    None,
}

/// Static word vectors for the baselines.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineVectors {
    /// Seeded random table over the corpus words.
    Random { dim: usize },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub split_prefix: Option<PathBuf>,
    pub inventory: Option<PathBuf>,
    pub strategy: GlossStrategy,
    pub wsd_backend: WsdBackendKind,
    pub wsd_process_context: bool,
    pub lemma_vectors: LemmaVectors,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
    pub eval_split: String,
    pub eval_buckets: BucketKind,
    pub eval_k: Vec<usize>,
    pub freq_base: FrequencyBase,
    pub baseline_kind: EncoderKind,
    pub baseline_hidden: usize,
    pub baseline_vectors: BaselineVectors,
    pub output_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "seed",
    "data.split_prefix",
    "glosses.inventory",
    "glosses.strategy",
    "glosses.wsd_backend",
    "glosses.wsd_process_context",
    "glosses.lemma_vectors",
    "encoder.backend",
    "encoder.dim",
    "encoder.max_len",
    "encoder.pool_specials",
    "train.joint",
    "train.axis",
    "train.margin_action",
    "train.margin_object",
    "train.learning_rate",
    "train.batch_size",
    "train.epochs",
    "train.negatives_per_axis",
    "train.rendering",
    "train.select_on_dev",
    "eval.split",
    "eval.buckets",
    "eval.k",
    "eval.freq_base",
    "baseline.kind",
    "baseline.hidden",
    "baseline.vectors",
    "output.dir",
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            split_prefix: None,
            inventory: None,
            strategy: GlossStrategy::Mfs,
            wsd_backend: WsdBackendKind::Mfs,
            wsd_process_context: false,
            lemma_vectors: LemmaVectors::Encoder,
            encoder: EncoderConfig::default(),
            train: TrainConfig::joint(),
            eval_split: "test".into(),
            eval_buckets: BucketKind::None,
            eval_k: vec![1, 10],
            freq_base: FrequencyBase::Train,
            baseline_kind: EncoderKind::Mean,
            baseline_hidden: 64,
            baseline_vectors: BaselineVectors::Random { dim: 64 },
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::DuplicateKey(k.to_string()));
        }
    }
    Ok(out)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_string(),
        message: e.to_string(),
    })
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Parse `text`; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let pairs = parse_pairs(text)?;
        let mut c = RunConfig::default();
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let get = |k: &str| pairs.get(k).map(String::as_str);

        if let Some(v) = get("seed") {
            c.seed = value("seed", v)?;
        }
        c.split_prefix = get("data.split_prefix").map(path);
        c.inventory = get("glosses.inventory").map(path);
        if let Some(v) = get("glosses.strategy") {
            c.strategy = value("glosses.strategy", v)?;
        }
        if let Some(v) = get("glosses.wsd_backend") {
            c.wsd_backend = match v {
                "mfs" => WsdBackendKind::Mfs,
                "lesk" => WsdBackendKind::Lesk,
                _ => return Err(bad("glosses.wsd_backend", "expected mfs|lesk")),
            };
        }
        if let Some(v) = get("glosses.wsd_process_context") {
            c.wsd_process_context = value("glosses.wsd_process_context", v)?;
        }
        if let Some(v) = get("glosses.lemma_vectors") {
            c.lemma_vectors = match v {
                "encoder" => LemmaVectors::Encoder,
                "none" => LemmaVectors::None,
                p => LemmaVectors::File(path(p)),
            };
        }
        if let Some(v) = get("encoder.backend") {
            c.encoder.backend = v.to_string();
        }
        if let Some(v) = get("encoder.dim") {
            c.encoder.dim = value("encoder.dim", v)?;
        }
        if let Some(v) = get("encoder.max_len") {
            c.encoder.max_len = value("encoder.max_len", v)?;
        }
        if let Some(v) = get("encoder.pool_specials") {
            c.encoder.pool_specials = value("encoder.pool_specials", v)?;
        }
        if c.encoder.dim == 0 {
            return Err(bad("encoder.dim", "must be positive"));
        }
        if c.encoder.max_len < 2 {
            return Err(bad("encoder.max_len", "must be at least 2"));
        }

        let joint: bool = match get("train.joint") {
            Some(v) => value("train.joint", v)?,
            None => true,
        };
        let axis: Axis = match get("train.axis") {
            Some(v) => value("train.axis", v)?,
            None => Axis::Action,
        };
        let mut t = if joint { TrainConfig::joint() } else { TrainConfig::single(axis) };
        macro_rules! train_field {
            ($key:literal, $field:ident) => {
                if let Some(v) = get($key) {
                    t.$field = value($key, v)?;
                }
            };
        }
        train_field!("train.margin_action", margin_action);
        train_field!("train.margin_object", margin_object);
        train_field!("train.learning_rate", learning_rate);
        train_field!("train.batch_size", batch_size);
        train_field!("train.epochs", epochs);
        train_field!("train.negatives_per_axis", negatives_per_axis);
        train_field!("train.select_on_dev", select_on_dev);
        if let Some(v) = get("train.rendering") {
            t.rendering = value::<ProcessRendering>("train.rendering", v)?;
        }
        t.seed = c.seed;
        t.gloss_strategy = c.strategy;
        t.validate().map_err(|e| bad("train", e.to_string()))?;
        c.train = t;

        if let Some(v) = get("eval.split") {
            if v != "dev" && v != "test" && v != "train" {
                return Err(bad("eval.split", "expected dev|test|train"));
            }
            c.eval_split = v.to_string();
        }
        if let Some(v) = get("eval.buckets") {
            c.eval_buckets = value("eval.buckets", v)?;
        }
        if let Some(v) = get("eval.k") {
            c.eval_k = parse_ks(v).map_err(|m| bad("eval.k", m))?;
        }
        if let Some(v) = get("eval.freq_base") {
            c.freq_base = match v {
                "train" => FrequencyBase::Train,
                "all" => FrequencyBase::All,
                _ => return Err(bad("eval.freq_base", "expected train|all")),
            };
        }
        if let Some(v) = get("baseline.kind") {
            c.baseline_kind = value("baseline.kind", v)?;
        }
        if let Some(v) = get("baseline.hidden") {
            c.baseline_hidden = value("baseline.hidden", v)?;
        }
        if let Some(v) = get("baseline.vectors") {
            c.baseline_vectors = match v.strip_prefix("random:") {
                Some(d) => BaselineVectors::Random {
                    dim: value("baseline.vectors", d)?,
                },
                None if v == "random" => BaselineVectors::Random { dim: 64 },
                None => BaselineVectors::File(path(v)),
            };
        }
        c.output_dir = path(get("output.dir").unwrap_or("out"));
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::parse(&text, &base)
    }

    /// Load `explicit`, else the file named by `P2GT_CONFIG`.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, ConfigError> {
        match explicit {
            Some(p) => RunConfig::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => RunConfig::load(Path::new(&p)),
                None => Err(ConfigError::Missing),
            },
        }
    }

    /// Baseline settings sharing the optimiser schedule of the main model.
    pub fn s2l(&self) -> S2LConfig {
        S2LConfig {
            kind: self.baseline_kind,
            hidden: self.baseline_hidden,
            learning_rate: self.train.learning_rate,
            batch_size: self.train.batch_size,
            epochs: self.train.epochs,
            seed: self.seed,
            ctx_dim: self.encoder.dim,
            max_len: self.encoder.max_len,
            select_on_dev: self.train.select_on_dev,
        }
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn to_text(&self) -> String {
        let p = |o: &Option<PathBuf>| o.as_ref().map_or(String::new(), |p| p.display().to_string());
        let t = &self.train;
        let ks: Vec<String> = self.eval_k.iter().map(usize::to_string).collect();
        let rows: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("data.split_prefix", p(&self.split_prefix)),
            ("glosses.inventory", p(&self.inventory)),
            ("glosses.strategy", self.strategy.to_string()),
            (
                "glosses.wsd_backend",
                match self.wsd_backend {
                    WsdBackendKind::Mfs => "mfs".into(),
                    WsdBackendKind::Lesk => "lesk".into(),
                },
            ),
            ("glosses.wsd_process_context", self.wsd_process_context.to_string()),
            (
                "glosses.lemma_vectors",
                match &self.lemma_vectors {
                    LemmaVectors::Encoder => "encoder".into(),
                    LemmaVectors::None => "none".into(),
                    LemmaVectors::File(f) => f.display().to_string(),
                },
            ),
            ("encoder.backend", self.encoder.backend.clone()),
            ("encoder.dim", self.encoder.dim.to_string()),
            ("encoder.max_len", self.encoder.max_len.to_string()),
            ("encoder.pool_specials", self.encoder.pool_specials.to_string()),
            ("train.joint", t.joint.to_string()),
            ("train.axis", t.axis.to_string()),
            ("train.margin_action", t.margin_action.to_string()),
            ("train.margin_object", t.margin_object.to_string()),
            ("train.learning_rate", t.learning_rate.to_string()),
            ("train.batch_size", t.batch_size.to_string()),
            ("train.epochs", t.epochs.to_string()),
            ("train.negatives_per_axis", t.negatives_per_axis.to_string()),
            ("train.rendering", t.rendering.to_string()),
            ("train.select_on_dev", t.select_on_dev.to_string()),
            ("eval.split", self.eval_split.clone()),
            ("eval.buckets", self.eval_buckets.to_string()),
            ("eval.k", ks.join(",")),
            (
                "eval.freq_base",
                match self.freq_base {
                    FrequencyBase::Train => "train".into(),
                    FrequencyBase::All => "all".into(),
                },
            ),
            ("baseline.kind", self.baseline_kind.to_string()),
            ("baseline.hidden", self.baseline_hidden.to_string()),
            (
                "baseline.vectors",
                match &self.baseline_vectors {
                    BaselineVectors::Random { dim } => format!("random:{dim}"),
                    BaselineVectors::File(f) => f.display().to_string(),
                },
            ),
            ("output.dir", self.output_dir.display().to_string()),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            if !v.is_empty() {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}

/// `"1,10"` into sorted unique positive cutoffs.
pub fn parse_ks(text: &str) -> Result<Vec<usize>, String> {
    let mut ks = text
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if ks.contains(&0) {
        return Err("cutoffs must be positive".into());
    }
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}
