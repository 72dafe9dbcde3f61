//! Sequence-to-label baselines: regress a process encoding directly onto
//! the surface-form embedding of its label and rank labels by cosine.

mod rnn;
mod store;
mod train;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

pub use rnn::{BiRnn, ElmanCell};
pub use store::{load_baseline, save_baseline, BaselineManifest};
pub use train::s2l_train;

use crate::corpus::EventProcess;
use crate::encoder::{render_process, tokenize, trigram_vector, EncoderError, RenderMode, StaticVectors, ToyEncoder};
use crate::inference::{InferenceError, RankedPrediction, Typer};
use crate::model::{cosine, ModelError};
use crate::Axis;

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("unknown baseline kind `{0}` (expected mean|rnn|ctx)")]
    UnknownKind(String),
    #[error("invalid baseline config: {0}")]
    Config(String),
    #[error("process has no word tokens")]
    EmptyProcess,
    #[error("baseline checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Io(#[from] crate::IoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    /// Mean of static word vectors; order-invariant, not trained.
    Mean,
    /// Bidirectional Elman network over static word vectors.
    Rnn,
    /// The toy contextual encoder with its trainable linear layer.
    Ctx,
}

impl FromStr for EncoderKind {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(EncoderKind::Mean),
            "rnn" => Ok(EncoderKind::Rnn),
            "ctx" => Ok(EncoderKind::Ctx),
            other => Err(BaselineError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncoderKind::Mean => "mean",
            EncoderKind::Rnn => "rnn",
            EncoderKind::Ctx => "ctx",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2LConfig {
    pub kind: EncoderKind,
    /// Hidden size of each recurrent direction.
    pub hidden: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Dimension of the toy contextual encoder (ctx only).
    pub ctx_dim: usize,
    pub max_len: usize,
    pub select_on_dev: bool,
}

impl S2LConfig {
    pub fn new(kind: EncoderKind) -> Self {
        S2LConfig {
            kind,
            hidden: 64,
            learning_rate: 1e-4,
            batch_size: 64,
            epochs: 50,
            seed: 0,
            ctx_dim: 128,
            max_len: 256,
            select_on_dev: true,
        }
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |m: &str| Err(BaselineError::Config(m.to_string()));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be at least 1");
        }
        if self.hidden == 0 || self.ctx_dim == 0 {
            return bad("hidden and ctx_dim must be positive");
        }
        if self.max_len < 2 {
            return bad("max_len must be at least 2");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// Static vector for a word, falling back to character trigram hashes.
pub(crate) fn word_vector(vectors: &StaticVectors, word: &str, seed: u64) -> (Array1<f64>, bool) {
    match vectors.get(word) {
        Some(v) => (Array1::from(v.to_vec()), false),
        None => (Array1::from(trigram_vector(word, vectors.dim(), seed)), true),
    }
}

/// Label surface-form embeddings for one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    pub axis: Axis,
    pub labels: Vec<String>,
    pub vectors: Vec<Array1<f64>>,
    /// Labels embedded through the trigram fallback.
    pub fallbacks: Vec<String>,
}

impl LabelTable {
    /// Mean of the static vectors of each label's tokens.
    pub fn build<'a>(
        labels: impl IntoIterator<Item = &'a str>,
        axis: Axis,
        vectors: &StaticVectors,
        seed: u64,
    ) -> Result<Self, BaselineError> {
        let mut out = LabelTable {
            axis,
            labels: Vec::new(),
            vectors: Vec::new(),
            fallbacks: Vec::new(),
        };
        let sorted: BTreeSet<&str> = labels.into_iter().collect();
        for label in sorted {
            let mut toks = tokenize(label);
            if toks.is_empty() {
                toks.push(label.to_string());
            }
            let mut acc = Array1::zeros(vectors.dim());
            let mut fell_back = false;
            for t in &toks {
                let (v, fb) = word_vector(vectors, t, seed);
                fell_back |= fb;
                acc += &v;
            }
            if fell_back {
                log::info!("{axis} label `{label}` not in static vocabulary, using trigram fallback");
                out.fallbacks.push(label.to_string());
            }
            out.labels.push(label.to_string());
            out.vectors.push(acc / toks.len() as f64);
        }
        if out.labels.is_empty() {
            return Err(BaselineError::Config(format!("empty {axis} label vocabulary")));
        }
        Ok(out)
    }

    pub fn get(&self, label: &str) -> Option<&Array1<f64>> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok().map(|i| &self.vectors[i])
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Labels by cosine to `pred`, ties lexicographic.
    pub fn rank(&self, pred: &[f64], k: usize) -> Result<Vec<RankedPrediction>, ModelError> {
        let mut out = Vec::with_capacity(self.labels.len());
        for (label, v) in self.labels.iter().zip(&self.vectors) {
            out.push(RankedPrediction {
                label: label.clone(),
                score: cosine(pred, v.as_slice().expect("contiguous"))?,
                best_sense: label.clone(),
            });
        }
        out.sort_by(|a, b| b.score.total_cmp(&a.score));
        out.truncate(k);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceEncoder {
    Mean,
    Rnn(Box<BiRnn>),
    Ctx(ToyEncoder),
}

/// Encoder input for one process, computed once per case.
#[derive(Debug, Clone)]
pub(crate) enum EncodedInput {
    Pooled(Array1<f64>),
    Sequence(Vec<Array1<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct S2LModel {
    pub config: S2LConfig,
    pub encoder: SequenceEncoder,
    pub word_vectors: StaticVectors,
    pub head_action: Array2<f64>,
    pub head_object: Array2<f64>,
    pub table_action: LabelTable,
    pub table_object: LabelTable,
}

impl S2LModel {
    pub fn head(&self, axis: Axis) -> &Array2<f64> {
        match axis {
            Axis::Action => &self.head_action,
            Axis::Object => &self.head_object,
        }
    }

    pub fn table(&self, axis: Axis) -> &LabelTable {
        match axis {
            Axis::Action => &self.table_action,
            Axis::Object => &self.table_object,
        }
    }

    fn vector_seed(&self) -> u64 {
        crate::seed::sub_seed(self.config.seed, crate::seed::STATIC_VECTORS)
    }

    pub(crate) fn input(&self, process: &EventProcess) -> Result<EncodedInput, BaselineError> {
        let seq = render_process(process, RenderMode::Full);
        match &self.encoder {
            SequenceEncoder::Ctx(enc) => Ok(EncodedInput::Pooled(enc.pooled_input(&seq)?.0)),
            other => {
                let words: Vec<&str> = seq.words().collect();
                if words.is_empty() {
                    return Err(BaselineError::EmptyProcess);
                }
                let xs: Vec<Array1<f64>> = words
                    .iter()
                    .map(|w| word_vector(&self.word_vectors, w, self.vector_seed()).0)
                    .collect();
                if matches!(other, SequenceEncoder::Mean) {
                    let n = xs.len() as f64;
                    let sum = xs.into_iter().fold(Array1::zeros(self.word_vectors.dim()), |a, x| a + x);
                    Ok(EncodedInput::Pooled(sum / n))
                } else {
                    Ok(EncodedInput::Sequence(xs))
                }
            }
        }
    }

    pub(crate) fn encode_input(&self, input: &EncodedInput) -> Array1<f64> {
        match (&self.encoder, input) {
            (SequenceEncoder::Mean, EncodedInput::Pooled(x)) => x.clone(),
            (SequenceEncoder::Ctx(enc), EncodedInput::Pooled(x)) => enc.project(x).0,
            (SequenceEncoder::Rnn(rnn), EncodedInput::Sequence(xs)) => rnn.encode(xs),
            _ => unreachable!("input built for a different encoder"),
        }
    }

    /// Predicted label-space vector for one axis.
    pub fn predict_vector(&self, process: &EventProcess, axis: Axis) -> Result<Array1<f64>, BaselineError> {
        let z = self.encode_input(&self.input(process)?);
        Ok(self.head(axis).dot(&z))
    }

    /// Flat parameter blocks in checkpoint order.
    pub fn param_blocks(&self) -> Vec<(&'static str, &Array2<f64>)> {
        let mut out: Vec<(&'static str, &Array2<f64>)> = Vec::new();
        match &self.encoder {
            SequenceEncoder::Mean => {}
            SequenceEncoder::Rnn(r) => {
                out.push(("rnn.forward.wx", &r.forward.wx));
                out.push(("rnn.forward.wh", &r.forward.wh));
                out.push(("rnn.forward.b", &r.forward.b));
                out.push(("rnn.backward.wx", &r.backward.wx));
                out.push(("rnn.backward.wh", &r.backward.wh));
                out.push(("rnn.backward.b", &r.backward.b));
            }
            SequenceEncoder::Ctx(e) => out.push(("ctx.weight", e.weight())),
        }
        out.push(("head.action", &self.head_action));
        out.push(("head.object", &self.head_object));
        out
    }

    pub fn fingerprint(&self) -> String {
        let mut bytes = self.config.kind.to_string().into_bytes();
        bytes.extend_from_slice(&self.config.seed.to_le_bytes());
        bytes.extend_from_slice(self.word_vectors.to_text().as_bytes());
        for (name, m) in self.param_blocks() {
            bytes.extend_from_slice(name.as_bytes());
            for x in m.iter() {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        crate::seed::hex_digest(&bytes)
    }
}

/// Top-`k` labels for a process under the baseline.
pub fn s2l_predict(
    model: &S2LModel,
    process: &EventProcess,
    axis: Axis,
    k: usize,
) -> Result<Vec<RankedPrediction>, BaselineError> {
    let p = model.predict_vector(process, axis)?;
    Ok(model.table(axis).rank(p.as_slice().expect("contiguous"), k)?)
}

impl Typer for S2LModel {
    fn rank(&self, process: &EventProcess, axis: Axis) -> Result<Vec<RankedPrediction>, InferenceError> {
        s2l_predict(self, process, axis, usize::MAX).map_err(|e| match e {
            BaselineError::Model(m) => InferenceError::Model(m),
            BaselineError::Encoder(m) => InferenceError::Encoder(m),
            other => InferenceError::Format(other.to_string()),
        })
    }
}

/// Words occurring in processes and labels, for building a test vector table.
pub fn corpus_words<'a>(cases: impl IntoIterator<Item = &'a crate::corpus::TypedProcess>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for c in cases {
        let seq = render_process(&c.process, RenderMode::Full);
        for w in seq.words().map(str::to_string).chain([c.action_label.clone(), c.object_label.clone()]) {
            *out.entry(w).or_insert(0) += 1;
        }
    }
    out
}
