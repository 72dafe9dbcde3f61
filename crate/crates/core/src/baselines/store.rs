use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{BaselineError, BiRnn, ElmanCell, LabelTable, S2LConfig, S2LModel, SequenceEncoder};
use crate::encoder::{StaticVectors, ToyEncoder};
use crate::model::{EpochRecord, MANIFEST_FILE, PARAMS_FILE};
use crate::seed::{sub_seed, ENCODER, STATIC_VECTORS};
use crate::{Axis, IoError};

pub const VECTORS_FILE: &str = "vectors.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineManifest {
    pub config: S2LConfig,
    pub seed: u64,
    pub word_vector_dim: usize,
    pub axis_order: Vec<Axis>,
    pub param_blocks: Vec<ParamBlock>,
    pub action_labels: Vec<String>,
    pub object_labels: Vec<String>,
    pub fallback_labels: Vec<String>,
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_digest: Option<String>,
    pub candidate_space: String,
    pub loss: String,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

/// Write parameters, manifest and the static vector table into `dir`.
pub fn save_baseline(
    dir: &Path,
    model: &S2LModel,
    history: &[EpochRecord],
    best_epoch: usize,
    split_digest: Option<&str>,
) -> Result<BaselineManifest, BaselineError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let mut bytes = Vec::new();
    let mut blocks = Vec::new();
    for (name, m) in model.param_blocks() {
        blocks.push(ParamBlock {
            name: name.to_string(),
            rows: m.nrows(),
            cols: m.ncols(),
        });
        for x in m.iter() {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    let write = |file: &str, data: &[u8]| {
        let p = dir.join(file);
        fs::write(&p, data).map_err(|e| IoError::io(&p, e))
    };
    write(PARAMS_FILE, &bytes)?;
    write(VECTORS_FILE, model.word_vectors.to_text().as_bytes())?;
    let mut fallback_labels: Vec<String> = model
        .table_action
        .fallbacks
        .iter()
        .chain(&model.table_object.fallbacks)
        .cloned()
        .collect();
    fallback_labels.sort();
    fallback_labels.dedup();
    let manifest = BaselineManifest {
        config: model.config.clone(),
        seed: model.config.seed,
        word_vector_dim: model.word_vectors.dim(),
        axis_order: Axis::BOTH.to_vec(),
        param_blocks: blocks,
        action_labels: model.table_action.labels.clone(),
        object_labels: model.table_object.labels.clone(),
        fallback_labels,
        fingerprint: model.fingerprint(),
        split_digest: split_digest.map(str::to_string),
        candidate_space: "full-vocabulary".into(),
        loss: "cosine-distance".into(),
        best_epoch,
        history: history.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    write(MANIFEST_FILE, text.as_bytes())?;
    Ok(manifest)
}

pub fn load_baseline(dir: &Path) -> Result<(S2LModel, BaselineManifest), BaselineError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| IoError::io(&path, e))?;
    let manifest: BaselineManifest = serde_json::from_str(&text)
        .map_err(|e| BaselineError::Checkpoint(format!("{}: {e}", path.display())))?;
    let vectors = StaticVectors::load_text(&dir.join(VECTORS_FILE))?;
    let params = dir.join(PARAMS_FILE);
    let bytes = fs::read(&params).map_err(|e| IoError::io(&params, e))?;
    let expected: usize = manifest.param_blocks.iter().map(|b| b.rows * b.cols * 8).sum();
    if bytes.len() != expected {
        return Err(BaselineError::Checkpoint(format!(
            "{}: expected {expected} bytes, found {}",
            params.display(),
            bytes.len()
        )));
    }
    let mut offset = 0;
    let mut mats = Vec::new();
    for b in &manifest.param_blocks {
        let n = b.rows * b.cols;
        let vals: Vec<f64> = bytes[offset..offset + n * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        offset += n * 8;
        mats.push(Array2::from_shape_vec((b.rows, b.cols), vals).expect("block shape"));
    }
    let cfg = manifest.config.clone();
    let n_enc = mats.len().checked_sub(2).ok_or_else(|| BaselineError::Checkpoint("missing heads".into()))?;
    let head_object = mats.pop().expect("object head");
    let head_action = mats.pop().expect("action head");
    let encoder = match (cfg.kind, n_enc) {
        (super::EncoderKind::Mean, 0) => SequenceEncoder::Mean,
        (super::EncoderKind::Ctx, 1) => {
            let mut e = ToyEncoder::new(sub_seed(cfg.seed, ENCODER), cfg.ctx_dim, cfg.max_len, true);
            let w = mats.pop().expect("ctx weight");
            if w.dim() != e.weight().dim() {
                return Err(BaselineError::Checkpoint("ctx weight shape mismatch".into()));
            }
            *e.weight_mut() = w;
            SequenceEncoder::Ctx(e)
        }
        (super::EncoderKind::Rnn, 6) => {
            let mut it = mats.into_iter();
            let mut cell = || ElmanCell {
                wx: it.next().expect("wx"),
                wh: it.next().expect("wh"),
                b: it.next().expect("b"),
            };
            let forward = cell();
            let backward = cell();
            SequenceEncoder::Rnn(Box::new(BiRnn { forward, backward }))
        }
        (kind, n) => {
            return Err(BaselineError::Checkpoint(format!("{n} encoder blocks do not fit kind {kind}")));
        }
    };
    let vseed = sub_seed(cfg.seed, STATIC_VECTORS);
    let model = S2LModel {
        table_action: LabelTable::build(manifest.action_labels.iter().map(String::as_str), Axis::Action, &vectors, vseed)?,
        table_object: LabelTable::build(manifest.object_labels.iter().map(String::as_str), Axis::Object, &vectors, vseed)?,
        config: cfg,
        encoder,
        word_vectors: vectors,
        head_action,
        head_object,
    };
    if model.fingerprint() != manifest.fingerprint {
        return Err(BaselineError::Checkpoint("fingerprint mismatch after reload".into()));
    }
    Ok((model, manifest))
}
