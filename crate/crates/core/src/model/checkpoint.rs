use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EpochRecord, ModelError, P2GTModel, TrainConfig, TrainOutcome};
use crate::encoder::{TextEncoder, ToyEncoder};
use crate::{Axis, IoError};

pub const PARAMS_FILE: &str = "params.bin";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    pub backend: String,
    pub seed: u64,
    pub dim: usize,
    pub max_len: usize,
    pub pool_specials: bool,
}

/// Everything needed to rebuild and audit a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub dim: usize,
    pub axis_order: Vec<Axis>,
    /// Row-major `f64` little-endian blocks in `params.bin`, in this order.
    pub param_blocks: Vec<String>,
    pub encoder: EncoderState,
    pub config: TrainConfig,
    pub seed: u64,
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_digest: Option<String>,
    pub candidate_space: String,
    pub negatives_per_axis: usize,
    pub negative_resampling: String,
    pub gloss_encoding: String,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

/// Write `params.bin` and `manifest.json` into `dir` (created if missing).
pub fn save_checkpoint(
    dir: &Path,
    outcome: &TrainOutcome,
    split_digest: Option<&str>,
) -> Result<CheckpointManifest, ModelError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let model = &outcome.model;
    let mut bytes = Vec::new();
    for x in model.flat_params() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    let params = dir.join(PARAMS_FILE);
    fs::write(&params, bytes).map_err(|e| IoError::io(&params, e))?;
    let manifest = CheckpointManifest {
        dim: model.dim(),
        axis_order: Axis::BOTH.to_vec(),
        param_blocks: vec!["encoder.weight".into(), "proj.action".into(), "proj.object".into()],
        encoder: EncoderState {
            backend: model.encoder.backend_id().to_string(),
            seed: model.encoder.seed(),
            dim: model.dim(),
            max_len: model.encoder.max_len(),
            pool_specials: model.encoder.pool_specials(),
        },
        config: model.config.clone(),
        seed: model.config.seed,
        fingerprint: model.fingerprint(),
        split_digest: split_digest.map(str::to_string),
        candidate_space: "full-vocabulary".into(),
        negatives_per_axis: model.config.negatives_per_axis,
        negative_resampling: "per-step".into(),
        gloss_encoding: "in-batch".into(),
        best_epoch: outcome.best_epoch,
        history: outcome.history.clone(),
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    fs::write(&path, text).map_err(|e| IoError::io(&path, e))?;
    Ok(manifest)
}

pub fn load_checkpoint(dir: &Path) -> Result<(P2GTModel, CheckpointManifest), ModelError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| IoError::io(&path, e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)
        .map_err(|e| ModelError::Checkpoint(format!("{}: {e}", path.display())))?;
    let st = &manifest.encoder;
    if st.backend != "toy" {
        return Err(ModelError::Checkpoint(format!("unsupported encoder backend `{}`", st.backend)));
    }
    if st.dim != manifest.dim || st.dim == 0 || st.max_len < 2 {
        return Err(ModelError::Checkpoint("inconsistent encoder dimensions".into()));
    }
    let params = dir.join(PARAMS_FILE);
    let bytes = fs::read(&params).map_err(|e| IoError::io(&params, e))?;
    let d = manifest.dim;
    if bytes.len() != 3 * d * d * 8 {
        return Err(ModelError::Checkpoint(format!(
            "{}: expected {} bytes, found {}",
            params.display(),
            3 * d * d * 8,
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let block = |i: usize| {
        Array2::from_shape_vec((d, d), values[i * d * d..(i + 1) * d * d].to_vec()).expect("square block")
    };
    let mut encoder = ToyEncoder::new(st.seed, d, st.max_len, st.pool_specials);
    *encoder.weight_mut() = block(0);
    let mut model = P2GTModel::new(encoder, manifest.config.clone());
    model.proj_action.matrix = block(1);
    model.proj_object.matrix = block(2);
    let fp = model.fingerprint();
    if fp != manifest.fingerprint {
        return Err(ModelError::Checkpoint(format!(
            "fingerprint mismatch: manifest {}, parameters {fp}",
            manifest.fingerprint
        )));
    }
    Ok((model, manifest))
}
