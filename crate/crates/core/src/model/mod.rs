//! Gloss-grounded ranking model: per-axis projections over a shared encoder,
//! cosine scoring, margin ranking losses and the training loop.

mod checkpoint;
mod loss;
mod optim;
mod sampling;
mod train;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointManifest, EncoderState, MANIFEST_FILE, PARAMS_FILE};
pub use loss::{cosine, hinge, joint_loss, process_loss};
pub use optim::AmsGrad;
pub use sampling::{sample_negative, NegativeSampler, PoolEntry};
pub use train::{train, EpochRecord, TrainOutcome};

pub(crate) use loss::{axis_term, cosine_with_grads};

use crate::corpus::EventProcess;
use crate::encoder::{
    render_process, render_senses, EmbeddingVector, EncoderError, RenderMode, TextEncoder,
    ToyEncoder,
};
use crate::glosses::{GlossError, GlossStrategy, Sense};
use crate::Axis;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("undefined similarity: zero vector")]
    UndefinedSimilarity,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate vocabulary: no negative gloss available for {axis} label `{label}`")]
    DegenerateVocabulary { axis: Axis, label: String },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("training split is empty")]
    EmptyTrainSplit,
    #[error("non-finite loss at epoch {epoch}, step {step}: {detail}")]
    NonFiniteLoss {
        epoch: usize,
        step: usize,
        detail: String,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Gloss(#[from] GlossError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Inference(Box<crate::inference::InferenceError>),
    #[error(transparent)]
    Io(#[from] crate::IoError),
}

impl From<crate::inference::InferenceError> for ModelError {
    fn from(e: crate::inference::InferenceError) -> Self {
        ModelError::Inference(Box::new(e))
    }
}

/// Whether events are rendered whole or only the axis-relevant half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessRendering {
    Full,
    /// Predicates only for the action axis, objects only for the object axis.
    Partial,
}

impl ProcessRendering {
    pub fn mode(self, axis: Axis) -> RenderMode {
        match (self, axis) {
            (ProcessRendering::Full, _) => RenderMode::Full,
            (ProcessRendering::Partial, Axis::Action) => RenderMode::ActionOnly,
            (ProcessRendering::Partial, Axis::Object) => RenderMode::ObjectOnly,
        }
    }
}

impl FromStr for ProcessRendering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(ProcessRendering::Full),
            "partial" => Ok(ProcessRendering::Partial),
            other => Err(format!("unknown rendering `{other}` (expected full|partial)")),
        }
    }
}

impl fmt::Display for ProcessRendering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessRendering::Full => "full",
            ProcessRendering::Partial => "partial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub margin_action: f64,
    pub margin_object: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub negatives_per_axis: usize,
    pub gloss_strategy: GlossStrategy,
    pub joint: bool,
    /// Axis trained when `joint` is false.
    pub axis: Axis,
    pub rendering: ProcessRendering,
    pub seed: u64,
    /// Keep the epoch with the best dev recall@1 instead of the last one.
    pub select_on_dev: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::joint()
    }
}

impl TrainConfig {
    /// Joint training defaults: both margins 0.1.
    pub fn joint() -> Self {
        TrainConfig {
            margin_action: 0.1,
            margin_object: 0.1,
            learning_rate: 1e-4,
            batch_size: 64,
            epochs: 50,
            negatives_per_axis: 1,
            gloss_strategy: GlossStrategy::Mfs,
            joint: true,
            axis: Axis::Action,
            rendering: ProcessRendering::Full,
            seed: 0,
            select_on_dev: true,
        }
    }

    /// Single-axis defaults: action margin 0.2, object margin 0.1.
    pub fn single(axis: Axis) -> Self {
        TrainConfig {
            margin_action: 0.2,
            margin_object: 0.1,
            joint: false,
            axis,
            ..TrainConfig::joint()
        }
    }

    pub fn margin(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Action => self.margin_action,
            Axis::Object => self.margin_object,
        }
    }

    pub fn active_axes(&self) -> Vec<Axis> {
        if self.joint {
            Axis::BOTH.to_vec()
        } else {
            vec![self.axis]
        }
    }

    /// Axis whose dev recall@1 selects the checkpoint.
    pub fn selection_axis(&self) -> Axis {
        if self.joint {
            Axis::Action
        } else {
            self.axis
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if !(self.margin_action >= 0.0 && self.margin_object >= 0.0) {
            return bad("margins must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.negatives_per_axis == 0 {
            return bad("negatives_per_axis must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// A learned `d x d` map dedicated to one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    pub axis: Axis,
    pub matrix: Array2<f64>,
}

impl ProjectionMatrix {
    pub fn identity(axis: Axis, dim: usize) -> Self {
        ProjectionMatrix {
            axis,
            matrix: Array2::eye(dim),
        }
    }

    pub fn apply(&self, v: &EmbeddingVector) -> Result<EmbeddingVector, ModelError> {
        if v.dim() != self.matrix.ncols() {
            return Err(ModelError::Dimension {
                expected: self.matrix.ncols(),
                got: v.dim(),
            });
        }
        Ok(EmbeddingVector(self.matrix.dot(&v.0)))
    }
}

/// Shared encoder plus one projection per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct P2GTModel {
    pub encoder: ToyEncoder,
    pub proj_action: ProjectionMatrix,
    pub proj_object: ProjectionMatrix,
    pub config: TrainConfig,
}

impl P2GTModel {
    /// Untrained model with identity projections.
    pub fn new(encoder: ToyEncoder, config: TrainConfig) -> Self {
        let d = encoder.dim();
        P2GTModel {
            encoder,
            proj_action: ProjectionMatrix::identity(Axis::Action, d),
            proj_object: ProjectionMatrix::identity(Axis::Object, d),
            config,
        }
    }

    pub fn dim(&self) -> usize {
        self.encoder.dim()
    }

    pub fn projection(&self, axis: Axis) -> &ProjectionMatrix {
        match axis {
            Axis::Action => &self.proj_action,
            Axis::Object => &self.proj_object,
        }
    }

    pub(crate) fn projection_mut(&mut self, axis: Axis) -> &mut ProjectionMatrix {
        match axis {
            Axis::Action => &mut self.proj_action,
            Axis::Object => &mut self.proj_object,
        }
    }

    pub fn encode_process(&self, process: &EventProcess, mode: RenderMode) -> Result<EmbeddingVector, ModelError> {
        Ok(self.encoder.encode(&render_process(process, mode))?.vector)
    }

    /// Projected query vectors for both axes; one encoding is shared when the
    /// rendering is the same for both.
    pub fn queries(&self, process: &EventProcess) -> Result<[EmbeddingVector; 2], ModelError> {
        let render = self.config.rendering;
        let action = self.encode_process(process, render.mode(Axis::Action))?;
        let object = if render == ProcessRendering::Full {
            action.clone()
        } else {
            self.encode_process(process, render.mode(Axis::Object))?
        };
        Ok([self.proj_action.apply(&action)?, self.proj_object.apply(&object)?])
    }

    pub fn query(&self, process: &EventProcess, axis: Axis) -> Result<EmbeddingVector, ModelError> {
        let p = self.encode_process(process, self.config.rendering.mode(axis))?;
        self.projection(axis).apply(&p)
    }

    pub fn encode_senses(&self, senses: &[Sense]) -> Result<EmbeddingVector, ModelError> {
        Ok(self.encoder.encode(&render_senses(senses))?.vector)
    }

    /// Flat parameters in checkpoint order: encoder weight, action, object.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for m in [self.encoder.weight(), &self.proj_action.matrix, &self.proj_object.matrix] {
            out.extend(m.iter().copied());
        }
        out
    }

    /// Hash of the backend identity and every parameter.
    pub fn fingerprint(&self) -> String {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(self.encoder.backend_id().as_bytes());
        bytes.extend_from_slice(&self.encoder.seed().to_le_bytes());
        bytes.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.encoder.max_len() as u64).to_le_bytes());
        bytes.push(self.encoder.pool_specials() as u8);
        bytes.push(match self.config.rendering {
            ProcessRendering::Full => 0,
            ProcessRendering::Partial => 1,
        });
        for x in self.flat_params() {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        crate::seed::hex_digest(&bytes)
    }
}

pub(crate) fn add_outer(target: &mut Array2<f64>, a: &Array1<f64>, b: &Array1<f64>) {
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let mut row = target.row_mut(i);
        row.scaled_add(ai, b);
    }
}
