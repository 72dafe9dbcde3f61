use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{IndexEntry, InferenceError, LabelIndex};
use crate::encoder::EmbeddingVector;
use crate::{Axis, IoError};

/// Sidecar describing the rows of an index block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexManifest {
    pub axis: Axis,
    pub dim: usize,
    pub dtype: String,
    pub fingerprint: String,
    pub candidate_space: String,
    pub labels: Vec<String>,
    pub sense_ids: Vec<String>,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

impl LabelIndex {
    /// Write the vectors as little-endian `f32` rows to `path` and the
    /// manifest next to it with a `.json` extension.
    pub fn save(&self, path: &Path) -> Result<(), InferenceError> {
        let mut block = Vec::with_capacity(self.entries.len() * self.dim * 4);
        for e in &self.entries {
            for &x in e.vector.as_slice() {
                block.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        fs::write(path, block).map_err(|e| IoError::io(path, e))?;
        let manifest = IndexManifest {
            axis: self.axis,
            dim: self.dim,
            dtype: "float32".into(),
            fingerprint: self.fingerprint.clone(),
            candidate_space: "full-vocabulary".into(),
            labels: self.entries.iter().map(|e| e.label.clone()).collect(),
            sense_ids: self.entries.iter().map(|e| e.sense_id.clone()).collect(),
        };
        let side = sidecar(path);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        fs::write(&side, text).map_err(|e| IoError::io(&side, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, InferenceError> {
        let side = sidecar(path);
        let text = fs::read_to_string(&side).map_err(|e| IoError::io(&side, e))?;
        let m: IndexManifest = serde_json::from_str(&text)
            .map_err(|e| InferenceError::Format(format!("{}: {e}", side.display())))?;
        if m.dtype != "float32" {
            return Err(InferenceError::Format(format!("unsupported dtype {}", m.dtype)));
        }
        if m.labels.len() != m.sense_ids.len() {
            return Err(InferenceError::Format("labels and sense ids differ in length".into()));
        }
        let block = fs::read(path).map_err(|e| IoError::io(path, e))?;
        if block.len() != m.labels.len() * m.dim * 4 {
            return Err(InferenceError::Format(format!(
                "{}: expected {} rows of {} floats, found {} bytes",
                path.display(),
                m.labels.len(),
                m.dim,
                block.len()
            )));
        }
        let floats: Vec<f64> = block
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let entries = m
            .labels
            .into_iter()
            .zip(m.sense_ids)
            .zip(floats.chunks(m.dim.max(1)))
            .map(|((label, sense_id), row)| IndexEntry {
                label,
                sense_id,
                vector: EmbeddingVector::from(row.to_vec()),
            })
            .collect();
        LabelIndex::from_entries(m.axis, m.dim, entries, m.fingerprint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("object.index.bin");
        let idx = LabelIndex::from_entries(
            Axis::Object,
            3,
            vec![
                IndexEntry {
                    label: "soil".into(),
                    sense_id: "soil.n.1".into(),
                    vector: vec![0.5, -1.25, 2.0].into(),
                },
                IndexEntry {
                    label: "soil".into(),
                    sense_id: "soil.n.2".into(),
                    vector: vec![0.1, 0.2, 0.3].into(),
                },
            ],
            "abc",
        )
        .unwrap();
        idx.save(&path).unwrap();
        let back = LabelIndex::load(&path).unwrap();
        assert_eq!(back.axis(), Axis::Object);
        assert_eq!(back.fingerprint(), "abc");
        assert_eq!(back.entries()[0].vector.as_slice(), &[0.5, -1.25, 2.0]);
        assert_eq!(back.entries()[1].vector.as_slice()[0], 0.1f32 as f64);
        assert_eq!(back.entries()[1].sense_id, "soil.n.2");
        assert_eq!(fs::metadata(&path).unwrap().len(), 24);
    }

    #[test]
    fn truncated_block_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.bin");
        let idx = LabelIndex::from_entries(
            Axis::Action,
            2,
            vec![IndexEntry {
                label: "dig".into(),
                sense_id: "dig.v.1".into(),
                vector: vec![1.0, 0.0].into(),
            }],
            "fp",
        )
        .unwrap();
        idx.save(&path).unwrap();
        fs::write(&path, [0u8; 5]).unwrap();
        assert!(matches!(LabelIndex::load(&path), Err(InferenceError::Format(_))));
    }
}
