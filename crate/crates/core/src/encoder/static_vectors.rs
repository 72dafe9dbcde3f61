use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::{EncoderError, ToyEncoder};
use crate::IoError;

/// Word → static vector table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StaticVectors {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl StaticVectors {
    /// Panics if rows disagree on dimension.
    pub fn from_rows<S: Into<String>>(rows: impl IntoIterator<Item = (S, Vec<f64>)>) -> Self {
        let mut out = StaticVectors::default();
        for (word, v) in rows {
            if out.vectors.is_empty() {
                out.dim = v.len();
            }
            assert_eq!(v.len(), out.dim, "inconsistent static vector dimension");
            out.vectors.insert(word.into(), v);
        }
        out
    }

    /// Lemma vectors from an encoder's static input embeddings.
    pub fn from_encoder<'a>(encoder: &ToyEncoder, words: impl IntoIterator<Item = &'a str>) -> Self {
        StaticVectors::from_rows(
            words
                .into_iter()
                .filter_map(|w| encoder.lemma_vector(w).map(|v| (w.to_string(), v.to_vec()))),
        )
    }

    /// Seeded random table, one Gaussian vector per word, for tests and toy runs.
    pub fn random<'a>(words: impl IntoIterator<Item = &'a str>, dim: usize, seed: u64) -> Self {
        let mut rng = crate::seed::rng_for(seed, crate::seed::STATIC_VECTORS);
        let mut sorted: Vec<&str> = words.into_iter().collect();
        sorted.sort_unstable();
        sorted.dedup();
        let scale = 1.0 / (dim as f64).sqrt();
        StaticVectors::from_rows(sorted.into_iter().map(|w| {
            let v: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
                .collect();
            (w.to_string(), v)
        }))
    }

    /// Parses the word2vec/GloVe text format. A leading `count dim` header line is optional.
    pub fn parse_text(text: &str) -> Result<Self, EncoderError> {
        let mut rows = Vec::new();
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            if i == 0 && parts.len() == 2 && parts.iter().all(|p| p.parse::<usize>().is_ok()) {
                continue;
            }
            let err = |message: String| EncoderError::VectorsParse { line: i + 1, message };
            let values: Vec<f64> = parts[1..]
                .iter()
                .map(|p| p.parse::<f64>().map_err(|e| err(format!("`{p}`: {e}"))))
                .collect::<Result<_, _>>()?;
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(err(format!("expected {d} values, got {}", values.len())))
                }
                _ => {}
            }
            if values.is_empty() {
                return Err(err("no values".into()));
            }
            rows.push((parts[0].to_string(), values));
        }
        Ok(StaticVectors::from_rows(rows))
    }

    pub fn load_text(path: &Path) -> Result<Self, EncoderError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        StaticVectors::parse_text(&text)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, word: impl Into<String>, v: Vec<f64>) {
        if self.vectors.is_empty() {
            self.dim = v.len();
        }
        assert_eq!(v.len(), self.dim, "inconsistent static vector dimension");
        self.vectors.insert(word.into(), v);
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Text format with a `count dim` header, words in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.vectors.len(), self.dim);
        for (w, v) in &self.vectors {
            out.push_str(w);
            for x in v {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Merges `other` into `self`, keeping existing entries.
    pub fn extend_missing(&mut self, other: &StaticVectors) {
        for (w, v) in &other.vectors {
            if !self.vectors.contains_key(w) {
                self.insert(w.clone(), v.clone());
            }
        }
    }
}

/// Mean of seeded Gaussian vectors of the character trigrams of `<word>`,
/// used for words missing from a static table.
pub fn trigram_vector(word: &str, dim: usize, seed: u64) -> Vec<f64> {
    let chars: Vec<char> = format!("<{word}>").chars().collect();
    let grams: Vec<String> = chars.windows(3).map(|w| w.iter().collect()).collect();
    let scale = 1.0 / (dim as f64).sqrt();
    let mut acc = vec![0.0; dim];
    for g in &grams {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(b"trigram:");
        h.update(g.as_bytes());
        let mut rng = ChaCha8Rng::from_seed(h.finalize().into());
        for a in acc.iter_mut() {
            *a += rng.sample::<f64, _>(StandardNormal) * scale;
        }
    }
    let n = grams.len().max(1) as f64;
    acc.iter().map(|a| a / n).collect()
}
