use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::{tokenize, EmbeddingVector, EncoderError, Encoding, TextEncoder, Token, TokenSequence};

/// Deterministic desk-scale encoder.
///
/// Every token key maps to a fixed Gaussian vector derived from a hash of
/// `(seed, key)`, scaled by `1/sqrt(dim)`. A sequence is mean-pooled over
/// its positions and passed through one trainable `dim x dim` linear layer
/// (initialised to the identity). Because the layer is linear, pooling
/// before or after it gives the same result.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyEncoder {
    seed: u64,
    max_len: usize,
    pool_specials: bool,
    weight: Array2<f64>,
}

impl ToyEncoder {
    pub fn new(seed: u64, dim: usize, max_len: usize, pool_specials: bool) -> Self {
        assert!(dim > 0, "encoder dimension must be positive");
        assert!(max_len >= 2, "max_len must keep at least the boundary tokens");
        ToyEncoder {
            seed,
            max_len,
            pool_specials,
            weight: Array2::eye(dim),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn pool_specials(&self) -> bool {
        self.pool_specials
    }

    pub fn weight(&self) -> &Array2<f64> {
        &self.weight
    }

    pub fn weight_mut(&mut self) -> &mut Array2<f64> {
        &mut self.weight
    }

    /// Fixed input embedding of a token key.
    pub fn key_vector(&self, key: &str) -> Array1<f64> {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(key.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);
        let dim = self.dim();
        let scale = 1.0 / (dim as f64).sqrt();
        Array1::from_iter((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * scale))
    }

    /// Mean of the static input embeddings of the word's tokens.
    pub fn lemma_vector(&self, word: &str) -> Option<Array1<f64>> {
        let toks = tokenize(word);
        if toks.is_empty() {
            return None;
        }
        let mut acc = Array1::zeros(self.dim());
        for t in &toks {
            acc += &self.key_vector(t);
        }
        Some(acc / toks.len() as f64)
    }

    /// Mean input embedding over the pooled positions, before the linear
    /// layer, and whether the sequence was truncated.
    pub fn pooled_input(&self, seq: &TokenSequence) -> Result<(Array1<f64>, bool), EncoderError> {
        let tokens = seq.tokens();
        let truncated = tokens.len() > self.max_len;
        if truncated {
            log::warn!("truncating {} tokens to {}", tokens.len(), self.max_len);
        }
        let kept = &tokens[..tokens.len().min(self.max_len)];
        let pooled: Vec<&Token> = kept
            .iter()
            .filter(|t| self.pool_specials || !t.is_special())
            .collect();
        if pooled.is_empty() {
            return Err(EncoderError::EmptySequence);
        }
        let mut acc = Array1::zeros(self.dim());
        for t in &pooled {
            acc += &self.key_vector(t.key());
        }
        Ok((acc / pooled.len() as f64, truncated))
    }

    /// Linear layer applied to an already pooled input.
    pub fn project(&self, pooled: &Array1<f64>) -> EmbeddingVector {
        EmbeddingVector(self.weight.dot(pooled))
    }
}

impl TextEncoder for ToyEncoder {
    fn backend_id(&self) -> &str {
        "toy"
    }

    fn dim(&self) -> usize {
        self.weight.nrows()
    }

    fn encode(&self, seq: &TokenSequence) -> Result<Encoding, EncoderError> {
        let (pooled, truncated) = self.pooled_input(seq)?;
        let vector = self.project(&pooled);
        if !vector.is_finite() {
            return Err(EncoderError::NonFinite);
        }
        Ok(Encoding { vector, truncated })
    }
}
