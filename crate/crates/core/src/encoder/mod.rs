//! Token rendering and pooled text encoders.

mod render;
mod static_vectors;
mod toy;

use std::fmt;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

pub use render::{render_definition, render_gloss, render_process, render_senses, RenderMode};
pub use static_vectors::{trigram_vector, StaticVectors};
pub use toy::ToyEncoder;

#[derive(Debug, thiserror::Error)]
pub enum EncoderError {
    #[error("unsupported encoder backend `{0}` (this build ships `toy`)")]
    UnsupportedBackend(String),
    #[error("empty token sequence")]
    EmptySequence,
    #[error("non-finite encoder output")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("static vectors line {line}: {message}")]
    VectorsParse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] crate::IoError),
}

/// Lower-cased word tokens: alphanumeric runs (apostrophes kept inside words).
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\'').to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Begin,
    Sep,
    End,
    Word(String),
}

impl Token {
    pub fn is_special(&self) -> bool {
        !matches!(self, Token::Word(_))
    }

    /// Vocabulary key. The separator and end marker share `</s>`.
    pub fn key(&self) -> &str {
        match self {
            Token::Begin => "<s>",
            Token::Sep | Token::End => "</s>",
            Token::Word(w) => w,
        }
    }
}

/// Boundary-wrapped token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    /// Wraps groups of word tokens: `<s> g1 </s> g2 ... </s>`, separators only between groups.
    pub fn from_groups<I, G>(groups: I) -> Self
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = String>,
    {
        let mut tokens = vec![Token::Begin];
        for (i, group) in groups.into_iter().enumerate() {
            if i > 0 {
                tokens.push(Token::Sep);
            }
            tokens.extend(group.into_iter().map(Token::Word));
        }
        tokens.push(Token::End);
        TokenSequence { tokens }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_separators(&self) -> usize {
        self.tokens.iter().filter(|t| **t == Token::Sep).count()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().filter_map(|t| match t {
            Token::Word(w) => Some(w.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(match t {
                Token::Begin => "<s>",
                Token::Sep => "<sep>",
                Token::End => "</s>",
                Token::Word(w) => w,
            })?;
        }
        Ok(())
    }
}

/// Pooled encoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(pub Array1<f64>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("embedding vectors are contiguous")
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl From<Vec<f64>> for EmbeddingVector {
    fn from(v: Vec<f64>) -> Self {
        EmbeddingVector(Array1::from(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub vector: EmbeddingVector,
    /// The input exceeded the backend length limit and was right-truncated.
    pub truncated: bool,
}

/// A text encoder shared by processes and glosses.
pub trait TextEncoder: Send + Sync {
    fn backend_id(&self) -> &str;

    fn dim(&self) -> usize;

    fn encode(&self, seq: &TokenSequence) -> Result<Encoding, EncoderError>;
}

/// `encoder.*` configuration keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub backend: String,
    pub dim: usize,
    pub max_len: usize,
    pub pool_specials: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            backend: "toy".into(),
            dim: 128,
            max_len: 256,
            pool_specials: true,
        }
    }
}

impl EncoderConfig {
    /// Instantiates the configured backend; `seed` is the run seed.
    pub fn build(&self, seed: u64) -> Result<ToyEncoder, EncoderError> {
        match self.backend.as_str() {
            "toy" => Ok(ToyEncoder::new(
                crate::seed::sub_seed(seed, crate::seed::ENCODER),
                self.dim,
                self.max_len,
                self.pool_specials,
            )),
            other => Err(EncoderError::UnsupportedBackend(other.to_string())),
        }
    }
}
