use std::collections::BTreeSet;

use super::Sense;
use crate::encoder::tokenize;
use crate::Pos;

/// Chooses one sense of `target` given a context string.
pub trait WsdBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Index into `candidates` (sorted by rank, never empty). `Err` is a
    /// backend failure; callers fall back to the predominant sense.
    fn choose(&self, target: &str, pos: Pos, context: &str, candidates: &[Sense])
        -> Result<usize, String>;
}

/// Always picks the predominant sense.
#[derive(Debug, Default, Clone, Copy)]
pub struct MfsWsd;

impl WsdBackend for MfsWsd {
    fn name(&self) -> &str {
        "mfs"
    }

    fn choose(&self, _: &str, _: Pos, _: &str, _: &[Sense]) -> Result<usize, String> {
        Ok(0)
    }
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "to", "in", "on", "or", "and", "for", "with", "by", "as", "at", "from",
    "into", "is", "be", "that", "this", "it", "its", "something", "someone", "one",
];

fn content_tokens(text: &str) -> BTreeSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

/// Simplified Lesk: the sense whose definition shares the most content tokens
/// with the context (excluding the target itself); ties go to the lower rank.
#[derive(Debug, Default, Clone, Copy)]
pub struct LeskWsd;

impl WsdBackend for LeskWsd {
    fn name(&self) -> &str {
        "lesk"
    }

    fn choose(&self, target: &str, _: Pos, context: &str, candidates: &[Sense]) -> Result<usize, String> {
        let mut ctx = content_tokens(context);
        ctx.remove(&target.to_lowercase());
        let mut best = (0, 0usize);
        for (i, sense) in candidates.iter().enumerate() {
            let overlap = content_tokens(&sense.definition).intersection(&ctx).count();
            if overlap > best.1 {
                best = (i, overlap);
            }
        }
        Ok(best.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lesk_prefers_overlapping_definition() {
        let senses = vec![
            Sense::new("bank", Pos::Noun, 1, "sloping land beside a body of water"),
            Sense::new("bank", Pos::Noun, 2, "a financial institution that accepts deposits of money"),
        ];
        assert_eq!(LeskWsd.choose("bank", Pos::Noun, "deposit money", &senses), Ok(1));
        assert_eq!(LeskWsd.choose("bank", Pos::Noun, "walk water", &senses), Ok(0));
        assert_eq!(LeskWsd.choose("bank", Pos::Noun, "visit", &senses), Ok(0));
    }
}
