//! Sub-seed derivation.
//!
//! Every source of randomness in a run is derived from the single run seed:
//! `sub_seed(seed, component)` is the first eight bytes (little endian) of
//! `SHA-256("p2gt-seed" || seed.to_le_bytes() || component)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const SPLIT: &str = "split";
pub const ENCODER: &str = "encoder";
pub const SHUFFLE: &str = "shuffle";
pub const NEGATIVES: &str = "negatives";
pub const BASELINE_INIT: &str = "baseline-init";
pub const STATIC_VECTORS: &str = "static-vectors";

pub fn sub_seed(seed: u64, component: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"p2gt-seed");
    hasher.update(seed.to_le_bytes());
    hasher.update(component.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_for(seed: u64, component: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, component))
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
