//! Deterministic seed derivation.
//!
//! Every random stream in a run is a ChaCha8 generator whose 256-bit key is
//! the SHA-256 digest of a domain label and a list of 64-bit coordinates.
//! Sub-seeds are likewise truncated digests, so adding coordinates (more
//! replications, another grid point) never shifts an existing stream, and
//! replays are bit-exact on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

fn digest(label: &str, parts: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    for p in parts {
        hasher.update(p.to_le_bytes());
    }
    hasher.finalize().into()
}

/// Mixes a master seed with labelled coordinates into a 64-bit sub-seed.
pub fn derive_seed(master: u64, label: &str, parts: &[u64]) -> u64 {
    let mut all = Vec::with_capacity(parts.len() + 1);
    all.push(master);
    all.extend_from_slice(parts);
    let d = digest(label, &all);
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Independent generator for stream `index` of kind `label` under `seed`.
pub fn stream_rng(seed: u64, label: &str, index: u64) -> SimRng {
    ChaCha8Rng::from_seed(digest(label, &[seed, index]))
}
