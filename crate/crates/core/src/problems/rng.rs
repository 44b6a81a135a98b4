//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose 256-bit key is
//! `SHA-256(master ‖ len(tag) ‖ tag ‖ index₀ ‖ index₁ ‖ …)` with all integers
//! little-endian `u64`. Streams for different purposes or trial slots are thus
//! independent and can be created in any order or on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

fn digest(master: u64, tag: &str, indices: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    for i in indices {
        hasher.update(i.to_le_bytes());
    }
    hasher.finalize().into()
}

/// Random stream for `(master, tag, indices)`.
pub fn substream(master: u64, tag: &str, indices: &[u64]) -> StreamRng {
    ChaCha8Rng::from_seed(digest(master, tag, indices))
}

/// A 64-bit seed derived the same way, for handing to a generator as its own master.
pub fn derive_seed(master: u64, tag: &str, indices: &[u64]) -> u64 {
    let d = digest(master, tag, indices);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}
