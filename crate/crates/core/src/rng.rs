//! Named random substreams derived from a single 64-bit seed.
//!
//! Every consumer of randomness asks for a stream by label (`"gp"`,
//! `"starts:chain_3"`, `"cutoff"`, ...). The stream key is a SHA-256 digest
//! of the seed and the label, so adding a new consumer never shifts the
//! numbers another consumer sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, label: &str) -> StreamRng {
        let mut hasher = Sha256::new();
        hasher.update(b"mrct-substream\0");
        hasher.update(self.seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }

    /// Child tree whose streams are disjoint from the parent's.
    pub fn child(&self, label: &str) -> SeedTree {
        use rand::RngCore;
        SeedTree::new(self.stream(&format!("child:{label}")).next_u64())
    }
}
