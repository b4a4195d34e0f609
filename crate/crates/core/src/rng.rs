//! Reproducible random streams.
//!
//! A stream is ChaCha20 keyed by a 64-bit seed with the 64-bit ChaCha stream
//! selector set to `stream_id`. Derived substreams take their id from the
//! SHA-256 digest of `(seed, stream_id, kind, index)`, so parallel tasks get
//! independent generators whose output does not depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha20";

    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream for task `(kind, index)`, independent of how much of
    /// `self` has been consumed.
    pub fn substream(&self, kind: &str, index: u64) -> Self {
        Self::new(self.seed, derive_stream_id(self.seed, self.stream_id, kind, index))
    }
}

pub fn derive_stream_id(seed: u64, stream_id: u64, kind: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stream_id.to_le_bytes());
    h.update((kind.len() as u64).to_le_bytes());
    h.update(kind.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
