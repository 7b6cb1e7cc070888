//! Seeded deterministic random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A deterministic random stream backed by ChaCha8.
///
/// The same seed produces the same draw sequence on every platform and every
/// run. Concurrent trials derive independent streams by seed-splitting:
/// trial `t` of base seed `s` uses seed `s + t` (see [`RngStream::for_trial`]),
/// and roles within a trial use ChaCha substreams of that seed
/// (see [`RngStream::substream`]).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for trial `trial` of an experiment with base seed `base_seed`.
    pub fn for_trial(base_seed: u64, trial: u64) -> Self {
        Self::new(base_seed.wrapping_add(trial))
    }

    /// Independent substream `k` of this stream's seed.
    ///
    /// Substreams are derived from the seed, not from the current draw
    /// position, so `substream(k)` is the same no matter how much of the
    /// parent has been consumed.
    pub fn substream(&self, k: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(k);
        RngStream {
            seed: self.seed,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
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

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
