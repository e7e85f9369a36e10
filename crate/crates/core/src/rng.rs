//! Seeded, platform-stable random streams.
//!
//! Every random draw in the crate goes through [`RandomSource`]. A source is
//! the pair `(master_seed, stream_id)`; the generator behind it is ChaCha8 with
//! the key expanded from `master_seed` by `SeedableRng::seed_from_u64` and the
//! ChaCha stream selector set to `stream_id`. Both steps are value-stable
//! across platforms, so a given pair always yields the same sequence of words.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// 2^-53, the spacing of the uniform grid produced by [`Stream::next_unit`].
const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// A source sharing the master seed on a different stream.
    pub fn substream(&self, tag: u64) -> Self {
        Self::new(self.master_seed, mix64(self.stream_id ^ mix64(tag)))
    }

    pub fn stream(&self) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        Stream { rng }
    }
}

/// A positioned generator drawn from a [`RandomSource`].
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * UNIT
    }

    /// One Bernoulli(p) trial as `uniform < p`; for a fixed draw the outcome
    /// is monotone in `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_unit() < p
    }

    /// Uniform index in `0..bound`. Panics if `bound == 0`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// The SplitMix64 finalizer; used to derive stream ids from structured keys.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit key.
pub fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C909, |acc, &w| mix64(acc ^ mix64(w)))
}
