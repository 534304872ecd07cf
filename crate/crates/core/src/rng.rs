//! Injectable randomness.
//!
//! Every randomized operation takes a [`RandomSource`] explicitly, so a run is
//! fully determined by its seed. [`SeededRng`] is the production source; tests
//! may substitute scripted sources to enumerate decision paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Source of uniform reals and uniform integers.
pub trait RandomSource {
    /// Uniform real in `[0, 1)`.
    fn uniform(&mut self) -> f64;

    /// Uniform integer in `[0, bound)`. `bound` is never zero.
    fn below(&mut self, bound: usize) -> usize;

    /// Returns `true` with probability `p`. `p <= 0` never fires and
    /// `p >= 1` always fires.
    fn chance(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }

    fn below(&mut self, bound: usize) -> usize {
        (**self).below(bound)
    }

    fn chance(&mut self, p: f64) -> bool {
        (**self).chance(p)
    }
}

/// Seedable ChaCha8 generator whose position can be captured and restored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream `stream` of the generator keyed by `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn state(&self) -> RngState {
        RngState {
            key: self.inner.get_seed(),
            stream: self.inner.get_stream(),
            word_pos: self.inner.get_word_pos().to_string(),
        }
    }

    pub fn from_state(state: &RngState) -> Result<Self, String> {
        let word_pos: u128 = state
            .word_pos
            .parse()
            .map_err(|e| format!("bad rng word position {:?}: {e}", state.word_pos))?;
        let mut inner = ChaCha8Rng::from_seed(state.key);
        inner.set_stream(state.stream);
        inner.set_word_pos(word_pos);
        Ok(Self { inner })
    }
}

impl RandomSource for SeededRng {
    fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    fn below(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }
}

/// Portable generator position. `word_pos` is a decimal `u128`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub key: [u8; 32],
    pub stream: u64,
    pub word_pos: String,
}

/// SplitMix64 finalizer, used to derive per-trial seeds from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
