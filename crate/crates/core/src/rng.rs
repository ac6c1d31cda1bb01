//! Seeded, portable random stream.
//!
//! Every stochastic draw in the simulator flows through [`RngStream`], which
//! wraps a ChaCha8 cipher stream keyed from a 64-bit seed. The keying and the
//! draw transforms are pinned here so that a `(seed, config)` pair produces a
//! bit-identical run on every platform and in every future build:
//!
//! - the 64-bit seed is expanded to a 256-bit ChaCha key with SplitMix64
//!   (constants below, fixed);
//! - `uniform_unit` maps the top 53 bits of one `u64` output to a double in
//!   `[0, 1)`;
//! - `uniform_index` uses the widening-multiply method with rejection, so the
//!   index distribution is exactly uniform and consumes one `u64` per attempt.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic uniform random stream keyed by a 64-bit seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

/// SplitMix64 step; used only to expand the seed into a ChaCha key.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream {
            seed,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// The seed this stream was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Next raw word of the stream.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform double in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn uniform_unit(&mut self) -> f64 {
        // Top 53 bits scaled by 2^-53; the half-open upper bound is exact.
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `[0, n)`, exactly uniform (no modulo bias).
    ///
    /// Widening multiply with rejection: a draw `x` maps to `(x * n) >> 64`
    /// and is rejected while the low half falls in the biased zone
    /// (`2^64 mod n` values). Consumes one `u64` per attempt; rejection is
    /// astronomically rare for the population sizes used here.
    #[inline]
    pub fn uniform_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform_index requires n > 0");
        let n = n as u64;
        let zone = n.wrapping_neg() % n; // 2^64 mod n
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            if (m as u64) >= zone {
                return (m >> 64) as usize;
            }
        }
    }
}
