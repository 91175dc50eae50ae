//! Seeded, counter-based random streams.
//!
//! Every random draw in the crate goes through [`RngStream`]. The generator is
//! ChaCha8 keyed by `seed_from_u64(seed)` with the ChaCha stream id set to the
//! trial index. ChaCha is a counter-mode cipher, so a `(seed, stream, counter)`
//! triple fixes the next output on every platform, and distinct stream ids give
//! non-overlapping keystreams.
//!
//! Derived draws are frozen as follows:
//!
//! - `index(bound)`: Lemire's widening-multiply method on `next_u64`, rejecting
//!   the low product when it falls under `2^64 mod bound`.
//! - `unit_f64()`: the top 53 bits of `next_u64` scaled by `2^-53`, in `[0, 1)`.
//! - `exp1()`: `-ln(1 - unit_f64())`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    /// Stream for trial `k` of an experiment with master seed `seed`.
    pub fn for_trial(seed: u64, k: usize) -> Self {
        Self::new(seed, k as u64)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Position in the keystream, in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..bound`. Panics if `bound == 0`.
    pub fn index(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "index bound must be positive");
        let bound = bound as u64;
        let mut m = (self.next_u64() as u128) * (bound as u128);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                m = (self.next_u64() as u128) * (bound as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard exponential variate.
    pub fn exp1(&mut self) -> f64 {
        -(1.0 - self.unit_f64()).ln()
    }

    /// Uniformly random point of the probability simplex (flat Dirichlet).
    pub fn simplex_point(&mut self, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| self.exp1()).collect();
        let total: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= total);
        v
    }
}
