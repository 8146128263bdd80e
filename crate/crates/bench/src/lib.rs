//! Fixtures shared by the criterion benches.

use turbo_weave::interleaver::{random_interleaver, s_random, DEFAULT_MAX_RESTARTS};
use turbo_weave::Permutation;

/// Deterministic pseudo-random LLRs in `[-4, 4)`.
pub fn llrs(len: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    (0..len)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 * 8.0 - 4.0
        })
        .collect()
}

pub fn random(n: usize) -> Permutation {
    random_interleaver(n, 1).expect("n >= 1")
}

pub fn srandom(n: usize, s: usize) -> Permutation {
    s_random(n, s, 1, DEFAULT_MAX_RESTARTS).expect("feasible spread")
}
