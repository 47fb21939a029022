//! Counter-based uniform random source.
//!
//! Every variate is a pure function of `(seed, stream words)`: there is no
//! mutable generator state, so a dataset cell can be reproduced in isolation
//! and replications can run in parallel, in any order, with identical output.
//!
//! The mixing function is the SplitMix64 finaliser (Steele, Lea & Flood 2014),
//! applied once per absorbed word. This generator is fixed: changing it would
//! silently change every simulated dataset for a given seed.

/// Stream tag for the response uniforms (one per observation).
pub const STREAM_RESPONSE: u64 = 1;
/// Stream tag for the noise uniforms (one per observation and coordinate).
pub const STREAM_NOISE: u64 = 2;
/// Stream tag for replication substreams.
pub const STREAM_REPLICATION: u64 = 3;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a seed and a stream key into one 64-bit word.
#[inline]
pub fn key_u64(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix(seed ^ GOLDEN);
    for (i, &w) in words.iter().enumerate() {
        h = mix(h ^ w.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)));
    }
    h
}

/// Uniform variate in the open interval (0, 1).
///
/// Uses the top 53 bits shifted to the centre of each lattice cell, so 0 and 1
/// are never returned (range `[2^-54, 1 - 2^-54]`).
#[inline]
pub fn uniform(seed: u64, words: &[u64]) -> f64 {
    ((key_u64(seed, words) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Seed of the substream owned by one replication of an experiment.
#[inline]
pub fn substream_seed(seed: u64, replication: u64) -> u64 {
    key_u64(seed, &[STREAM_REPLICATION, replication])
}
