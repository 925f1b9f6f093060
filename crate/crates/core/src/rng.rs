//! Counter-based randomness.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key
//! tuple, so results never depend on evaluation order or thread schedule.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed hash of a (key, counter) pair.
#[inline]
pub fn hash2(key: u64, counter: u64) -> u64 {
    mix64(mix64(key ^ GOLDEN).wrapping_add(counter.wrapping_mul(GOLDEN)))
}

/// Maps 64 random bits to a uniform double in [0, 1).
#[inline]
pub fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seed of trial `index` under `master`.
#[inline]
pub fn trial_seed(master: u64, index: u64) -> u64 {
    hash2(master ^ 0x7472_6961_6c73_0000, index)
}

/// Independent sub-stream of a seed, e.g. for picking a uniform root.
#[inline]
pub fn substream(seed: u64, stream: u64) -> u64 {
    hash2(seed.rotate_left(17) ^ 0x5375_6273_7472_6561, stream)
}

/// Uniform integer in `[0, n)` from 64 random bits (multiply-shift).
#[inline]
pub fn below(bits: u64, n: u64) -> u64 {
    ((bits as u128 * n as u128) >> 64) as u64
}
