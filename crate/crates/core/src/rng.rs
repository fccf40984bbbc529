//! Seed derivation for reproducible, scheduling-independent randomness.
//!
//! Every random consumer takes a `(base_seed, index)` pair and gets its own
//! counter-based ChaCha stream; parallel trials therefore draw identical
//! values no matter how work is scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; the standard 64-bit avalanche mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream seed for substream `index` of `base_seed`.
#[inline]
pub fn derive(base_seed: u64, index: u64) -> u64 {
    mix64(mix64(base_seed) ^ mix64(index.wrapping_add(0xA5A5_A5A5_A5A5_A5A5)))
}

/// Independent generator for substream `index` of `base_seed`.
pub fn stream(base_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base_seed, index))
}
