//! Seed derivation for reproducible sub-streams.
//!
//! Every source of randomness in the crate is a [`ChaCha8Rng`] seeded through
//! [`mix_seed`], so a run is fully determined by its master seed and the
//! stream tags (agent index, iteration, repetition) that derive from it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Decorrelates nearby integer seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a stream tag.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

/// Derives a seed from a base and two stream tags.
pub fn mix_seed2(base: u64, a: u64, b: u64) -> u64 {
    mix_seed(mix_seed(base, a), b)
}

/// Builds the crate-wide RNG from a derived seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
