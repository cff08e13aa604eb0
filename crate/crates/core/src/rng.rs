//! Deterministic seed handling.
//!
//! Every random draw in the crate flows from a single `u64` seed. Derived
//! streams (bootstrap replications, per-quarter generators) get their own
//! sub-seed from [`sub_seed`], so results do not depend on execution order
//! or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` derived from `seed`:
/// `splitmix64(seed XOR splitmix64(index))`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Generator for stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    Rng::seed_from_u64(sub_seed(seed, index))
}
