//! Seed derivation.
//!
//! Parallel stages never share an RNG. Each unit of work (a pair, a support,
//! a restart, a round) gets its own stream derived by hashing the parent seed
//! with the unit's coordinates, which keeps results independent of how work
//! is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `seed` together with `parts` into a new 64-bit seed.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// A uniform draw in `[0, 1)` keyed by `seed` and `parts`.
pub fn unit(seed: u64, parts: &[u64]) -> f64 {
    // 53 high bits -> exactly representable doubles in [0, 1)
    (derive(seed, parts) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, parts))
}
