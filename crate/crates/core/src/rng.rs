//! Seeded randomness.
//!
//! Every random choice in the crate is drawn from a ChaCha8 stream
//! ([`rand_chacha::ChaCha8Rng`]) seeded through `SeedableRng::seed_from_u64`.
//! Sub-streams are keyed with [`derive_seed`], a SplitMix64-style mixer, so
//! that independent pieces of work (instances, trials, literals) get seeds
//! that depend only on their coordinates and never on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of coordinates into a child seed of `parent`.
pub fn derive_seed(parent: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(mix64(parent), |acc, &c| mix64(acc ^ mix64(c)))
}
