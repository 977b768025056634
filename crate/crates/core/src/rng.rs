//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose seed is a
//! pure function of a master seed and a tuple of stream coordinates, so any
//! sub-stream (one CTE sub-pattern, one noise draw) can be regenerated
//! without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep unrelated consumers of the same master seed apart.
pub mod stream {
    pub const CTE: u64 = 0x43_54_45;
    pub const TARGETS: u64 = 0x54_47_54;
    pub const SPLIT: u64 = 0x53_50_4c;
    pub const INIT: u64 = 0x49_4e_49;
    pub const ORDER: u64 = 0x4f_52_44;
    pub const SAMPLE: u64 = 0x53_4d_50;
    pub const NOISE: u64 = 0x4e_4f_49;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `master` with each coordinate in turn.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn stream_rng(master: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, coords))
}
