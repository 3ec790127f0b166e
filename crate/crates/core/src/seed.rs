//! Deterministic seed derivation.
//!
//! Every random component is driven by a `ChaCha8Rng` seeded from a 64-bit
//! value. Child seeds are derived from a parent seed and a stream label with
//! the SplitMix64 finalizer, so a single global seed fans out reproducibly
//! regardless of thread count or evaluation order:
//!
//! `child = splitmix64(parent ^ splitmix64(stream_tag ^ index))`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used across the crate. Keep them stable: changing a tag
/// changes every derived draw.
pub mod stream {
    pub const RESERVOIR: u64 = 0x5245_5345_5256_4f49;
    pub const RFF: u64 = 0x5246_465f_4652_4551;
    pub const FBM: u64 = 0x4642_4d5f_5041_5448;
    pub const CORRUPT: u64 = 0x434f_5252_5550_5421;
    pub const FOLDS: u64 = 0x464f_4c44_535f_4b46;
    pub const RUN: u64 = 0x5255_4e5f_5245_5045;
    pub const MC: u64 = 0x4d43_5f53_4545_4453;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(parent: u64, stream: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(stream ^ index.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
