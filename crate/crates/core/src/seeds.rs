//! Seed derivation.
//!
//! Every random stream in a run is a ChaCha8 generator keyed by a 64-bit seed
//! derived from the master seed through [`derive`]. Derivation is a pure
//! function of `(parent, tag)`, so a stream never depends on how many numbers
//! another stream consumed or on the order in which iterations execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-purpose stream tags.
pub mod tags {
    pub const ITERATION: u64 = 0x4954_4552;
    pub const DEPLOY: u64 = 0x4445_504c;
    pub const BEAM: u64 = 0x4245_414d;
    pub const PHASES: u64 = 0x5048_4153;
    pub const RANDOM_SCHEDULER: u64 = 0x524e_4453;
    pub const GSA_SCHEDULER: u64 = 0x4753_4153;
    pub const DENSITY: u64 = 0x5248_4f00;
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `tag` under `parent`.
pub fn derive(parent: u64, tag: u64) -> u64 {
    mix(parent ^ mix(tag))
}

/// Child seed of Monte Carlo iteration `index`.
pub fn iteration_seed(master: u64, index: u64) -> u64 {
    derive(derive(master, tags::ITERATION), index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
