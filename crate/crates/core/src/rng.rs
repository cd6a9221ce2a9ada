//! Deterministic per-task random streams.
//!
//! Every photon walk and every camera sample draws from its own stream keyed
//! by `(global_seed, iteration, index)`, so results do not depend on how work
//! is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_key(seed: u64, iteration: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ iteration) ^ index)
}

pub fn stream(seed: u64, iteration: u64, index: u64) -> RngStream {
    ChaCha8Rng::seed_from_u64(stream_key(seed, iteration, index))
}

/// Domain separators so photon and camera streams never collide.
pub mod domain {
    pub const PHOTONS: u64 = 0x5048_4f54;
    pub const CAMERA: u64 = 0x4341_4d45;
    pub const REFERENCE: u64 = 0x5245_4646;
}
