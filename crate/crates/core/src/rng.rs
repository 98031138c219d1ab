//! Keyed random streams.
//!
//! Every draw comes from ChaCha8 (`rand_chacha` 0.9) keyed by a 64-bit seed
//! and addressed by a 64-bit stream number, so a matrix row or a replicate
//! can be regenerated on its own, in any order, on any thread.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for `(seed, stream)`.
pub fn keyed_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index` (resampling attempt `attempt`) under `master`.
pub fn derive_seed(master: u64, index: u64, attempt: u64) -> u64 {
    splitmix64(master ^ splitmix64(index ^ splitmix64(attempt.wrapping_add(0x5eed))))
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn uniform01<R: Rng>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}
