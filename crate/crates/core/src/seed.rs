//! Seed splitting.
//!
//! Every random stream is addressed by a path of integers under the master
//! seed, e.g. `[GSEE, run, round]`. The stream seed is
//!
//! ```text
//! s_0 = master
//! s_{i+1} = mix(s_i ^ mix(p_i + 0x9E3779B97F4A7C15))
//! ```
//!
//! where `mix` is the splitmix64 finalizer. The resulting 64-bit value seeds a
//! ChaCha8 generator via `SeedableRng::seed_from_u64`. No wall clock or OS
//! entropy is ever consulted.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_GSEE: u64 = 1;
pub const STREAM_QPE: u64 = 2;
pub const STREAM_DRAW: u64 = 3;
pub const STREAM_PERTURB: u64 = 4;
pub const STREAM_ROUND: u64 = 5;
pub const STREAM_FAIL: u64 = 6;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &p| mix(s ^ mix(p.wrapping_add(GOLDEN))))
}

pub fn rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
