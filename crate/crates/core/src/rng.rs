//! Keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream whose key is a
//! master seed plus a path of integers (grid index, trial, redraw attempt,
//! purpose). Work items can therefore run in any order on any thread and
//! still see the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags keep independent draws of one trial apart.
pub mod purpose {
    pub const NETWORK: u64 = 0x6e65_7477;
    pub const NETWORK_REDRAW: u64 = 0x7265_6472;
    pub const CHANNEL: u64 = 0x6368_616e;
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const ORACLE: u64 = 0x6f72_6163;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a key path into a single 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &x| splitmix64(acc ^ splitmix64(x)))
}

/// Independent stream for `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut state = derive_seed(seed, path);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
