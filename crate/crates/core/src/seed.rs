//! Seed derivation.
//!
//! Every random stream in a run is keyed by the master seed plus a stream
//! tag and up to three indices, e.g. `(SOURCE, ratio_index, chunk, 0)`. The
//! key is folded through SplitMix64 and the resulting four words seed a
//! ChaCha8 generator. Streams for different keys are independent, and adding
//! frames or grid points never perturbs the streams of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Values are part of the reproducibility contract.
pub mod tag {
    pub const SOURCE: u64 = 1;
    pub const PROFILE: u64 = 2;
    pub const INTERLEAVER: u64 = 3;
    pub const ARTIFICIAL: u64 = 4;
    pub const CODE: u64 = 5;
    pub const PLANE_SOURCE: u64 = 6;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit key from a master seed and a stream path.
pub fn derive(master: u64, stream: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut state = master;
    let mut acc = splitmix64(&mut state);
    for word in [stream, a, b, c] {
        state ^= word.wrapping_mul(0xD6E8_FEB8_6659_FD93).wrapping_add(acc);
        acc = splitmix64(&mut state);
    }
    acc
}

/// Builds a generator from a derived key.
pub fn rng_from_key(key: u64) -> ChaCha8Rng {
    let mut state = key;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Shorthand for `rng_from_key(derive(..))`.
pub fn stream(master: u64, stream: u64, a: u64, b: u64, c: u64) -> ChaCha8Rng {
    rng_from_key(derive(master, stream, a, b, c))
}
