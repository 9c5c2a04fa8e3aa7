//! Reproducible random streams.
//!
//! Every stream is keyed by `(seed, chain, stream)`. The seed and chain id
//! are mixed into a 256-bit ChaCha key and the stream id selects the ChaCha
//! nonce, so streams never overlap and can be handed to separate workers
//! without changing the numbers any of them sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Chain identifiers used across the crate.
pub mod chain {
    pub const ESS: u64 = 1;
    pub const TES_COEF: u64 = 2;
    pub const TES_DAG: u64 = 3;
    pub const SIMULATE: u64 = 4;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for `(seed, chain, stream)`.
pub fn stream(seed: u64, chain: u64, stream: u64) -> StreamRng {
    let mut state = seed ^ chain.rotate_left(32);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Derives the seed of replicate `index` from a base seed.
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut state = base ^ 0xD1B5_4A32_D192_ED03u64.wrapping_mul(index.wrapping_add(1));
    splitmix64(&mut state)
}
