//! Deterministic RNG substreams.
//!
//! Every stochastic step draws from a ChaCha8 stream keyed by the master seed,
//! a [`Stream`] domain and an integer id (zone index, agent id, ...). Work can
//! therefore be partitioned or parallelized freely without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random-number domains of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    City = 1,
    Households = 2,
    Workplaces = 3,
    Preferences = 4,
    Months = 5,
    Choice = 6,
    Market = 7,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a sequence of words into one well-distributed 64-bit value.
pub fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// RNG for `(seed, domain, id)`.
pub fn substream(seed: u64, domain: Stream, id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (lane, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = mix(&[seed, domain as u64, id, lane as u64]);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
