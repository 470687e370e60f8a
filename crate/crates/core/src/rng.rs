//! Seed derivation and the Beta/Gamma draws used throughout the crate.
//!
//! Replicate streams are derived counter-style from (master seed, replicate
//! index) so that parallel and serial execution see identical randomness.

use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

/// splitmix64 step, used to expand seed material.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mix an arbitrary list of seed words into a 256-bit ChaCha seed.
pub fn rng_from_words(words: &[u64]) -> ChaCha8Rng {
    let mut state: u64 = 0x243f6a8885a308d3;
    for &w in words {
        state ^= w.wrapping_mul(0x9e3779b97f4a7c15).rotate_left(17);
        splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Stream for replicate `index` of a run with the given master seed.
pub fn replicate_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    rng_from_words(&[master_seed, index])
}

/// Single-stream rng for one-shot sampling.
pub fn master_rng(seed: u64) -> ChaCha8Rng {
    rng_from_words(&[seed])
}

/// Draw from Gamma(shape) with unit scale.
pub fn gamma_draw(shape: f64, rng: &mut impl Rng) -> f64 {
    debug_assert!(shape > 0.0);
    Gamma::new(shape, 1.0)
        .expect("gamma shape must be positive")
        .sample(rng)
}

/// Draw from Beta(a, b) via two Gamma draws, with Beta(a, 0) treated as the
/// point mass at 1.
pub fn beta_draw(a: f64, b: f64, rng: &mut impl Rng) -> f64 {
    debug_assert!(a > 0.0 && b >= 0.0);
    if b == 0.0 {
        return 1.0;
    }
    let x = gamma_draw(a, rng);
    let y = gamma_draw(b, rng);
    x / (x + y)
}
