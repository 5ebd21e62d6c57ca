//! Seeded Gaussian draws.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Each purpose gets its own ChaCha stream id and each
//! sample index its own window of the keystream, so a draw depends only on
//! `(seed, purpose, index)` and never on execution order. Uniforms take the top
//! 53 bits of a `u64`; normals come from Box-Muller on consecutive pairs.

use std::f64::consts::TAU;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::state::StateVector;

/// Stream id for initial conditions.
pub const INITIAL_NOISE: u64 = 1;

/// Keystream words reserved per sample index.
const WORDS_PER_INDEX: u128 = 1 << 40;

/// Uniform on `(0, 1]`.
fn open_unit(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `d` standard-normal values for `(seed, purpose, index)`.
pub fn draw_normals(seed: u64, purpose: u64, index: u64, d: usize) -> StateVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng.set_word_pos(index as u128 * WORDS_PER_INDEX);
    let mut out = Vec::with_capacity(d + 1);
    while out.len() < d {
        let r = (-2.0 * open_unit(&mut rng).ln()).sqrt();
        let theta = TAU * open_unit(&mut rng);
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(d);
    StateVector::new(out)
}

/// The prior sample a run starts from.
pub fn draw_initial_noise(seed: u64, d: usize) -> StateVector {
    draw_normals(seed, INITIAL_NOISE, 0, d)
}
