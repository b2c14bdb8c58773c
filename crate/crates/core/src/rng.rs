//! Seeded random streams.
//!
//! Every stochastic step in the pipeline draws from a [`SearchRng`]
//! (ChaCha with 8 rounds) seeded from a 64-bit integer, so any experiment is
//! reproducible from its master seed.

use rand_core::{RngCore, SeedableRng};

pub type SearchRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SearchRng {
    SearchRng::seed_from_u64(seed)
}

/// Derives an independent child seed from a master seed and a stream label.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        ^ splitmix(stream.wrapping_add(0x9E37_79B9_7F4A_7C15))
        ^ splitmix(index.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(1));
    z = splitmix(z);
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform in `[0, 1)` with 53 bits of precision.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `(0, 1]`, safe to pass to `ln`.
pub fn uniform_open0<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform_range<R: RngCore + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

/// Uniform integer in `0..n` (Lemire's multiply-shift, `n > 0`).
pub fn below<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Fisher-Yates shuffle.
pub fn shuffle<T, R: RngCore + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}
