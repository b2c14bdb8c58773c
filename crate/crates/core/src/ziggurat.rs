//! Standard normal draws by Marsaglia's ziggurat method.
//!
//! 128-layer variant with Doornik's table layout: layer `i` spans
//! `[0, x[i]]` and a draw is accepted without evaluating the density when it
//! falls inside the rectangle shared with the next layer. The base layer
//! carries the tail beyond `R`, sampled with Marsaglia's exponential trick.

use alloc::boxed::Box;
use once_cell::race::OnceBox;
use rand_core::RngCore;

use crate::rng::uniform_open0;

const LAYERS: usize = 128;
/// Start of the tail.
const TAIL_START: f64 = 3.442_619_855_899;
/// Area of each layer.
const LAYER_AREA: f64 = 9.912_563_035_262_17e-3;

struct Tables {
    x: [f64; LAYERS + 1],
    ratio: [f64; LAYERS],
}

static TABLES: OnceBox<Tables> = OnceBox::new();

fn density(x: f64) -> f64 {
    libm::exp(-0.5 * x * x)
}

fn tables() -> &'static Tables {
    TABLES.get_or_init(|| {
        let mut x = [0.0; LAYERS + 1];
        x[0] = LAYER_AREA / density(TAIL_START);
        x[1] = TAIL_START;
        for i in 2..LAYERS {
            x[i] = libm::sqrt(-2.0 * libm::log(LAYER_AREA / x[i - 1] + density(x[i - 1])));
        }
        x[LAYERS] = 0.0;
        let mut ratio = [0.0; LAYERS];
        for i in 0..LAYERS {
            ratio[i] = x[i + 1] / x[i];
        }
        Box::new(Tables { x, ratio })
    })
}

/// One standard normal variate.
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let t = tables();
    loop {
        let bits = rng.next_u64();
        let layer = (bits & 0x7f) as usize;
        // top 53 bits -> uniform in [-1, 1)
        let u = 2.0 * ((bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) - 1.0;
        if u.abs() < t.ratio[layer] {
            return u * t.x[layer];
        }
        if layer == 0 {
            return tail(rng, u < 0.0);
        }
        let x = u * t.x[layer];
        let f0 = libm::exp(-0.5 * (t.x[layer] * t.x[layer] - x * x));
        let f1 = libm::exp(-0.5 * (t.x[layer + 1] * t.x[layer + 1] - x * x));
        if f1 + crate::rng::uniform01(rng) * (f0 - f1) < 1.0 {
            return x;
        }
    }
}

fn tail<R: RngCore + ?Sized>(rng: &mut R, negative: bool) -> f64 {
    loop {
        let x = libm::log(uniform_open0(rng)) / TAIL_START;
        let y = libm::log(uniform_open0(rng));
        if -2.0 * y >= x * x {
            return if negative { x - TAIL_START } else { TAIL_START - x };
        }
    }
}

/// Fills `out` with independent standard normal variates.
pub fn fill_standard_normal<R: RngCore + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out {
        *v = standard_normal(rng);
    }
}
