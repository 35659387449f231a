//! Seeded additive white Gaussian noise.
//!
//! Variates come from a ChaCha8 stream keyed by the seed. Pixel `p` (row-major
//! index) owns stream words `4p..4p+4`, read as two `u64`s `a`, `b`, and maps
//! them through the cosine branch of Box-Muller:
//!
//! ```text
//! u1 = (a >> 11 + 0.5) / 2^53      in (0, 1)
//! u2 = (b >> 11) / 2^53            in [0, 1)
//! z  = sqrt(-2 ln u1) * cos(2 pi u2)
//! ```
//!
//! so each pixel's noise depends only on `(seed, p)`. The noisy value is
//! `round(A + mean + sigma * z)` (ties away from zero) and is clamped to
//! `[0, 255]` after rounding.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, GrayImage, Result};

const WORDS_PER_PIXEL: u128 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnParams {
    sigma: f64,
    mean: f64,
    seed: u64,
}

impl AwgnParams {
    pub fn new(sigma: f64, mean: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
        }
        if !mean.is_finite() {
            return Err(Error::InvalidParameter(format!("mean must be finite, got {mean}")));
        }
        Ok(Self { sigma, mean, seed })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[inline]
fn box_muller(a: u64, b: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) as f64 + 0.5) * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard normal variate assigned to pixel `index` under `seed`.
pub fn standard_normal_at(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * WORDS_PER_PIXEL);
    let a = rng.next_u64();
    let b = rng.next_u64();
    box_muller(a, b)
}

fn perturb(value: u8, noise: f64) -> u8 {
    (f64::from(value) + noise).round().clamp(0.0, 255.0) as u8
}

pub fn awgn_apply(img: &GrayImage, params: &AwgnParams) -> GrayImage {
    let mut out = img.clone();
    if params.sigma == 0.0 && params.mean == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for px in out.pixels_mut() {
        let a = rng.next_u64();
        let b = rng.next_u64();
        *px = perturb(*px, params.mean + params.sigma * box_muller(a, b));
    }
    out
}
