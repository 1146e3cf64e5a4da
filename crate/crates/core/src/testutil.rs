//! Random-instance helpers shared by unit and integration tests.

use num_complex::Complex64;
use rand::Rng;

use crate::numerics::{ComplexImage, RealImage};

pub fn random_complex<R: Rng>(rng: &mut R, h: usize, w: usize) -> ComplexImage {
    ComplexImage::from_fn(h, w, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_real<R: Rng>(rng: &mut R, h: usize, w: usize, lo: f64, hi: f64) -> RealImage {
    RealImage::from_fn(h, w, |_, _| rng.random_range(lo..hi))
}

/// Relative error `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
