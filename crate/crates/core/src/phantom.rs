//! Randomized piecewise-constant ellipse phantoms (Shepp–Logan family).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::ComplexImage;

#[derive(Clone, Copy, Debug)]
struct Ellipse {
    intensity: f64,
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    phi_deg: f64,
}

// modified Shepp–Logan (higher contrast variant)
const SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse { intensity: 1.0, a: 0.69, b: 0.92, x0: 0.0, y0: 0.0, phi_deg: 0.0 },
    Ellipse { intensity: -0.8, a: 0.6624, b: 0.874, x0: 0.0, y0: -0.0184, phi_deg: 0.0 },
    Ellipse { intensity: -0.2, a: 0.11, b: 0.31, x0: 0.22, y0: 0.0, phi_deg: -18.0 },
    Ellipse { intensity: -0.2, a: 0.16, b: 0.41, x0: -0.22, y0: 0.0, phi_deg: 18.0 },
    Ellipse { intensity: 0.1, a: 0.21, b: 0.25, x0: 0.0, y0: 0.35, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.046, b: 0.046, x0: 0.0, y0: 0.1, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.046, b: 0.046, x0: 0.0, y0: -0.1, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.046, b: 0.023, x0: -0.08, y0: -0.605, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.023, b: 0.023, x0: 0.0, y0: -0.606, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.023, b: 0.046, x0: 0.06, y0: -0.605, phi_deg: 0.0 },
];

#[derive(Clone, Copy, Debug)]
pub struct PhantomOptions {
    /// Add a smooth linear phase ramp (peak-to-peak radians across the image).
    pub phase_ramp: f64,
    /// Up to this many extra random lesions inside the head.
    pub max_lesions: usize,
}

impl Default for PhantomOptions {
    fn default() -> Self {
        Self {
            phase_ramp: 0.5,
            max_lesions: 3,
        }
    }
}

fn rasterize(ellipses: &[Ellipse], h: usize, w: usize) -> Vec<f64> {
    let mut img = vec![0.0; h * w];
    for e in ellipses {
        let (s, c) = e.phi_deg.to_radians().sin_cos();
        for r in 0..h {
            // y axis points up, pixel centres sampled on [-1, 1]
            let y = 1.0 - (2.0 * r as f64 + 1.0) / h as f64;
            for col in 0..w {
                let x = (2.0 * col as f64 + 1.0) / w as f64 - 1.0;
                let (dx, dy) = (x - e.x0, y - e.y0);
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                if (u / e.a).powi(2) + (v / e.b).powi(2) <= 1.0 {
                    img[r * w + col] += e.intensity;
                }
            }
        }
    }
    img
}

/// The unperturbed modified Shepp–Logan phantom, real-valued in [0, 1].
pub fn shepp_logan(h: usize, w: usize) -> ComplexImage {
    let img = rasterize(&SHEPP_LOGAN, h, w);
    ComplexImage::from_fn(h, w, |r, c| Complex64::new(img[r * w + c].clamp(0.0, 1.0), 0.0))
}

/// A random perturbation of the Shepp–Logan phantom. Magnitude lies in
/// [0, 1]; deterministic in `seed`.
pub fn random_phantom(h: usize, w: usize, seed: u64, opts: PhantomOptions) -> ComplexImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = rng.random_range(0.8..1.0);
    let rot = rng.random_range(-15.0f64..15.0);
    let (rs, rc) = rot.to_radians().sin_cos();

    let mut ellipses: Vec<Ellipse> = SHEPP_LOGAN
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut e = *e;
            if i >= 2 {
                e.x0 += rng.random_range(-0.03..0.03);
                e.y0 += rng.random_range(-0.03..0.03);
                e.a *= rng.random_range(0.85..1.15);
                e.b *= rng.random_range(0.85..1.15);
                e.intensity *= rng.random_range(0.5..1.5);
            }
            e
        })
        .collect();
    let lesions = rng.random_range(0..=opts.max_lesions);
    for _ in 0..lesions {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        ellipses.push(Ellipse {
            intensity: sign * rng.random_range(0.1..0.3),
            a: rng.random_range(0.03..0.12),
            b: rng.random_range(0.03..0.12),
            x0: rng.random_range(-0.4..0.4),
            y0: rng.random_range(-0.5..0.5),
            phi_deg: rng.random_range(0.0..180.0),
        });
    }
    for e in ellipses.iter_mut() {
        let (x, y) = (e.x0 * scale, e.y0 * scale);
        e.x0 = x * rc - y * rs;
        e.y0 = x * rs + y * rc;
        e.a *= scale;
        e.b *= scale;
        e.phi_deg += rot;
    }

    let img = rasterize(&ellipses, h, w);
    let a = rng.random_range(-1.0..1.0) * opts.phase_ramp;
    let b = rng.random_range(-1.0..1.0) * opts.phase_ramp;
    ComplexImage::from_fn(h, w, |r, c| {
        let mag = img[r * w + c].clamp(0.0, 1.0);
        let phase = a * (c as f64 / w as f64 - 0.5) + b * (r as f64 / h as f64 - 0.5);
        Complex64::from_polar(mag, phase)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shepp_logan_range() {
        let p = shepp_logan(64, 64);
        let m = p.magnitude();
        assert!(m.min() >= 0.0 && m.max() <= 1.0);
        assert!((m.max() - 1.0).abs() < 1e-12);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn random_phantoms_are_deterministic_and_distinct() {
        let opts = PhantomOptions::default();
        let a = random_phantom(32, 32, 1, opts);
        assert_eq!(a, random_phantom(32, 32, 1, opts));
        assert_ne!(a, random_phantom(32, 32, 2, opts));
        assert!(a.magnitude().max() <= 1.0 + 1e-12);
    }
}
