//! Single-level stationary Haar transform on a circular grid.
//!
//! Analysis filters are `low = [1, 1] / 2` and `high = [1, -1] / 2`, applied
//! as circular convolutions (`y[n] = (x[n] ± x[n-1]) / 2`) first along the
//! width axis and then along the height axis. Subband names give the width
//! filter first: `HL` is high-pass across columns, low-pass across rows.
//! The four subbands together form a tight frame (`AᴴA = I`); the detail
//! operator `W` keeps only `LH`, `HL`, `HH`.

use crate::error::{shape_err, Error, Result};
use crate::numerics::{ComplexImage, RealImage};

pub const SUBBANDS: usize = 3;

/// Detail subbands `[LH, HL, HH]`, each on the source grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailCoefficients {
    pub subbands: [ComplexImage; SUBBANDS],
}

impl DetailCoefficients {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            subbands: std::array::from_fn(|_| ComplexImage::zeros(height, width)),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.subbands[0].shape()
    }

    pub fn check_consistent(&self) -> Result<()> {
        let s = self.shape();
        for b in &self.subbands[1..] {
            if b.shape() != s {
                return Err(shape_err(s, b.shape()));
            }
        }
        Ok(())
    }

    /// Per-coefficient complex magnitude, one real image per subband.
    pub fn magnitudes(&self) -> [RealImage; SUBBANDS] {
        std::array::from_fn(|b| self.subbands[b].magnitude())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.subbands.iter().map(|b| b.norm_sqr()).sum()
    }

    pub fn dot(&self, other: &Self) -> Result<num_complex::Complex64> {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (a, b) in self.subbands.iter().zip(&other.subbands) {
            acc += crate::numerics::dot(a, b)?;
        }
        Ok(acc)
    }
}

// y[r][c] = (x[r][c] + sign * x[r][c-1]) / 2
fn filter_w(x: &[f64], h: usize, w: usize, sign: f64) -> Vec<f64> {
    let mut y = vec![0.0; h * w];
    for r in 0..h {
        let row = &x[r * w..(r + 1) * w];
        let out = &mut y[r * w..(r + 1) * w];
        out[0] = 0.5 * (row[0] + sign * row[w - 1]);
        for c in 1..w {
            out[c] = 0.5 * (row[c] + sign * row[c - 1]);
        }
    }
    y
}

// adjoint of filter_w: x[r][c] = (y[r][c] + sign * y[r][c+1]) / 2
fn filter_w_adj(y: &[f64], h: usize, w: usize, sign: f64) -> Vec<f64> {
    let mut x = vec![0.0; h * w];
    for r in 0..h {
        let row = &y[r * w..(r + 1) * w];
        let out = &mut x[r * w..(r + 1) * w];
        for c in 0..w - 1 {
            out[c] = 0.5 * (row[c] + sign * row[c + 1]);
        }
        out[w - 1] = 0.5 * (row[w - 1] + sign * row[0]);
    }
    x
}

// y[r][c] = (x[r][c] + sign * x[r-1][c]) / 2
fn filter_h(x: &[f64], h: usize, w: usize, sign: f64) -> Vec<f64> {
    let mut y = vec![0.0; h * w];
    for r in 0..h {
        let prev = if r == 0 { h - 1 } else { r - 1 };
        for c in 0..w {
            y[r * w + c] = 0.5 * (x[r * w + c] + sign * x[prev * w + c]);
        }
    }
    y
}

fn filter_h_adj(y: &[f64], h: usize, w: usize, sign: f64) -> Vec<f64> {
    let mut x = vec![0.0; h * w];
    for r in 0..h {
        let next = if r == h - 1 { 0 } else { r + 1 };
        for c in 0..w {
            x[r * w + c] = 0.5 * (y[r * w + c] + sign * y[next * w + c]);
        }
    }
    x
}

const LOW: f64 = 1.0;
const HIGH: f64 = -1.0;

/// Detail subbands `[LH, HL, HH]` of one real plane.
pub fn detail_plane(x: &[f64], h: usize, w: usize) -> [Vec<f64>; SUBBANDS] {
    let lw = filter_w(x, h, w, LOW);
    let hw = filter_w(x, h, w, HIGH);
    [
        filter_h(&lw, h, w, HIGH),
        filter_h(&hw, h, w, LOW),
        filter_h(&hw, h, w, HIGH),
    ]
}

/// Adjoint of [`detail_plane`].
pub fn detail_plane_adjoint(c: [&[f64]; SUBBANDS], h: usize, w: usize) -> Vec<f64> {
    let lh = filter_w_adj(&filter_h_adj(c[0], h, w, HIGH), h, w, LOW);
    let hl = filter_w_adj(&filter_h_adj(c[1], h, w, LOW), h, w, HIGH);
    let hh = filter_w_adj(&filter_h_adj(c[2], h, w, HIGH), h, w, HIGH);
    lh.iter()
        .zip(&hl)
        .zip(&hh)
        .map(|((a, b), c)| a + b + c)
        .collect()
}

/// The excluded approximation (LL) subband of one real plane.
pub fn approx_plane(x: &[f64], h: usize, w: usize) -> Vec<f64> {
    filter_h(&filter_w(x, h, w, LOW), h, w, LOW)
}

pub fn approx_plane_adjoint(c: &[f64], h: usize, w: usize) -> Vec<f64> {
    filter_w_adj(&filter_h_adj(c, h, w, LOW), h, w, LOW)
}

fn check_min_size(h: usize, w: usize) -> Result<()> {
    if h < 2 || w < 2 {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: 2,
        });
    }
    Ok(())
}

pub fn swt_detail(img: &ComplexImage) -> Result<DetailCoefficients> {
    let (h, w) = img.shape();
    check_min_size(h, w)?;
    let re = detail_plane(&img.re_plane(), h, w);
    let im = detail_plane(&img.im_plane(), h, w);
    Ok(DetailCoefficients {
        subbands: std::array::from_fn(|b| ComplexImage::from_planes(h, w, &re[b], &im[b])),
    })
}

pub fn swt_detail_adjoint(coeffs: &DetailCoefficients) -> Result<ComplexImage> {
    coeffs.check_consistent()?;
    let (h, w) = coeffs.shape();
    check_min_size(h, w)?;
    let re: [Vec<f64>; SUBBANDS] = std::array::from_fn(|b| coeffs.subbands[b].re_plane());
    let im: [Vec<f64>; SUBBANDS] = std::array::from_fn(|b| coeffs.subbands[b].im_plane());
    let xr = detail_plane_adjoint([&re[0], &re[1], &re[2]], h, w);
    let xi = detail_plane_adjoint([&im[0], &im[1], &im[2]], h, w);
    Ok(ComplexImage::from_planes(h, w, &xr, &xi))
}

pub fn swt_approx(img: &ComplexImage) -> Result<ComplexImage> {
    let (h, w) = img.shape();
    check_min_size(h, w)?;
    Ok(ComplexImage::from_planes(
        h,
        w,
        &approx_plane(&img.re_plane(), h, w),
        &approx_plane(&img.im_plane(), h, w),
    ))
}

pub fn swt_approx_adjoint(c: &ComplexImage) -> Result<ComplexImage> {
    let (h, w) = c.shape();
    check_min_size(h, w)?;
    Ok(ComplexImage::from_planes(
        h,
        w,
        &approx_plane_adjoint(&c.re_plane(), h, w),
        &approx_plane_adjoint(&c.im_plane(), h, w),
    ))
}

/// Min–max normalization with one global scale across all subbands.
/// A degenerate range (max == min) maps everything to zero.
pub fn minmax_normalize(mag: &[RealImage; SUBBANDS]) -> [RealImage; SUBBANDS] {
    let lo = mag.iter().map(RealImage::min).fold(f64::INFINITY, f64::min);
    let hi = mag.iter().map(RealImage::max).fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    std::array::from_fn(|b| {
        if range > 0.0 {
            mag[b].map(|v| ((v - lo) / range).clamp(0.0, 1.0))
        } else {
            mag[b].map(|_| 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_complex;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_image_has_exactly_zero_details() {
        let x = ComplexImage::from_fn(8, 8, |_, _| Complex64::new(0.37, -1.3));
        let d = swt_detail(&x).unwrap();
        for b in &d.subbands {
            assert!(b.data().iter().all(|z| z.re == 0.0 && z.im == 0.0));
        }
    }

    #[test]
    fn column_step_lights_up_hl_at_transitions() {
        let x = ComplexImage::from_fn(4, 4, |_, c| Complex64::new(if c >= 2 { 1.0 } else { 0.0 }, 0.0));
        let d = swt_detail(&x).unwrap();
        // direct circular convolution: HL[r][c] = (x[c] - x[c-1]) / 2 after row low-pass
        for r in 0..4 {
            for c in 0..4 {
                let col = |j: usize| if j >= 2 { 1.0 } else { 0.0 };
                let expect = 0.5 * (col(c) - col((c + 3) % 4));
                assert_eq!(d.subbands[1].get(r, c), Complex64::new(expect, 0.0));
                assert_eq!(d.subbands[0].get(r, c), Complex64::new(0.0, 0.0));
                assert_eq!(d.subbands[2].get(r, c), Complex64::new(0.0, 0.0));
            }
        }
        assert_eq!(d.subbands[1].get(0, 0).re, -0.5);
        assert_eq!(d.subbands[1].get(0, 2).re, 0.5);
        assert_eq!(d.subbands[1].get(0, 1).re, 0.0);
        assert_eq!(d.subbands[1].get(0, 3).re, 0.0);
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_complex(&mut rng, 8, 6);
        let y = random_complex(&mut rng, 8, 6);
        let (a, b) = (0.7, -2.3);
        let lhs = swt_detail(&x.scale(a).add(&y.scale(b)).unwrap()).unwrap();
        let dx = swt_detail(&x).unwrap();
        let dy = swt_detail(&y).unwrap();
        for k in 0..3 {
            let rhs = dx.subbands[k].scale(a).add(&dy.subbands[k].scale(b)).unwrap();
            assert!(lhs.subbands[k].sub(&rhs).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_dot_test_over_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(h, w) in &[(4, 4), (8, 8), (16, 12)] {
            for _ in 0..100 {
                let x = random_complex(&mut rng, h, w);
                let c = DetailCoefficients {
                    subbands: std::array::from_fn(|_| random_complex(&mut rng, h, w)),
                };
                let lhs = swt_detail(&x).unwrap().dot(&c).unwrap();
                let rhs = crate::numerics::dot(&x, &swt_detail_adjoint(&c).unwrap()).unwrap();
                let scale = x.norm() * c.norm_sqr().sqrt();
                assert!((lhs - rhs).norm() / scale < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coefficients_give_zero_image() {
        let z = swt_detail_adjoint(&DetailCoefficients::zeros(5, 4)).unwrap();
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn tight_frame_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(h, w) in &[(4, 4), (8, 8), (16, 12), (5, 7)] {
            let x = random_complex(&mut rng, h, w);
            let detail = swt_detail_adjoint(&swt_detail(&x).unwrap()).unwrap();
            let approx = swt_approx_adjoint(&swt_approx(&x).unwrap()).unwrap();
            let sum = detail.add(&approx).unwrap();
            assert!(sum.sub(&x).unwrap().norm() / x.norm() < 1e-12);
        }
    }

    #[test]
    fn too_small_is_rejected() {
        assert!(matches!(
            swt_detail(&ComplexImage::zeros(1, 4)),
            Err(Error::TooSmall { .. })
        ));
    }

    #[test]
    fn minmax_examples() {
        let a = RealImage::from_vec(1, 3, vec![0.0, 1.0, 4.0]).unwrap();
        let z = RealImage::from_vec(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let out = minmax_normalize(&[a, z.clone(), z.clone()]);
        assert_eq!(out[0].data(), &[0.0, 0.25, 1.0]);
        assert_eq!(out[1].data(), &[0.25, 0.25, 0.25]);

        let span = RealImage::from_vec(1, 2, vec![0.0, 5.0]).unwrap();
        let out = minmax_normalize(&[span.clone(), span.map(|v| v * 0.5), span.map(|v| v * 0.2)]);
        assert_eq!(out[0].min(), 0.0);
        assert_eq!(out[0].max(), 1.0);

        let zero = RealImage::zeros(2, 2);
        let out = minmax_normalize(&[zero.clone(), zero.clone(), zero]);
        assert!(out.iter().all(|b| b.data().iter().all(|&v| v == 0.0)));
    }
}
