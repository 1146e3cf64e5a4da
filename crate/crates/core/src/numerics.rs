//! Complex/real 2-D arrays and the centered orthonormal 2-D DFT.
//!
//! Layout is row-major (`data[row * width + col]`). The transform pair
//! `fft2c`/`ifft2c` puts zero frequency at `(H/2, W/2)` (integer division)
//! and scales by `1/sqrt(HW)` in both directions, so `ifft2c` is both the
//! inverse and the adjoint of `fft2c`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{shape_err, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexImage {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ComplexImage {
    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        Self {
            height,
            width,
            data: vec![Complex64::new(0.0, 0.0); height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: format!("{} elements", height * width),
                got: format!("{} elements", data.len()),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut img = Self::zeros(height, width);
        for r in 0..height {
            for c in 0..width {
                img.data[r * width + c] = f(r, c);
            }
        }
        img
    }

    /// Builds a complex image from separate real and imaginary planes.
    pub fn from_planes(height: usize, width: usize, re: &[f64], im: &[f64]) -> Self {
        assert_eq!(re.len(), height * width);
        assert_eq!(im.len(), height * width);
        Self {
            height,
            width,
            data: re
                .iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.width + col] = v;
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(shape_err(self.shape(), other.shape()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn magnitude(&self) -> RealImage {
        RealImage {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn re_plane(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn im_plane(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.im).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Elementwise combination of two same-shaped images.
    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) -> Result<()> {
        self.check_same_shape(x)?;
        for (y, &v) in self.data.iter_mut().zip(&x.data) {
            *y += v * a;
        }
        Ok(())
    }
}

impl RealImage {
    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        Self {
            height,
            width,
            data: vec![0.0; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: format!("{} elements", height * width),
                got: format!("{} elements", data.len()),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut img = Self::zeros(height, width);
        for r in 0..height {
            for c in 0..width {
                img.data[r * width + c] = f(r, c);
            }
        }
        img
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(shape_err(self.shape(), other.shape()));
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_complex(&self) -> ComplexImage {
        ComplexImage {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// `Σ conj(a)·b`
pub fn dot(a: &ComplexImage, b: &ComplexImage) -> Result<Complex64> {
    a.check_same_shape(b)?;
    Ok(a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Real part of `dot`, i.e. the inner product of the images viewed as real
/// vectors of (re, im) pairs.
pub fn dot_re(a: &ComplexImage, b: &ComplexImage) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

pub fn fft2c(img: &ComplexImage) -> ComplexImage {
    centered_transform(img, FftDirection::Forward)
}

pub fn ifft2c(img: &ComplexImage) -> ComplexImage {
    centered_transform(img, FftDirection::Inverse)
}

/// `fftshift(dft(ifftshift(x))) / sqrt(HW)` for either direction.
fn centered_transform(img: &ComplexImage, direction: FftDirection) -> ComplexImage {
    let (h, w) = img.shape();
    let (hc, wc) = (h / 2, w / 2);

    // ifftshift: buf[r][c] = x[(r + H/2) % H][(c + W/2) % W]
    let mut buf = vec![Complex64::new(0.0, 0.0); h * w];
    for r in 0..h {
        let src_row = (r + hc) % h;
        for c in 0..w {
            buf[r * w + c] = img.data[src_row * w + (c + wc) % w];
        }
    }

    plan(w, direction).process(&mut buf);

    let mut cols = vec![Complex64::new(0.0, 0.0); h * w];
    for r in 0..h {
        for c in 0..w {
            cols[c * h + r] = buf[r * w + c];
        }
    }
    plan(h, direction).process(&mut cols);

    // fftshift while transposing back: out[r][c] = cols[(c - W/2) mod W][(r - H/2) mod H]
    let scale = 1.0 / ((h * w) as f64).sqrt();
    let mut out = ComplexImage::zeros(h, w);
    for r in 0..h {
        let sr = (r + h - hc) % h;
        for c in 0..w {
            let sc = (c + w - wc) % w;
            out.data[r * w + c] = cols[sc * h + sr] * scale;
        }
    }
    out
}
