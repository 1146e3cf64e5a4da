//! SENSE acquisition model: sampling masks, coil sensitivities, the
//! per-coil forward operator `U F S_i` and its adjoint, and synthetic
//! k-space generation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{shape_err, Error, Result};
use crate::numerics::{fft2c, ifft2c, ComplexImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskScheme {
    CartesianRandomLines,
    CartesianEquidistantLines,
    RandomPointwise,
}

impl MaskScheme {
    pub fn name(self) -> &'static str {
        match self {
            MaskScheme::CartesianRandomLines => "cartesian-random",
            MaskScheme::CartesianEquidistantLines => "cartesian-equidistant",
            MaskScheme::RandomPointwise => "random",
        }
    }

    pub fn is_cartesian(self) -> bool {
        !matches!(self, MaskScheme::RandomPointwise)
    }
}

impl fmt::Display for MaskScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MaskScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartesian-random" | "cartesian-random-lines" | "lines" => {
                Ok(MaskScheme::CartesianRandomLines)
            }
            "cartesian-equidistant" | "cartesian-equidistant-lines" | "equidistant" => {
                Ok(MaskScheme::CartesianEquidistantLines)
            }
            "random" | "random-pointwise" => Ok(MaskScheme::RandomPointwise),
            other => Err(Error::InvalidParameter(format!("unknown mask scheme '{other}'"))),
        }
    }
}

/// Binary k-space sampling pattern. Cartesian schemes sample whole columns
/// (the width axis is the phase-encode direction).
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingMask {
    height: usize,
    width: usize,
    pattern: Vec<u8>,
    scheme: MaskScheme,
    acceleration: f64,
    acs_lines: usize,
}

impl SamplingMask {
    pub fn full(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            pattern: vec![1; height * width],
            scheme: MaskScheme::CartesianEquidistantLines,
            acceleration: 1.0,
            acs_lines: 0,
        }
    }

    /// Wraps an existing 0/1 pattern (e.g. read back from a dataset file).
    /// The acceleration is recomputed from the sampled count.
    pub fn from_pattern(
        height: usize,
        width: usize,
        pattern: Vec<u8>,
        scheme: MaskScheme,
        acs_lines: usize,
    ) -> Result<Self> {
        if pattern.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: format!("{} mask entries", height * width),
                got: format!("{}", pattern.len()),
            });
        }
        if pattern.iter().any(|&v| v > 1) {
            return Err(Error::Format("mask entries must be 0 or 1".into()));
        }
        let sampled = pattern.iter().filter(|&&v| v == 1).count().max(1);
        Ok(Self {
            height,
            width,
            acceleration: (height * width) as f64 / sampled as f64,
            pattern,
            scheme,
            acs_lines,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pattern(&self) -> &[u8] {
        &self.pattern
    }

    pub fn scheme(&self) -> MaskScheme {
        self.scheme
    }

    pub fn acceleration(&self) -> f64 {
        self.acceleration
    }

    pub fn acs_lines(&self) -> usize {
        self.acs_lines
    }

    pub fn is_sampled(&self, row: usize, col: usize) -> bool {
        self.pattern[row * self.width + col] == 1
    }

    pub fn sampled_count(&self) -> usize {
        self.pattern.iter().filter(|&&v| v == 1).count()
    }

    pub fn sampled_fraction(&self) -> f64 {
        self.sampled_count() as f64 / self.pattern.len() as f64
    }

    /// Pattern as 0.0/1.0 weights.
    pub fn weights(&self) -> Vec<f64> {
        self.pattern.iter().map(|&v| f64::from(v)).collect()
    }

    pub fn apply(&self, k: &ComplexImage) -> ComplexImage {
        let mut out = k.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, k: &mut ComplexImage) {
        for (z, &m) in k.data_mut().iter_mut().zip(&self.pattern) {
            if m == 0 {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Column range `[start, start + acs)` centred on `width / 2`.
pub fn acs_columns(width: usize, acs: usize) -> std::ops::Range<usize> {
    let start = (width / 2).saturating_sub(acs / 2);
    start..start + acs
}

pub fn make_mask(
    scheme: MaskScheme,
    shape: (usize, usize),
    acceleration: f64,
    acs_lines: usize,
    seed: u64,
) -> Result<SamplingMask> {
    let (h, w) = shape;
    if h == 0 || w == 0 {
        return Err(Error::InvalidParameter("mask shape must be positive".into()));
    }
    if !(acceleration.is_finite() && acceleration >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "acceleration must be >= 1, got {acceleration}"
        )));
    }
    if acs_lines >= w {
        return Err(Error::InvalidParameter(format!(
            "acs_lines ({acs_lines}) must be smaller than the width ({w})"
        )));
    }
    let mut mask = SamplingMask {
        height: h,
        width: w,
        pattern: vec![0; h * w],
        scheme,
        acceleration,
        acs_lines,
    };
    if acceleration == 1.0 {
        mask.pattern.fill(1);
        return Ok(mask);
    }

    let line_budget = (w as f64 / acceleration).round() as usize;
    if line_budget < acs_lines {
        return Err(Error::InvalidParameter(format!(
            "R = {acceleration} leaves a budget of {line_budget} lines, fewer than {acs_lines} ACS lines"
        )));
    }
    let acs = acs_columns(w, acs_lines);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut columns = vec![false; w];
    match scheme {
        MaskScheme::CartesianEquidistantLines => {
            // the budget left after ACS, spread evenly over the other columns
            let candidates: Vec<usize> = (0..w).filter(|c| !acs.contains(c)).collect();
            for c in acs.clone() {
                columns[c] = true;
            }
            let extra = line_budget - acs_lines;
            for i in 0..extra {
                columns[candidates[i * candidates.len() / extra]] = true;
            }
        }
        MaskScheme::CartesianRandomLines => {
            let candidates: Vec<usize> = (0..w).filter(|c| !acs.contains(c)).collect();
            for c in acs.clone() {
                columns[c] = true;
            }
            let extra = line_budget - acs_lines;
            for i in sample(&mut rng, candidates.len(), extra) {
                columns[candidates[i]] = true;
            }
        }
        MaskScheme::RandomPointwise => {
            let budget = ((h * w) as f64 / acceleration).round() as usize;
            let acs_points = acs_lines * h;
            if budget < acs_points {
                return Err(Error::InvalidParameter(format!(
                    "R = {acceleration} leaves a budget of {budget} samples, fewer than the {acs_points} ACS samples"
                )));
            }
            let candidates: Vec<usize> = (0..h * w).filter(|p| !acs.contains(&(p % w))).collect();
            for r in 0..h {
                for c in acs.clone() {
                    mask.pattern[r * w + c] = 1;
                }
            }
            for i in sample(&mut rng, candidates.len(), budget - acs_points) {
                mask.pattern[candidates[i]] = 1;
            }
            return Ok(mask);
        }
    }
    for r in 0..h {
        for c in 0..w {
            mask.pattern[r * w + c] = u8::from(columns[c]);
        }
    }
    Ok(mask)
}

/// Smooth synthetic coil profiles: Gaussian magnitude bumps centred on
/// points around the image border with a linear phase ramp, normalized so
/// that `Σ|S_i|² = 1` at every pixel. A single coil is identically 1.
pub fn make_sensitivities(shape: (usize, usize), n: usize, seed: u64) -> Result<Vec<ComplexImage>> {
    let (h, w) = shape;
    if n == 0 {
        return Err(Error::InvalidParameter("coil count must be >= 1".into()));
    }
    if n == 1 {
        return Ok(vec![ComplexImage::from_fn(h, w, |_, _| Complex64::new(1.0, 0.0))]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e15_c0f1);
    let sigma = 0.45 * h.max(w) as f64;
    let mut maps: Vec<ComplexImage> = (0..n)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n as f64 + rng.random_range(-0.2..0.2);
            let cy = 0.5 * h as f64 * (1.0 + theta.sin());
            let cx = 0.5 * w as f64 * (1.0 + theta.cos());
            let a = rng.random_range(-PI / 2.0..PI / 2.0);
            let b = rng.random_range(-PI / 2.0..PI / 2.0);
            ComplexImage::from_fn(h, w, |r, c| {
                let dy = r as f64 - cy;
                let dx = c as f64 - cx;
                let mag = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
                let phase = a * (c as f64 / w as f64 - 0.5) + b * (r as f64 / h as f64 - 0.5);
                Complex64::from_polar(mag, phase)
            })
        })
        .collect();

    for p in 0..h * w {
        let total: f64 = maps.iter().map(|m| m.data()[p].norm_sqr()).sum();
        let inv = 1.0 / total.sqrt();
        for m in maps.iter_mut() {
            m.data_mut()[p] *= inv;
        }
    }
    Ok(maps)
}

/// Coil sensitivities, sampling mask and the measured (masked) k-space.
#[derive(Clone, Debug)]
pub struct CoilSystem {
    sens: Vec<ComplexImage>,
    mask: SamplingMask,
    kspace: Vec<ComplexImage>,
    weights: Vec<f64>,
}

impl CoilSystem {
    pub fn new(sens: Vec<ComplexImage>, mask: SamplingMask, kspace: Vec<ComplexImage>) -> Result<Self> {
        if sens.is_empty() {
            return Err(Error::InvalidParameter("coil system needs at least one coil".into()));
        }
        if sens.len() != kspace.len() {
            return Err(Error::InvalidParameter(format!(
                "{} sensitivity maps but {} k-space arrays",
                sens.len(),
                kspace.len()
            )));
        }
        let shape = mask.shape();
        for img in sens.iter().chain(&kspace) {
            if img.shape() != shape {
                return Err(shape_err(shape, img.shape()));
            }
        }
        for y in &kspace {
            for (z, &m) in y.data().iter().zip(mask.pattern()) {
                if m == 0 && (z.re != 0.0 || z.im != 0.0) {
                    return Err(Error::InvalidParameter(
                        "k-space data is nonzero at an unsampled location".into(),
                    ));
                }
            }
        }
        let weights = mask.weights();
        Ok(Self {
            sens,
            mask,
            kspace,
            weights,
        })
    }

    pub fn coils(&self) -> usize {
        self.sens.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mask.shape()
    }

    pub fn sens(&self) -> &[ComplexImage] {
        &self.sens
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn mask_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kspace(&self) -> &[ComplexImage] {
        &self.kspace
    }

    fn check_coil(&self, i: usize) -> Result<()> {
        if i >= self.sens.len() {
            return Err(Error::CoilIndex {
                index: i,
                coils: self.sens.len(),
            });
        }
        Ok(())
    }
}

/// `U F S_i x`
pub fn sense_forward(x: &ComplexImage, cs: &CoilSystem, i: usize) -> Result<ComplexImage> {
    cs.check_coil(i)?;
    let weighted = x.zip_map(&cs.sens[i], |a, s| a * s)?;
    let mut k = fft2c(&weighted);
    cs.mask.apply_in_place(&mut k);
    Ok(k)
}

/// `S_iᴴ Fᴴ Uᴴ k`
pub fn sense_adjoint(k: &ComplexImage, cs: &CoilSystem, i: usize) -> Result<ComplexImage> {
    cs.check_coil(i)?;
    k.check_same_shape(&cs.sens[i])?;
    let img = ifft2c(&cs.mask.apply(k));
    img.zip_map(&cs.sens[i], |a, s| s.conj() * a)
}

/// `½ Σ_i ‖U F S_i x − y_i‖²`
pub fn fidelity(x: &ComplexImage, cs: &CoilSystem) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..cs.coils() {
        total += sense_forward(x, cs, i)?.sub(&cs.kspace[i])?.norm_sqr();
    }
    Ok(0.5 * total)
}

/// `Σ_i S_iᴴ Fᴴ Uᴴ (U F S_i x − y_i)`, the gradient of [`fidelity`] with
/// respect to (re, im).
pub fn dc_gradient(x: &ComplexImage, cs: &CoilSystem) -> Result<ComplexImage> {
    let (h, w) = cs.shape();
    let mut acc = ComplexImage::zeros(h, w);
    for i in 0..cs.coils() {
        let residual = sense_forward(x, cs, i)?.sub(&cs.kspace[i])?;
        acc.axpy(1.0, &sense_adjoint(&residual, cs, i)?)?;
    }
    Ok(acc)
}

/// `x⁰ = Σ_i S_iᴴ Fᴴ y_i`
pub fn zero_filled_init(cs: &CoilSystem) -> ComplexImage {
    let (h, w) = cs.shape();
    let mut acc = ComplexImage::zeros(h, w);
    for (s, y) in cs.sens.iter().zip(&cs.kspace) {
        let img = ifft2c(y);
        for ((a, &v), &sv) in acc.data_mut().iter_mut().zip(img.data()).zip(s.data()) {
            *a += sv.conj() * v;
        }
    }
    acc
}

/// Simulates a masked multi-coil acquisition of `gt` with complex white
/// Gaussian noise (std `noise_std` per component) added before masking.
pub fn synthesize_acquisition(
    gt: &ComplexImage,
    sens: Vec<ComplexImage>,
    mask: SamplingMask,
    noise_std: f64,
    seed: u64,
) -> Result<CoilSystem> {
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise_std must be >= 0, got {noise_std}"
        )));
    }
    if gt.shape() != mask.shape() {
        return Err(shape_err(mask.shape(), gt.shape()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0a15_e5ee);
    let normal = Normal::new(0.0, noise_std.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut kspace = Vec::with_capacity(sens.len());
    for s in &sens {
        let mut k = fft2c(&gt.zip_map(s, |a, b| a * b)?);
        if noise_std > 0.0 {
            for z in k.data_mut() {
                *z += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
        mask.apply_in_place(&mut k);
        kspace.push(k);
    }
    CoilSystem::new(sens, mask, kspace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dot;
    use crate::testutil::{random_complex, rel_err};

    fn random_system(seed: u64, h: usize, w: usize, n: usize, r: f64) -> (ComplexImage, CoilSystem) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = random_complex(&mut rng, h, w);
        let mask = make_mask(MaskScheme::RandomPointwise, (h, w), r, 0, seed).unwrap();
        let sens = make_sensitivities((h, w), n, seed).unwrap();
        let cs = synthesize_acquisition(&gt, sens, mask, 0.05, seed).unwrap();
        (gt, cs)
    }

    #[test]
    fn equidistant_columns() {
        let m = make_mask(MaskScheme::CartesianEquidistantLines, (8, 64), 4.0, 0, 0).unwrap();
        for c in 0..64 {
            for r in 0..8 {
                assert_eq!(m.is_sampled(r, c), c % 4 == 0);
            }
        }
        // with ACS the line budget still holds
        for r in [2.0, 3.0, 4.0, 6.0, 8.0] {
            let m = make_mask(MaskScheme::CartesianEquidistantLines, (8, 64), r, 4, 0).unwrap();
            assert_eq!(m.sampled_count() / 8, (64.0 / r).round() as usize);
            for c in acs_columns(64, 4) {
                assert!(m.is_sampled(0, c));
            }
        }
    }

    #[test]
    fn random_lines_count_and_acs() {
        let m = make_mask(MaskScheme::CartesianRandomLines, (16, 64), 4.0, 8, 3).unwrap();
        let cols: Vec<usize> = (0..64).filter(|&c| m.is_sampled(0, c)).collect();
        assert_eq!(cols.len(), 16);
        for c in acs_columns(64, 8) {
            assert!(cols.contains(&c));
        }
        for c in 0..64 {
            let first = m.is_sampled(0, c);
            assert!((0..16).all(|r| m.is_sampled(r, c) == first));
        }
        assert_eq!(m.sampled_count(), 16 * 16);
    }

    #[test]
    fn pointwise_budget() {
        let m = make_mask(MaskScheme::RandomPointwise, (32, 32), 4.0, 2, 1).unwrap();
        assert_eq!(m.sampled_count(), 256);
        for c in acs_columns(32, 2) {
            assert!((0..32).all(|r| m.is_sampled(r, c)));
        }
    }

    #[test]
    fn unit_acceleration_is_full() {
        for scheme in [
            MaskScheme::CartesianRandomLines,
            MaskScheme::CartesianEquidistantLines,
            MaskScheme::RandomPointwise,
        ] {
            let m = make_mask(scheme, (8, 8), 1.0, 2, 0).unwrap();
            assert_eq!(m.sampled_count(), 64);
        }
    }

    #[test]
    fn mask_is_deterministic_and_rejects_bad_input() {
        let a = make_mask(MaskScheme::RandomPointwise, (16, 16), 3.0, 2, 42).unwrap();
        let b = make_mask(MaskScheme::RandomPointwise, (16, 16), 3.0, 2, 42).unwrap();
        assert_eq!(a, b);
        assert!(make_mask(MaskScheme::CartesianRandomLines, (8, 64), 32.0, 8, 0).is_err());
        assert!(make_mask(MaskScheme::CartesianRandomLines, (8, 8), 2.0, 8, 0).is_err());
        assert!(make_mask(MaskScheme::CartesianRandomLines, (8, 8), 0.5, 0, 0).is_err());
    }

    #[test]
    fn mask_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let k = random_complex(&mut rng, 8, 8);
        let m = make_mask(MaskScheme::RandomPointwise, (8, 8), 2.0, 0, 0).unwrap();
        assert_eq!(m.apply(&m.apply(&k)), m.apply(&k));
    }

    #[test]
    fn sensitivities_are_normalized_and_deterministic() {
        for n in [1, 2, 4, 7] {
            let maps = make_sensitivities((12, 10), n, 9).unwrap();
            assert_eq!(maps.len(), n);
            for p in 0..120 {
                let s: f64 = maps.iter().map(|m| m.data()[p].norm_sqr()).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
            assert_eq!(maps, make_sensitivities((12, 10), n, 9).unwrap());
        }
        let single = make_sensitivities((4, 4), 1, 0).unwrap();
        assert!(single[0].data().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn single_coil_full_mask_reduces_to_fft() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_complex(&mut rng, 8, 8);
        let sens = make_sensitivities((8, 8), 1, 0).unwrap();
        let cs = synthesize_acquisition(&x, sens, SamplingMask::full(8, 8), 0.0, 0).unwrap();
        assert_eq!(cs.kspace()[0], fft2c(&x));
        assert_eq!(sense_forward(&x, &cs, 0).unwrap(), fft2c(&x));
        let k = random_complex(&mut rng, 8, 8);
        assert!(sense_adjoint(&k, &cs, 0).unwrap().sub(&ifft2c(&k)).unwrap().norm() < 1e-14);
    }

    #[test]
    fn forward_is_zero_off_mask_and_on_zero_input() {
        let (gt, cs) = random_system(1, 8, 8, 2, 3.0);
        let k = sense_forward(&gt, &cs, 1).unwrap();
        for (z, &m) in k.data().iter().zip(cs.mask().pattern()) {
            if m == 0 {
                assert_eq!(*z, Complex64::new(0.0, 0.0));
            }
        }
        for y in cs.kspace() {
            for (z, &m) in y.data().iter().zip(cs.mask().pattern()) {
                if m == 0 {
                    assert_eq!(*z, Complex64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(sense_forward(&ComplexImage::zeros(8, 8), &cs, 0).unwrap().norm(), 0.0);
        assert_eq!(sense_adjoint(&ComplexImage::zeros(8, 8), &cs, 0).unwrap().norm(), 0.0);
        assert!(matches!(sense_forward(&gt, &cs, 2), Err(Error::CoilIndex { .. })));
    }

    #[test]
    fn sense_dot_test() {
        let (_, cs) = random_system(2, 8, 12, 3, 2.5);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..50 {
            let x = random_complex(&mut rng, 8, 12);
            let k = random_complex(&mut rng, 8, 12);
            for i in 0..3 {
                let lhs = dot(&sense_forward(&x, &cs, i).unwrap(), &k).unwrap();
                let rhs = dot(&x, &sense_adjoint(&k, &cs, i).unwrap()).unwrap();
                assert!((lhs - rhs).norm() / (x.norm() * k.norm()) < 1e-12);
            }
        }
    }

    #[test]
    fn dc_gradient_vanishes_for_consistent_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gt = random_complex(&mut rng, 8, 8);
        let sens = make_sensitivities((8, 8), 3, 1).unwrap();
        let cs = synthesize_acquisition(&gt, sens, SamplingMask::full(8, 8), 0.0, 0).unwrap();
        assert!(dc_gradient(&gt, &cs).unwrap().norm() < 1e-10);
    }

    #[test]
    fn dc_gradient_with_zero_data_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_complex(&mut rng, 8, 8);
        let sens = make_sensitivities((8, 8), 4, 2).unwrap();
        let zeros = vec![ComplexImage::zeros(8, 8); 4];
        let cs = CoilSystem::new(sens, SamplingMask::full(8, 8), zeros).unwrap();
        assert!(dc_gradient(&x, &cs).unwrap().sub(&x).unwrap().norm() < 1e-10);
    }

    #[test]
    fn dc_gradient_matches_finite_differences() {
        let (_, cs) = random_system(5, 8, 8, 2, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_complex(&mut rng, 8, 8);
        let g = dc_gradient(&x, &cs).unwrap();
        let step = 1e-5;
        for p in [0usize, 9, 27, 63] {
            for imag in [false, true] {
                let unit = if imag { Complex64::new(0.0, step) } else { Complex64::new(step, 0.0) };
                let mut xp = x.clone();
                xp.data_mut()[p] += unit;
                let mut xm = x.clone();
                xm.data_mut()[p] -= unit;
                let fd = (fidelity(&xp, &cs).unwrap() - fidelity(&xm, &cs).unwrap()) / (2.0 * step);
                let an = if imag { g.data()[p].im } else { g.data()[p].re };
                assert!(rel_err(fd, an, 1e-3) < 1e-6, "fd {fd} vs analytic {an}");
            }
        }
    }

    #[test]
    fn zero_filled_is_exact_under_full_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let gt = random_complex(&mut rng, 16, 16);
        let sens = make_sensitivities((16, 16), 4, 3).unwrap();
        let cs = synthesize_acquisition(&gt, sens, SamplingMask::full(16, 16), 0.0, 0).unwrap();
        let x0 = zero_filled_init(&cs);
        assert!(x0.sub(&gt).unwrap().norm() / gt.norm() < 1e-10);

        let sens = make_sensitivities((16, 16), 2, 3).unwrap();
        let empty = CoilSystem::new(sens, SamplingMask::full(16, 16), vec![ComplexImage::zeros(16, 16); 2]).unwrap();
        assert_eq!(zero_filled_init(&empty).norm(), 0.0);
    }

    #[test]
    fn acquisition_is_deterministic() {
        let (_, a) = random_system(21, 8, 8, 2, 2.0);
        let (_, b) = random_system(21, 8, 8, 2, 2.0);
        assert_eq!(a.kspace(), b.kspace());
    }
}
