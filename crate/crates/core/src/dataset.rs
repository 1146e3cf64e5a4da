//! Synthetic dataset generation and the `JEOMRI01` container.
//!
//! Layout (little-endian): magic `JEOMRI01`, then `u32` n_samples, H, W,
//! n_coils, then per sample: ground truth (H·W pairs of f32 re, im),
//! n_coils sensitivity maps (same encoding), mask (H·W bytes of 0/1),
//! n_coils k-space arrays (same encoding).

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mri::{acs_columns, make_mask, make_sensitivities, synthesize_acquisition, CoilSystem, MaskScheme, SamplingMask};
use crate::numerics::ComplexImage;
use crate::phantom::{random_phantom, PhantomOptions};

pub const DATASET_MAGIC: &[u8; 8] = b"JEOMRI01";

#[derive(Clone, Debug)]
pub struct Sample {
    pub gt: ComplexImage,
    pub cs: CoilSystem,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub height: usize,
    pub width: usize,
    pub coils: usize,
    pub samples: Vec<Sample>,
}

#[derive(Clone, Debug)]
pub struct DatasetSpec {
    pub samples: usize,
    pub shape: (usize, usize),
    pub coils: usize,
    pub scheme: MaskScheme,
    pub acceleration: f64,
    pub acs_lines: usize,
    pub noise_std: f64,
    pub seed: u64,
    pub phantom: PhantomOptions,
}

impl DatasetSpec {
    pub fn new(samples: usize, shape: (usize, usize), coils: usize) -> Self {
        Self {
            samples,
            shape,
            coils,
            scheme: MaskScheme::RandomPointwise,
            acceleration: 4.0,
            acs_lines: shape.1 / 16,
            noise_std: 0.005,
            seed: 0,
            phantom: PhantomOptions::default(),
        }
    }
}

fn sample_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index as u64)
        .rotate_left(17)
}

/// Mask and noise settings of a simulated acquisition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Acquisition {
    pub scheme: MaskScheme,
    pub acceleration: f64,
    pub acs_lines: usize,
    pub noise_std: f64,
}

impl Acquisition {
    pub fn from_spec(spec: &DatasetSpec) -> Self {
        Self {
            scheme: spec.scheme,
            acceleration: spec.acceleration,
            acs_lines: spec.acs_lines,
            noise_std: spec.noise_std,
        }
    }
}

fn acquire(gt: &ComplexImage, sens: Vec<ComplexImage>, acq: &Acquisition, s: u64) -> Result<CoilSystem> {
    let mask = make_mask(acq.scheme, gt.shape(), acq.acceleration, acq.acs_lines, s ^ 0x3a5c)?;
    synthesize_acquisition(gt, sens, mask, acq.noise_std, s)
}

/// Draws `spec.samples` phantoms and simulates their acquisitions. The
/// phantom and coil maps depend only on (seed, index), so datasets that
/// differ only in mask settings share the same anatomy.
pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.samples == 0 {
        return Err(Error::InvalidParameter("dataset needs at least one sample".into()));
    }
    let (h, w) = spec.shape;
    let mut samples = Vec::with_capacity(spec.samples);
    for i in 0..spec.samples {
        let s = sample_seed(spec.seed, i);
        let gt = random_phantom(h, w, s, spec.phantom);
        let sens = make_sensitivities((h, w), spec.coils, s)?;
        let cs = acquire(&gt, sens, &Acquisition::from_spec(spec), s)?;
        samples.push(Sample { gt, cs });
    }
    Ok(Dataset {
        height: h,
        width: w,
        coils: spec.coils,
        samples,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Simulates a new acquisition of every sample's ground truth and coil
    /// maps with different mask or noise settings.
    pub fn reacquire(&self, acq: &Acquisition, seed: u64) -> Result<Dataset> {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, smp)| {
                let cs = acquire(&smp.gt, smp.cs.sens().to_vec(), acq, sample_seed(seed, i))?;
                Ok(Sample { gt: smp.gt.clone(), cs })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            height: self.height,
            width: self.width,
            coils: self.coils,
            samples,
        })
    }

    /// Deterministic split: the first `n_train` samples train, the rest test.
    pub fn split(&self, n_train: usize) -> (Dataset, Dataset) {
        let n = n_train.min(self.samples.len());
        let part = |s: &[Sample]| Dataset {
            height: self.height,
            width: self.width,
            coils: self.coils,
            samples: s.to_vec(),
        };
        (part(&self.samples[..n]), part(&self.samples[n..]))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(DATASET_MAGIC)?;
        for v in [self.samples.len(), self.height, self.width, self.coils] {
            let v = u32::try_from(v).map_err(|_| Error::Format("dimension exceeds u32".into()))?;
            out.write_all(&v.to_le_bytes())?;
        }
        for s in &self.samples {
            write_complex(&mut out, &s.gt)?;
            for m in s.cs.sens() {
                write_complex(&mut out, m)?;
            }
            out.write_all(s.cs.mask().pattern())?;
            for k in s.cs.kspace() {
                write_complex(&mut out, k)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// Reads a container. Mask scheme metadata is not stored, so it is
    /// inferred from the pattern (see [`infer_scheme`]).
    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != DATASET_MAGIC {
            return Err(Error::Format("bad dataset magic".into()));
        }
        let mut dims = [0usize; 4];
        for d in dims.iter_mut() {
            let mut b = [0u8; 4];
            input.read_exact(&mut b)?;
            *d = u32::from_le_bytes(b) as usize;
        }
        let [n, h, w, coils] = dims;
        if h == 0 || w == 0 || coils == 0 {
            return Err(Error::Format("zero dimension in dataset header".into()));
        }
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            let gt = read_complex(&mut input, h, w)?;
            let sens = (0..coils)
                .map(|_| read_complex(&mut input, h, w))
                .collect::<Result<Vec<_>>>()?;
            let mut pattern = vec![0u8; h * w];
            input.read_exact(&mut pattern)?;
            let scheme = infer_scheme(&pattern, h, w);
            let mask = SamplingMask::from_pattern(h, w, pattern, scheme, 0)?;
            let kspace = (0..coils)
                .map(|_| read_complex(&mut input, h, w))
                .collect::<Result<Vec<_>>>()?;
            samples.push(Sample {
                gt,
                cs: CoilSystem::new(sens, mask, kspace)?,
            });
        }
        Ok(Dataset {
            height: h,
            width: w,
            coils,
            samples,
        })
    }
}

/// Column-structured patterns are Cartesian; they are equidistant when
/// they match the evenly spread layout of [`make_mask`](crate::mri::make_mask)
/// for some centred ACS block.
pub fn infer_scheme(pattern: &[u8], h: usize, w: usize) -> MaskScheme {
    let column_structured = (0..w).all(|c| (1..h).all(|r| pattern[r * w + c] == pattern[c]));
    if !column_structured {
        return MaskScheme::RandomPointwise;
    }
    let sampled: Vec<bool> = (0..w).map(|c| pattern[c] == 1).collect();
    let lines = sampled.iter().filter(|&&s| s).count();
    let equidistant = (0..=lines.min(w - 1)).any(|acs| {
        let block = acs_columns(w, acs);
        if !block.clone().all(|c| sampled[c]) {
            return false;
        }
        let candidates: Vec<usize> = (0..w).filter(|c| !block.contains(c)).collect();
        let extra = lines - acs;
        let mut expect = vec![false; w];
        for c in block {
            expect[c] = true;
        }
        for i in 0..extra {
            expect[candidates[i * candidates.len() / extra]] = true;
        }
        expect == sampled
    });
    if equidistant {
        MaskScheme::CartesianEquidistantLines
    } else {
        MaskScheme::CartesianRandomLines
    }
}

fn write_complex<W: Write>(out: &mut W, img: &ComplexImage) -> Result<()> {
    let mut buf = Vec::with_capacity(img.len() * 8);
    for z in img.data() {
        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_complex<R: Read>(input: &mut R, h: usize, w: usize) -> Result<ComplexImage> {
    let mut buf = vec![0u8; h * w * 8];
    input.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(f64::from(re), f64::from(im))
        })
        .collect();
    ComplexImage::from_vec(h, w, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> DatasetSpec {
        let mut spec = DatasetSpec::new(3, (16, 16), 2);
        spec.seed = 5;
        spec
    }

    #[test]
    fn container_round_trip_preserves_f32_values() {
        let ds = generate(&small_spec()).unwrap();
        let bytes = ds.to_bytes();
        assert_eq!(&bytes[..8], DATASET_MAGIC);
        let back = Dataset::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.to_bytes(), bytes);
        let (a, b) = (&ds.samples[1], &back.samples[1]);
        assert_eq!(a.cs.mask().pattern(), b.cs.mask().pattern());
        assert!(a.gt.sub(&b.gt).unwrap().norm() < 1e-6);
    }

    #[test]
    fn expected_byte_length() {
        let ds = generate(&small_spec()).unwrap();
        let per_sample = 16 * 16 * 8 * (1 + 2 + 2) + 16 * 16;
        assert_eq!(ds.to_bytes().len(), 8 + 16 + 3 * per_sample);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small_spec()).unwrap().to_bytes();
        let b = generate(&small_spec()).unwrap().to_bytes();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut bytes = generate(&small_spec()).unwrap().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(Dataset::read_from(bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn reacquire_with_same_settings_matches_generate() {
        let mut spec = DatasetSpec::new(3, (16, 16), 2);
        spec.seed = 9;
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.reacquire(&Acquisition::from_spec(&spec), 9).unwrap().to_bytes(), ds.to_bytes());
        let mut acq = Acquisition::from_spec(&spec);
        acq.acceleration = 8.0;
        let other = ds.reacquire(&acq, 9).unwrap();
        assert_eq!(other.samples[1].gt, ds.samples[1].gt);
        assert!(other.samples[1].cs.mask().sampled_count() < ds.samples[1].cs.mask().sampled_count());
    }

    #[test]
    fn scheme_inference() {
        for scheme in [
            MaskScheme::CartesianEquidistantLines,
            MaskScheme::CartesianRandomLines,
            MaskScheme::RandomPointwise,
        ] {
            for (r, acs) in [(4.0, 0), (4.0, 4), (2.0, 4), (8.0, 4), (6.0, 2)] {
                let m = make_mask(scheme, (16, 64), r, acs, 3).unwrap();
                assert_eq!(infer_scheme(m.pattern(), 16, 64), scheme, "R={r} acs={acs}");
            }
        }
    }
}
