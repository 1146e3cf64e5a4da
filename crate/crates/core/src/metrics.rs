//! Image-quality metrics on magnitude images.

use crate::error::{Error, Result};
use crate::numerics::{ComplexImage, RealImage};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Relative RMS error treated as exact. Datasets store single precision,
/// so anything finer than its resolution cannot be told apart from zero.
pub const EXACT_RMSE: f64 = f32::EPSILON as f64;

/// Peak is `max(reference)`. Images equal to storage precision (RMS error
/// at most [`EXACT_RMSE`] times the peak) give `+inf`.
pub fn psnr(reference: &RealImage, test: &RealImage) -> Result<f64> {
    let m = mse(reference, test)?;
    let peak = reference.max();
    if !(peak > 0.0) {
        return Err(Error::InvalidParameter("reference peak must be > 0 for PSNR".into()));
    }
    if m.sqrt() <= EXACT_RMSE * peak {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / m).log10())
}

pub fn mse(reference: &RealImage, test: &RealImage) -> Result<f64> {
    reference.check_same_shape(test)?;
    let n = reference.data().len() as f64;
    Ok(reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-(i as f64 - half).powi(2) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Separable valid-mode filtering with the normalized Gaussian window.
fn filter_valid(img: &[f64], h: usize, w: usize, g: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = g.len();
    let (oh, ow) = (h + 1 - n, w + 1 - n);
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = (0..n).map(|k| g[k] * img[r * w + c + k]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..n).map(|k| g[k] * rows[(r + k) * ow + c]).sum();
        }
    }
    (out, oh, ow)
}

/// Mean SSIM with an 11×11 Gaussian window (σ = 1.5), `K1 = 0.01`,
/// `K2 = 0.03`, over valid windows, dynamic range `max(reference)`.
pub fn ssim(reference: &RealImage, test: &RealImage) -> Result<f64> {
    reference.check_same_shape(test)?;
    let (h, w) = reference.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: SSIM_WINDOW,
        });
    }
    let l = reference.max();
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("reference peak must be > 0 for SSIM".into()));
    }
    let (c1, c2) = ((K1 * l).powi(2), (K2 * l).powi(2));
    let g = gaussian_window();
    let a = reference.data();
    let b = test.data();
    let prod = |f: &dyn Fn(f64, f64) -> f64| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect::<Vec<_>>();
    let (mu_a, oh, ow) = filter_valid(a, h, w, &g);
    let (mu_b, _, _) = filter_valid(b, h, w, &g);
    let (aa, _, _) = filter_valid(&prod(&|x, _| x * x), h, w, &g);
    let (bb, _, _) = filter_valid(&prod(&|_, y| y * y), h, w, &g);
    let (ab, _, _) = filter_valid(&prod(&|x, y| x * y), h, w, &g);
    let mut total = 0.0;
    for i in 0..oh * ow {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / (oh * ow) as f64)
}

/// `|a − b|` pixelwise.
pub fn error_map(a: &RealImage, b: &RealImage) -> Result<RealImage> {
    a.check_same_shape(b)?;
    let (h, w) = a.shape();
    RealImage::from_vec(h, w, a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub mse: f64,
}

impl MetricReport {
    /// Metrics of the magnitude of `recon` against the magnitude of `gt`.
    pub fn compute(gt: &ComplexImage, recon: &ComplexImage) -> Result<Self> {
        let (a, b) = (gt.magnitude(), recon.magnitude());
        Ok(Self {
            psnr_db: psnr(&a, &b)?,
            ssim: ssim(&a, &b)?,
            mse: mse(&a, &b)?,
        })
    }

    pub fn mean(reports: &[MetricReport]) -> Option<MetricReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        Some(MetricReport {
            psnr_db: reports.iter().map(|r| r.psnr_db).sum::<f64>() / n,
            ssim: reports.iter().map(|r| r.ssim).sum::<f64>() / n,
            mse: reports.iter().map(|r| r.mse).sum::<f64>() / n,
        })
    }
}

pub const CSV_HEADER: &str = "method,scheme,R,seed,psnr_db,ssim,mse";

/// Formats a float with 9 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.8e}")
    }
}

pub fn csv_row(method: &str, scheme: &str, r: f64, seed: u64, m: &MetricReport) -> String {
    format!(
        "{method},{scheme},{},{seed},{},{},{}",
        fmt_sig(r),
        fmt_sig(m.psnr_db),
        fmt_sig(m.ssim),
        fmt_sig(m.mse)
    )
}
