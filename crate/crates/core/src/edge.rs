//! Non-edge probability map: initialization from detail magnitudes, the
//! learned edge proximal step, and the closed-form edge update.

use crate::error::{shape_err, Error, Result};
use crate::numerics::{ComplexImage, RealImage};
use crate::prox::tape::eo_kernel;
use crate::prox::{ProximalModule, Tensor};
use crate::wavelet::{minmax_normalize, swt_detail, DetailCoefficients, SUBBANDS};

/// One probability channel per detail subband (`LH`, `HL`, `HH`), each
/// entry in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct NonEdgeMap {
    pub channels: [RealImage; SUBBANDS],
}

impl NonEdgeMap {
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self {
            channels: std::array::from_fn(|_| RealImage::from_fn(height, width, |_, _| value)),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.channels[0].shape()
    }

    pub fn in_unit_range(&self) -> bool {
        self.channels
            .iter()
            .all(|c| c.data().iter().all(|v| (0.0..=1.0).contains(v)))
    }

    /// Pixelwise minimum over channels, used for single-image display.
    pub fn min_channel(&self) -> RealImage {
        let (h, w) = self.shape();
        RealImage::from_fn(h, w, |r, c| {
            self.channels.iter().map(|ch| ch.get(r, c)).fold(f64::INFINITY, f64::min)
        })
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_real_planes(&self.channels)
    }

    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        if t.channels() != SUBBANDS {
            return Err(Error::ChannelMismatch {
                expected: SUBBANDS,
                got: t.channels(),
            });
        }
        Ok(Self {
            channels: std::array::from_fn(|b| t.real_channel(b)),
        })
    }
}

/// `P⁰ = 1 − N(|W x⁰|)` with global min–max normalization `N`.
pub fn init_nonedge_map(x0: &ComplexImage) -> Result<NonEdgeMap> {
    let mags = swt_detail(x0)?.magnitudes();
    let normalized = minmax_normalize(&mags);
    Ok(NonEdgeMap {
        channels: std::array::from_fn(|b| normalized[b].map(|v| 1.0 - v)),
    })
}

/// Closed-form minimizer of `ρ/2 ‖P·Wx‖² + α/2 ‖V − P‖²`:
/// `P = α V / (ρ |Wx|² + α)` elementwise.
pub fn eo_update(v: &NonEdgeMap, wx: &DetailCoefficients, alpha: f64, rho: f64) -> Result<NonEdgeMap> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be >= 0, got {rho}")));
    }
    wx.check_consistent()?;
    if v.shape() != wx.shape() {
        return Err(shape_err(v.shape(), wx.shape()));
    }
    let (h, w) = v.shape();
    let channels = std::array::from_fn(|b| {
        let mut out = vec![0.0; h * w];
        let band = &wx.subbands[b];
        eo_kernel(v.channels[b].data(), &band.re_plane(), &band.im_plane(), alpha, rho, &mut out);
        RealImage::from_vec(h, w, out).expect("plane size")
    });
    Ok(NonEdgeMap { channels })
}

/// `V = clamp₍₀,₁₎(ERN(P))`
pub fn edge_prox(p: &NonEdgeMap, ern: &ProximalModule) -> Result<NonEdgeMap> {
    let mut out = ern.forward(&p.to_tensor())?;
    out.data_mut().iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    NonEdgeMap::from_tensor(&out)
}
