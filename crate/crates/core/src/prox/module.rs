use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tape::{ParamKey, Tape, Var};
use super::tensor::{Tensor, TensorSet};
use crate::error::{Error, Result};

/// Width of the hidden conv layers.
pub const HIDDEN: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum ProxKind {
    Identity,
    /// Soft-thresholding of stationary Haar detail coefficients.
    Shrinkage { threshold: f64 },
    /// `x + conv(relu(conv(relu(conv(x)))))`, circular padding.
    TinyCnn(TensorSet),
}

/// A learned or classical stand-in for a proximal operator. Maps a
/// `channels`-plane real array to one of identical shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ProximalModule {
    kind: ProxKind,
    channels: usize,
}

pub const CONV_NAMES: [(&str, &str); 3] = [
    ("conv1.weight", "conv1.bias"),
    ("conv2.weight", "conv2.bias"),
    ("conv3.weight", "conv3.bias"),
];

impl ProximalModule {
    pub fn identity(channels: usize) -> Self {
        Self {
            kind: ProxKind::Identity,
            channels,
        }
    }

    pub fn shrinkage(channels: usize, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shrinkage threshold must be > 0, got {threshold}"
            )));
        }
        Ok(Self {
            kind: ProxKind::Shrinkage { threshold },
            channels,
        })
    }

    /// TinyCNN with Kaiming-uniform hidden layers and a zero final layer,
    /// so the module starts out as the identity.
    pub fn tiny_cnn(channels: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [(channels, HIDDEN), (HIDDEN, HIDDEN), (HIDDEN, channels)];
        let mut set = TensorSet::new();
        for (layer, &(cin, cout)) in dims.iter().enumerate() {
            let n = cout * cin * 9;
            let weights = if layer + 1 == dims.len() {
                vec![0.0; n]
            } else {
                let bound = (6.0 / (cin * 9) as f64).sqrt();
                (0..n).map(|_| rng.random_range(-bound..bound)).collect()
            };
            set.insert(CONV_NAMES[layer].0, Tensor::from_vec([cout, cin, 9], weights).unwrap());
            set.insert(CONV_NAMES[layer].1, Tensor::zeros([cout, 1, 1]));
        }
        Self {
            kind: ProxKind::TinyCnn(set),
            channels,
        }
    }

    /// TinyCNN with every weight zero (exact identity).
    pub fn tiny_cnn_zero(channels: usize) -> Self {
        let mut m = Self::tiny_cnn(channels, 0);
        if let ProxKind::TinyCnn(set) = &mut m.kind {
            for e in set.entries_mut() {
                e.value.data_mut().fill(0.0);
            }
        }
        m
    }

    pub fn from_weights(channels: usize, weights: TensorSet) -> Result<Self> {
        let dims = [(channels, HIDDEN), (HIDDEN, HIDDEN), (HIDDEN, channels)];
        for (layer, &(cin, cout)) in dims.iter().enumerate() {
            let (wn, bn) = CONV_NAMES[layer];
            let ok = weights.get(wn).map(|t| t.shape()) == Some([cout, cin, 9])
                && weights.get(bn).map(|t| t.shape()) == Some([cout, 1, 1]);
            if !ok {
                return Err(Error::Format(format!("missing or misshapen tensors for {wn}/{bn}")));
            }
        }
        // canonical order so ParamKey entries line up with CONV_NAMES
        let mut set = TensorSet::new();
        for (wn, bn) in CONV_NAMES {
            set.insert(wn, weights.get(wn).unwrap().clone());
            set.insert(bn, weights.get(bn).unwrap().clone());
        }
        Ok(Self {
            kind: ProxKind::TinyCnn(set),
            channels,
        })
    }

    pub fn kind(&self) -> &ProxKind {
        &self.kind
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ProxKind::Identity => "identity",
            ProxKind::Shrinkage { .. } => "shrinkage",
            ProxKind::TinyCnn(_) => "tiny-cnn",
        }
    }

    pub fn weights(&self) -> Option<&TensorSet> {
        match &self.kind {
            ProxKind::TinyCnn(set) => Some(set),
            _ => None,
        }
    }

    pub fn weights_mut(&mut self) -> Option<&mut TensorSet> {
        match &mut self.kind {
            ProxKind::TinyCnn(set) => Some(set),
            _ => None,
        }
    }

    pub fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.channels() != self.channels {
            return Err(Error::ChannelMismatch {
                expected: self.channels,
                got: x.channels(),
            });
        }
        Ok(())
    }

    /// Records the module on `tape`. With `param_set = Some(s)` the weights
    /// become trainable leaves keyed `(s, entry)`; otherwise constants.
    pub fn record(&self, tape: &mut Tape, x: Var, param_set: Option<usize>) -> Result<Var> {
        self.check_input(tape.value(x))?;
        match &self.kind {
            ProxKind::Identity => Ok(x),
            ProxKind::Shrinkage { threshold } => Ok(tape.shrink(x, *threshold)),
            ProxKind::TinyCnn(set) => {
                let leaf = |tape: &mut Tape, entry: usize| match param_set {
                    Some(s) => tape.param(set.value(entry).clone(), ParamKey { set: s, entry }),
                    None => tape.constant(set.value(entry).clone()),
                };
                let mut h = x;
                for layer in 0..3 {
                    let w = leaf(tape, 2 * layer);
                    let b = leaf(tape, 2 * layer + 1);
                    h = tape.conv3x3(h, w, b);
                    if layer < 2 {
                        h = tape.relu(h);
                    }
                }
                Ok(tape.add(x, h))
            }
        }
    }

    /// Plain evaluation without gradient bookkeeping.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        if let ProxKind::Identity = self.kind {
            return Ok(x.clone());
        }
        let mut tape = Tape::new();
        let v = tape.constant(x.clone());
        let out = self.record(&mut tape, v, None)?;
        Ok(tape.value(out).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ComplexImage;
    use crate::testutil::random_complex;
    use crate::wavelet::{swt_approx, swt_approx_adjoint, swt_detail};

    #[test]
    fn identity_and_fresh_cnn_are_exact_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Tensor::from_complex(&random_complex(&mut rng, 8, 8));
        assert_eq!(ProximalModule::identity(2).forward(&x).unwrap(), x);
        assert_eq!(ProximalModule::tiny_cnn(2, 3).forward(&x).unwrap(), x);
        assert_eq!(ProximalModule::tiny_cnn_zero(2).forward(&x).unwrap(), x);
    }

    #[test]
    fn channel_mismatch_is_reported() {
        let x = Tensor::zeros([3, 4, 4]);
        assert!(matches!(
            ProximalModule::tiny_cnn(2, 0).forward(&x),
            Err(Error::ChannelMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn shrinkage_removes_small_details() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = random_complex(&mut rng, 8, 8);
        let d = swt_detail(&img).unwrap();
        let max_detail = d
            .subbands
            .iter()
            .flat_map(|b| b.data().iter().flat_map(|z| [z.re.abs(), z.im.abs()]))
            .fold(0.0, f64::max);
        let m = ProximalModule::shrinkage(2, max_detail * 1.01).unwrap();
        let out = m.forward(&Tensor::from_complex(&img)).unwrap().to_complex().unwrap();
        let smooth: ComplexImage = swt_approx_adjoint(&swt_approx(&img).unwrap()).unwrap();
        assert!(out.sub(&smooth).unwrap().norm() < 1e-12);
        assert!(ProximalModule::shrinkage(2, 0.0).is_err());
    }

    #[test]
    fn kaiming_bounds_and_zero_last_layer() {
        let m = ProximalModule::tiny_cnn(3, 9);
        let set = m.weights().unwrap();
        let w1 = set.get("conv1.weight").unwrap();
        let bound = (6.0f64 / 27.0).sqrt();
        assert!(w1.data().iter().all(|v| v.abs() <= bound));
        assert!(w1.data().iter().any(|&v| v != 0.0));
        assert!(set.get("conv3.weight").unwrap().data().iter().all(|&v| v == 0.0));
        assert_eq!(set.parameter_count(), 8 * 3 * 9 + 8 + 8 * 8 * 9 + 8 + 3 * 8 * 9 + 3);
    }
}
