//! Minimal reverse-mode tape over the primitives the unrolled pipeline uses.
//!
//! Nodes are appended in evaluation order, so walking them backwards is a
//! valid reverse topological order. Each node keeps its forward value; the
//! reverse sweep reads the saved values of its inputs.

use num_complex::Complex64;

use super::conv::{conv3x3_backward, conv3x3_forward};
use super::tensor::Tensor;
use crate::numerics::{fft2c, ifft2c, ComplexImage};
use crate::wavelet::{
    approx_plane, approx_plane_adjoint, detail_plane, detail_plane_adjoint, SUBBANDS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Identifies one trainable array: `set` is the caller's tensor-set index,
/// `entry` the array's position inside that set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamKey {
    pub set: usize,
    pub entry: usize,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Conv3x3 { x: Var, w: Var, b: Var },
    Relu(Var),
    Add(Var, Var),
    Sub(Var, Var),
    ScaleConst(Var, f64),
    ScaleBy { x: Var, s: Var },
    Clamp01(Var),
    Softplus(Var),
    Fft2c(Var),
    Ifft2c(Var),
    ComplexMul { x: Var, factor: Var, conj: bool },
    Mask { x: Var, mask: Var },
    Swt(Var),
    SwtAdjoint(Var),
    MapMul { coeffs: Var, map: Var },
    EoUpdate { v: Var, wx: Var, alpha: Var, rho: Var },
    Shrink { x: Var, threshold: f64 },
    SquaredError { x: Var, target: Var, denom: f64 },
    AbsError { x: Var, target: Var, denom: f64 },
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<(Var, ParamKey)>,
}

/// Result of a reverse sweep.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    params: Vec<(Var, ParamKey)>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Gradients of every parameter leaf that received one.
    pub fn params(&self) -> impl Iterator<Item = (ParamKey, &[f64])> + '_ {
        self.params
            .iter()
            .filter_map(|&(v, k)| self.get(v).map(|g| (k, g)))
    }
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn map_pairs(t: &Tensor, f: impl Fn(&ComplexImage) -> ComplexImage) -> Tensor {
    let [c, h, w] = t.shape();
    assert!(c % 2 == 0, "complex tensors need an even channel count");
    let imgs: Vec<ComplexImage> = (0..c / 2).map(|k| f(&t.complex_channel(k))).collect();
    let out = Tensor::from_complex_planes(&imgs);
    debug_assert_eq!(out.shape(), [c, h, w]);
    out
}

fn complex_mul(x: &Tensor, f: &Tensor, conj: bool) -> Tensor {
    let mut out = Tensor::zeros(x.shape());
    let n = x.plane_len();
    let (xr, xi) = (x.plane(0), x.plane(1));
    let (fr, fi) = (f.plane(0), f.plane(1));
    let sign = if conj { -1.0 } else { 1.0 };
    let data = out.data_mut();
    for p in 0..n {
        let z = Complex64::new(xr[p], xi[p]) * Complex64::new(fr[p], sign * fi[p]);
        data[p] = z.re;
        data[n + p] = z.im;
    }
    out
}

fn swt_forward(x: &Tensor) -> Tensor {
    let [c, h, w] = x.shape();
    assert_eq!(c, 2, "swt expects a (re, im) pair");
    let re = detail_plane(x.plane(0), h, w);
    let im = detail_plane(x.plane(1), h, w);
    let mut out = Tensor::zeros([2 * SUBBANDS, h, w]);
    for b in 0..SUBBANDS {
        out.plane_mut(2 * b).copy_from_slice(&re[b]);
        out.plane_mut(2 * b + 1).copy_from_slice(&im[b]);
    }
    out
}

fn swt_adjoint(c: &Tensor) -> Tensor {
    let [ch, h, w] = c.shape();
    assert_eq!(ch, 2 * SUBBANDS, "swt adjoint expects six channels");
    let re = detail_plane_adjoint([c.plane(0), c.plane(2), c.plane(4)], h, w);
    let im = detail_plane_adjoint([c.plane(1), c.plane(3), c.plane(5)], h, w);
    let mut out = Tensor::zeros([2, h, w]);
    out.plane_mut(0).copy_from_slice(&re);
    out.plane_mut(1).copy_from_slice(&im);
    out
}

/// `LᴴL x + Wᴴ soft(W x, t)` on one real plane.
fn shrink_plane(x: &[f64], h: usize, w: usize, t: f64) -> Vec<f64> {
    let smooth = approx_plane_adjoint(&approx_plane(x, h, w), h, w);
    let mut d = detail_plane(x, h, w);
    for band in d.iter_mut() {
        for v in band.iter_mut() {
            *v = soft_threshold(*v, t);
        }
    }
    let detail = detail_plane_adjoint([&d[0], &d[1], &d[2]], h, w);
    smooth.iter().zip(&detail).map(|(a, b)| a + b).collect()
}

fn shrink_plane_backward(x: &[f64], g: &[f64], h: usize, w: usize, t: f64) -> Vec<f64> {
    let smooth = approx_plane_adjoint(&approx_plane(g, h, w), h, w);
    let dx = detail_plane(x, h, w);
    let mut dg = detail_plane(g, h, w);
    for (band_g, band_x) in dg.iter_mut().zip(&dx) {
        for (vg, vx) in band_g.iter_mut().zip(band_x) {
            if vx.abs() <= t {
                *vg = 0.0;
            }
        }
    }
    let detail = detail_plane_adjoint([&dg[0], &dg[1], &dg[2]], h, w);
    smooth.iter().zip(&detail).map(|(a, b)| a + b).collect()
}

/// Closed-form edge update `α v / (ρ |w|² + α)` per coefficient.
pub(crate) fn eo_kernel(v: &[f64], wx_re: &[f64], wx_im: &[f64], alpha: f64, rho: f64, out: &mut [f64]) {
    for p in 0..v.len() {
        let q = wx_re[p] * wx_re[p] + wx_im[p] * wx_im[p];
        out[p] = alpha * v[p] / (rho * q + alpha);
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    /// A leaf whose gradient is reported under `key` after a reverse sweep.
    pub fn param(&mut self, value: Tensor, key: ParamKey) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad: true,
        });
        let v = Var(self.nodes.len() - 1);
        self.params.push((v, key));
        v
    }

    /// Plain input leaf that still collects a gradient (used by tests and
    /// by callers that want input sensitivities).
    pub fn input(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn conv3x3(&mut self, x: Var, w: Var, b: Var) -> Var {
        let (xs, ws, bs) = (self.value(x).shape(), self.value(w).shape(), self.value(b).shape());
        assert_eq!(ws[1], xs[0], "conv weight expects {} input channels, got {}", ws[1], xs[0]);
        assert_eq!(ws[2], 9);
        assert_eq!(bs, [ws[0], 1, 1]);
        let out = conv3x3_forward(self.value(x), self.value(w), self.value(b));
        self.push(out, Op::Conv3x3 { x, w, b }, &[x, w, b])
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        self.push(out, Op::Relu(x), &[x])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        va.check_shape(vb).expect("add: shape mismatch");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x + y).collect();
        let out = Tensor::from_vec(va.shape(), data).unwrap();
        self.push(out, Op::Add(a, b), &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        va.check_shape(vb).expect("sub: shape mismatch");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x - y).collect();
        let out = Tensor::from_vec(va.shape(), data).unwrap();
        self.push(out, Op::Sub(a, b), &[a, b])
    }

    pub fn scale_const(&mut self, x: Var, c: f64) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v *= c);
        self.push(out, Op::ScaleConst(x, c), &[x])
    }

    /// Scalar node `s` times tensor `x`.
    pub fn scale_by(&mut self, x: Var, s: Var) -> Var {
        assert_eq!(self.value(s).len(), 1, "scale_by expects a scalar");
        let sv = self.value(s).item();
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v *= sv);
        self.push(out, Op::ScaleBy { x, s }, &[x, s])
    }

    pub fn clamp01(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        self.push(out, Op::Clamp01(x), &[x])
    }

    pub fn softplus(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v = softplus(*v));
        self.push(out, Op::Softplus(x), &[x])
    }

    pub fn fft2c(&mut self, x: Var) -> Var {
        let out = map_pairs(self.value(x), fft2c);
        self.push(out, Op::Fft2c(x), &[x])
    }

    pub fn ifft2c(&mut self, x: Var) -> Var {
        let out = map_pairs(self.value(x), ifft2c);
        self.push(out, Op::Ifft2c(x), &[x])
    }

    /// `x · factor` (or `x · conj(factor)`); `factor` must be a constant.
    pub fn complex_mul(&mut self, x: Var, factor: Var, conj: bool) -> Var {
        assert!(!self.requires_grad(factor), "complex_mul factor must be constant");
        assert_eq!(self.value(x).shape()[0], 2);
        self.value(x).check_shape(self.value(factor)).expect("complex_mul: shape mismatch");
        let out = complex_mul(self.value(x), self.value(factor), conj);
        self.push(out, Op::ComplexMul { x, factor, conj }, &[x])
    }

    /// Multiplies every channel by a constant one-channel mask.
    pub fn mask(&mut self, x: Var, mask: Var) -> Var {
        assert!(!self.requires_grad(mask), "mask must be constant");
        let m = self.value(mask);
        assert_eq!(m.channels(), 1);
        let mut out = self.value(x).clone();
        for c in 0..out.channels() {
            for (v, &mv) in out.plane_mut(c).iter_mut().zip(m.data()) {
                *v *= mv;
            }
        }
        self.push(out, Op::Mask { x, mask }, &[x])
    }

    pub fn swt(&mut self, x: Var) -> Var {
        let out = swt_forward(self.value(x));
        self.push(out, Op::Swt(x), &[x])
    }

    pub fn swt_adjoint(&mut self, c: Var) -> Var {
        let out = swt_adjoint(self.value(c));
        self.push(out, Op::SwtAdjoint(c), &[c])
    }

    /// Six-channel complex detail coefficients times a three-channel real map.
    pub fn map_mul(&mut self, coeffs: Var, map: Var) -> Var {
        let (cv, mv) = (self.value(coeffs), self.value(map));
        assert_eq!(cv.channels(), 2 * mv.channels());
        assert_eq!(cv.plane_len(), mv.plane_len());
        let mut out = cv.clone();
        for c in 0..out.channels() {
            for (v, &m) in out.plane_mut(c).iter_mut().zip(mv.plane(c / 2)) {
                *v *= m;
            }
        }
        self.push(out, Op::MapMul { coeffs, map }, &[coeffs, map])
    }

    pub fn eo_update(&mut self, v: Var, wx: Var, alpha: Var, rho: Var) -> Var {
        let (vv, wv) = (self.value(v), self.value(wx));
        assert_eq!(wv.channels(), 2 * vv.channels());
        let (a, r) = (self.value(alpha).item(), self.value(rho).item());
        let mut out = Tensor::zeros(vv.shape());
        for b in 0..vv.channels() {
            eo_kernel(vv.plane(b), wv.plane(2 * b), wv.plane(2 * b + 1), a, r, out.plane_mut(b));
        }
        self.push(out, Op::EoUpdate { v, wx, alpha, rho }, &[v, wx, alpha, rho])
    }

    pub fn shrink(&mut self, x: Var, threshold: f64) -> Var {
        let xv = self.value(x);
        let [c, h, w] = xv.shape();
        let mut out = Tensor::zeros([c, h, w]);
        for ch in 0..c {
            out.plane_mut(ch).copy_from_slice(&shrink_plane(xv.plane(ch), h, w, threshold));
        }
        self.push(out, Op::Shrink { x, threshold }, &[x])
    }

    /// `Σ (x − target)² / denom`
    pub fn squared_error(&mut self, x: Var, target: Var, denom: f64) -> Var {
        let (xv, tv) = (self.value(x), self.value(target));
        xv.check_shape(tv).expect("squared_error: shape mismatch");
        let s: f64 = xv.data().iter().zip(tv.data()).map(|(a, b)| (a - b) * (a - b)).sum();
        self.push(Tensor::scalar(s / denom), Op::SquaredError { x, target, denom }, &[x, target])
    }

    /// `Σ |x − target| / denom`
    pub fn abs_error(&mut self, x: Var, target: Var, denom: f64) -> Var {
        let (xv, tv) = (self.value(x), self.value(target));
        xv.check_shape(tv).expect("abs_error: shape mismatch");
        let s: f64 = xv.data().iter().zip(tv.data()).map(|(a, b)| (a - b).abs()).sum();
        self.push(Tensor::scalar(s / denom), Op::AbsError { x, target, denom }, &[x, target])
    }

    /// Reverse sweep from `output`. A scalar output is seeded with 1 when
    /// `seed` is `None`.
    pub fn backward(&self, output: Var, seed: Option<&Tensor>) -> Gradients {
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; output.0 + 1];
        let seed = match seed {
            Some(s) => {
                self.value(output).check_shape(s).expect("seed shape must match output");
                s.data().to_vec()
            }
            None => {
                assert_eq!(self.value(output).len(), 1, "implicit seed needs a scalar output");
                vec![1.0]
            }
        };
        grads[output.0] = Some(seed);

        for idx in (0..=output.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(&node.op, &node.value, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Gradients {
            grads,
            params: self.params.clone(),
        }
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn propagate(&self, op: &Op, out: &Tensor, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let mut acc = |v: Var, contrib: Vec<f64>| {
            if !self.needs(v) {
                return;
            }
            match &mut grads[v.0] {
                Some(existing) => existing.iter_mut().zip(&contrib).for_each(|(a, b)| *a += b),
                slot @ None => *slot = Some(contrib),
            }
        };
        let as_tensor = |shape: [usize; 3]| Tensor::from_vec(shape, g.to_vec()).unwrap();

        match *op {
            Op::Leaf => {}
            Op::Conv3x3 { x, w, b } => {
                let gt = as_tensor(out.shape());
                let cg = conv3x3_backward(
                    self.value(x),
                    self.value(w),
                    &gt,
                    self.needs(x),
                    self.needs(w) || self.needs(b),
                );
                if let Some(gx) = cg.input {
                    acc(x, gx.into_vec());
                }
                if let Some(gw) = cg.weight {
                    acc(w, gw.into_vec());
                }
                if let Some(gb) = cg.bias {
                    acc(b, gb.into_vec());
                }
            }
            Op::Relu(x) => {
                let xv = self.value(x).data();
                acc(x, g.iter().zip(xv).map(|(&gi, &xi)| if xi > 0.0 { gi } else { 0.0 }).collect());
            }
            Op::Add(a, b) => {
                acc(a, g.to_vec());
                acc(b, g.to_vec());
            }
            Op::Sub(a, b) => {
                acc(a, g.to_vec());
                acc(b, g.iter().map(|v| -v).collect());
            }
            Op::ScaleConst(x, c) => acc(x, g.iter().map(|v| c * v).collect()),
            Op::ScaleBy { x, s } => {
                let sv = self.value(s).item();
                if self.needs(s) {
                    let d: f64 = self.value(x).data().iter().zip(g).map(|(a, b)| a * b).sum();
                    acc(s, vec![d]);
                }
                acc(x, g.iter().map(|v| sv * v).collect());
            }
            Op::Clamp01(x) => {
                // boundary points pass the gradient through
                let xv = self.value(x).data();
                acc(
                    x,
                    g.iter()
                        .zip(xv)
                        .map(|(&gi, &xi)| if (0.0..=1.0).contains(&xi) { gi } else { 0.0 })
                        .collect(),
                );
            }
            Op::Softplus(x) => {
                let xv = self.value(x).data();
                acc(x, g.iter().zip(xv).map(|(&gi, &xi)| gi * sigmoid(xi)).collect());
            }
            Op::Fft2c(x) => acc(x, map_pairs(&as_tensor(out.shape()), ifft2c).into_vec()),
            Op::Ifft2c(x) => acc(x, map_pairs(&as_tensor(out.shape()), fft2c).into_vec()),
            Op::ComplexMul { x, factor, conj } => {
                let gx = complex_mul(&as_tensor(out.shape()), self.value(factor), !conj);
                acc(x, gx.into_vec());
            }
            Op::Mask { x, mask } => {
                let m = self.value(mask).data();
                let n = m.len();
                acc(x, g.iter().enumerate().map(|(i, &gi)| gi * m[i % n]).collect());
            }
            Op::Swt(x) => acc(x, swt_adjoint(&as_tensor(out.shape())).into_vec()),
            Op::SwtAdjoint(c) => acc(c, swt_forward(&as_tensor(out.shape())).into_vec()),
            Op::MapMul { coeffs, map } => {
                let cv = self.value(coeffs);
                let mv = self.value(map);
                let n = cv.plane_len();
                if self.needs(coeffs) {
                    let gc = (0..g.len()).map(|i| g[i] * mv.data()[(i / n / 2) * n + i % n]).collect();
                    acc(coeffs, gc);
                }
                if self.needs(map) {
                    let mut gm = vec![0.0; mv.len()];
                    for b in 0..mv.channels() {
                        for p in 0..n {
                            let (re, im) = ((2 * b) * n + p, (2 * b + 1) * n + p);
                            gm[b * n + p] = cv.data()[re] * g[re] + cv.data()[im] * g[im];
                        }
                    }
                    acc(map, gm);
                }
            }
            Op::EoUpdate { v, wx, alpha, rho } => {
                let vv = self.value(v);
                let wv = self.value(wx);
                let a = self.value(alpha).item();
                let r = self.value(rho).item();
                let n = vv.plane_len();
                let mut gv = vec![0.0; vv.len()];
                let mut gw = vec![0.0; wv.len()];
                let (mut ga, mut gr) = (0.0, 0.0);
                for b in 0..vv.channels() {
                    for p in 0..n {
                        let i = b * n + p;
                        let (wr, wi) = (wv.data()[(2 * b) * n + p], wv.data()[(2 * b + 1) * n + p]);
                        let q = wr * wr + wi * wi;
                        let d = r * q + a;
                        let vi = vv.data()[i];
                        let gi = g[i];
                        gv[i] = gi * a / d;
                        ga += gi * vi * r * q / (d * d);
                        gr -= gi * a * vi * q / (d * d);
                        let gq = -gi * a * vi * r / (d * d);
                        gw[(2 * b) * n + p] = 2.0 * wr * gq;
                        gw[(2 * b + 1) * n + p] = 2.0 * wi * gq;
                    }
                }
                acc(v, gv);
                acc(wx, gw);
                acc(alpha, vec![ga]);
                acc(rho, vec![gr]);
            }
            Op::Shrink { x, threshold } => {
                let xv = self.value(x);
                let [c, h, w] = xv.shape();
                let gt = as_tensor(out.shape());
                let mut gx = Vec::with_capacity(xv.len());
                for ch in 0..c {
                    gx.extend(shrink_plane_backward(xv.plane(ch), gt.plane(ch), h, w, threshold));
                }
                acc(x, gx);
            }
            Op::SquaredError { x, target, denom } => {
                let s = 2.0 * g[0] / denom;
                let (xv, tv) = (self.value(x).data(), self.value(target).data());
                let d: Vec<f64> = xv.iter().zip(tv).map(|(a, b)| s * (a - b)).collect();
                if self.needs(target) {
                    acc(target, d.iter().map(|v| -v).collect());
                }
                acc(x, d);
            }
            Op::AbsError { x, target, denom } => {
                let s = g[0] / denom;
                let (xv, tv) = (self.value(x).data(), self.value(target).data());
                let sign = |d: f64| if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
                let d: Vec<f64> = xv.iter().zip(tv).map(|(a, b)| s * sign(a - b)).collect();
                if self.needs(target) {
                    acc(target, d.iter().map(|v| -v).collect());
                }
                acc(x, d);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(rng: &mut ChaCha8Rng, shape: [usize; 3], lo: f64, hi: f64) -> Tensor {
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
    }

    /// Checks every input gradient of a scalar-valued graph builder
    /// against central differences.
    fn check_gradients(inputs: Vec<Tensor>, build: impl Fn(&mut Tape, &[Var]) -> Var, tol: f64) {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.input(t.clone())).collect();
        let out = build(&mut tape, &vars);
        let grads = tape.backward(out, None);

        let eval = |inputs: &[Tensor]| {
            let mut t = Tape::new();
            let vs: Vec<Var> = inputs.iter().map(|x| t.input(x.clone())).collect();
            let o = build(&mut t, &vs);
            t.value(o).item()
        };
        let h = 1e-6;
        for (k, input) in inputs.iter().enumerate() {
            let an = grads.get(vars[k]).expect("gradient present");
            for i in 0..input.len() {
                let mut plus = inputs.clone();
                plus[k].data_mut()[i] += h;
                let mut minus = inputs.clone();
                minus[k].data_mut()[i] -= h;
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let err = (fd - an[i]).abs() / fd.abs().max(an[i].abs()).max(1e-3);
                assert!(err < tol, "input {k} entry {i}: fd {fd} vs analytic {}", an[i]);
            }
        }
    }

    // weighted sum with fixed random weights turns any tensor into a scalar
    fn project(tape: &mut Tape, x: Var, seed: u64) -> Var {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = tape.value(x).shape();
        let w = rand_tensor(&mut rng, shape, -1.0, 1.0);
        let target = tape.constant(w);
        let zero = tape.constant(Tensor::zeros(shape));
        // Σ (x + w)² − Σ x² − Σ w² = 2 Σ x·w, linear in x
        let s1 = tape.add(x, target);
        let a = tape.squared_error(s1, zero, 2.0);
        let b = tape.squared_error(x, zero, 2.0);
        let d = tape.sub(a, b);
        d
    }

    #[test]
    fn single_conv_bias_gradient_is_plane_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut tape = Tape::new();
        let x = tape.constant(rand_tensor(&mut rng, [2, 5, 5], -1.0, 1.0));
        let w = tape.param(rand_tensor(&mut rng, [3, 2, 9], -1.0, 1.0), ParamKey { set: 0, entry: 0 });
        let b = tape.param(Tensor::zeros([3, 1, 1]), ParamKey { set: 0, entry: 1 });
        let y = tape.conv3x3(x, w, b);
        let ones = tape.constant(Tensor::from_vec([3, 5, 5], vec![1.0; 75]).unwrap());
        let zero = tape.constant(Tensor::zeros([3, 5, 5]));
        // Σ y = (Σ (y+1)² − Σ y² − 75) / 2
        let s = tape.add(y, ones);
        let a = tape.squared_error(s, zero, 2.0);
        let c = tape.squared_error(y, zero, 2.0);
        let out = tape.sub(a, c);
        let grads = tape.backward(out, None);
        let gb = grads.get(b).unwrap();
        for &v in gb {
            assert!((v - 25.0).abs() < 1e-9);
        }
        assert!(grads.get(x).is_none());
        let keys: Vec<_> = grads.params().map(|(k, _)| k).collect();
        assert_eq!(keys.len(), 2);
    }

    #[test]
    fn conv_relu_chain_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inputs = vec![
            rand_tensor(&mut rng, [2, 4, 5], -1.0, 1.0),
            rand_tensor(&mut rng, [3, 2, 9], -1.0, 1.0),
            rand_tensor(&mut rng, [3, 1, 1], -0.2, 0.2),
        ];
        check_gradients(
            inputs,
            |t, v| {
                let y = t.conv3x3(v[0], v[1], v[2]);
                let r = t.relu(y);
                project(t, r, 3)
            },
            1e-5,
        );
    }

    #[test]
    fn fourier_and_coil_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let factor = rand_tensor(&mut rng, [2, 4, 6], -1.0, 1.0);
        let mask = Tensor::from_vec([1, 4, 6], (0..24).map(|i| f64::from(u8::from(i % 3 != 0))).collect()).unwrap();
        let inputs = vec![rand_tensor(&mut rng, [2, 4, 6], -1.0, 1.0)];
        for conj in [false, true] {
            let (factor, mask) = (factor.clone(), mask.clone());
            check_gradients(
                inputs.clone(),
                move |t, v| {
                    let f = t.constant(factor.clone());
                    let m = t.constant(mask.clone());
                    let a = t.complex_mul(v[0], f, conj);
                    let k = t.fft2c(a);
                    let km = t.mask(k, m);
                    let back = t.ifft2c(km);
                    let z = t.constant(Tensor::zeros([2, 4, 6]));
                    let e = t.squared_error(back, z, 1.0);
                    let p = project(t, k, 4);
                    t.add(e, p)
                },
                1e-5,
            );
        }
    }

    #[test]
    fn wavelet_mapmul_eo_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inputs = vec![
            rand_tensor(&mut rng, [2, 4, 4], -1.0, 1.0),  // x
            rand_tensor(&mut rng, [3, 4, 4], 0.1, 0.9),   // v
            rand_tensor(&mut rng, [1, 1, 1], 0.5, 1.5),   // alpha
            rand_tensor(&mut rng, [1, 1, 1], 0.5, 2.0),   // rho
        ];
        check_gradients(
            inputs,
            |t, v| {
                let wx = t.swt(v[0]);
                let p = t.eo_update(v[1], wx, v[2], v[3]);
                let pw = t.map_mul(wx, p);
                let back = t.swt_adjoint(pw);
                let a = project(t, back, 5);
                let b = project(t, p, 6);
                t.add(a, b)
            },
            1e-5,
        );
    }

    #[test]
    fn scalar_ops_and_losses() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inputs = vec![
            rand_tensor(&mut rng, [2, 3, 3], -1.0, 1.0),
            rand_tensor(&mut rng, [1, 1, 1], -1.0, 1.0),
            rand_tensor(&mut rng, [2, 3, 3], -1.0, 1.0),
        ];
        check_gradients(
            inputs,
            |t, v| {
                let s = t.softplus(v[1]);
                let y = t.scale_by(v[0], s);
                let y = t.scale_const(y, -0.7);
                let y = t.sub(y, v[2]);
                let target = t.constant(Tensor::zeros([2, 3, 3]));
                let a = t.squared_error(y, target, 3.0);
                let b = t.abs_error(y, target, 5.0);
                t.add(a, b)
            },
            1e-5,
        );
    }

    #[test]
    fn clamp_and_shrink_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // keep clear of the clamp corners so finite differences are smooth
        let mut x = rand_tensor(&mut rng, [2, 4, 4], -0.5, 1.5);
        for v in x.data_mut() {
            if (v.abs() < 0.05) || ((*v - 1.0).abs() < 0.05) {
                *v += 0.2;
            }
        }
        check_gradients(
            vec![x],
            |t, v| {
                let c = t.clamp01(v[0]);
                let s = t.shrink(v[0], 0.05);
                let a = project(t, c, 7);
                let b = project(t, s, 8);
                t.add(a, b)
            },
            1e-5,
        );
    }

    #[test]
    fn clamp_boundary_passes_gradient() {
        let mut tape = Tape::new();
        let x = tape.input(Tensor::from_vec([1, 1, 4], vec![0.0, 1.0, -0.1, 1.1]).unwrap());
        let c = tape.clamp01(x);
        let g = tape.backward(c, Some(&Tensor::from_vec([1, 1, 4], vec![1.0; 4]).unwrap()));
        assert_eq!(g.get(x).unwrap(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn backward_is_linear_in_the_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x0 = rand_tensor(&mut rng, [2, 4, 4], -1.0, 1.0);
        let w0 = rand_tensor(&mut rng, [2, 2, 9], -1.0, 1.0);
        let build = |t: &mut Tape, a: f64, b: f64| {
            let x = t.input(x0.clone());
            let w = t.input(w0.clone());
            let bias = t.constant(Tensor::zeros([2, 1, 1]));
            let y = t.conv3x3(x, w, bias);
            let r = t.relu(y);
            let zero = t.constant(Tensor::zeros([2, 4, 4]));
            let l1 = t.squared_error(r, zero, 1.0);
            let l2 = t.abs_error(y, zero, 1.0);
            let s1 = t.scale_const(l1, a);
            let s2 = t.scale_const(l2, b);
            let out = t.add(s1, s2);
            (x, out)
        };
        let grad_of = |a: f64, b: f64| {
            let mut t = Tape::new();
            let (x, out) = build(&mut t, a, b);
            t.backward(out, None).get(x).unwrap().to_vec()
        };
        let (ga, gb, gc) = (grad_of(1.0, 0.0), grad_of(0.0, 1.0), grad_of(0.3, -2.0));
        for i in 0..ga.len() {
            assert!((0.3 * ga[i] - 2.0 * gb[i] - gc[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn softplus_values() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        let v = softplus(-20.0);
        assert!(v > 0.0 && (v - 2.0611536e-9).abs() < 1e-15);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((softplus(50.0) - 50.0).abs() < 1e-12);
    }
}
