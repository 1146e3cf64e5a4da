//! 3×3 convolution with circular padding, forward and reverse kernels.
//!
//! Weights are stored `[out, in, 9]` with tap `k = 3 * ky + kx` reading the
//! input at offset `(ky - 1, kx - 1)`.

use super::tensor::Tensor;

/// Circularly padded copy of every channel, `(h + 2) × (w + 2)` per plane,
/// plus two trailing zeros so every tap offset stays in bounds.
fn pad_circular(x: &Tensor) -> Vec<f64> {
    let [c, h, w] = x.shape();
    let (ph, pw) = (h + 2, w + 2);
    let mut out = vec![0.0; c * ph * pw + 2];
    for ch in 0..c {
        let src = x.plane(ch);
        let dst = &mut out[ch * ph * pw..(ch + 1) * ph * pw];
        for pr in 0..ph {
            let sr = (pr + h - 1) % h;
            let row = &src[sr * w..(sr + 1) * w];
            let d = &mut dst[pr * pw..(pr + 1) * pw];
            d[0] = row[w - 1];
            d[1..=w].copy_from_slice(row);
            d[w + 1] = row[0];
        }
    }
    out
}

/// A strided matrix view: base offset into a slice plus (row, column) strides.
#[derive(Clone, Copy)]
struct View {
    offset: usize,
    rs: usize,
    cs: usize,
}

impl View {
    fn last(&self, rows: usize, cols: usize) -> usize {
        self.offset + (rows - 1) * self.rs + (cols - 1) * self.cs
    }
}

/// `C += A · B` with `A` m×k, `B` k×n, `C` m×n.
#[allow(clippy::too_many_arguments)]
fn gemm_acc(m: usize, k: usize, n: usize, a: &[f64], av: View, b: &[f64], bv: View, c: &mut [f64], cv: View) {
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    assert!(av.last(m, k) < a.len());
    assert!(bv.last(k, n) < b.len());
    assert!(cv.last(m, n) < c.len());
    // SAFETY: the asserts above bound every element the views can reach.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr().add(av.offset),
            av.rs as isize,
            av.cs as isize,
            b.as_ptr().add(bv.offset),
            bv.rs as isize,
            bv.cs as isize,
            1.0,
            c.as_mut_ptr().add(cv.offset),
            cv.rs as isize,
            cv.cs as isize,
        );
    }
}

/// Circular correlation; `wd` is `[cout, cin, 9]` row-major.
///
/// The output is first formed on an `h × (w + 2)` grid whose pixel `j`
/// reads the padded input at `j + ky (w + 2) + kx`, so each tap is one
/// matrix product against a shifted view. The two extra columns per row
/// are discarded.
fn correlate(x: &Tensor, wd: &[f64], cout: usize, bias: Option<&[f64]>) -> Tensor {
    let [cin, h, w] = x.shape();
    let (ph, pw) = (h + 2, w + 2);
    let padded = pad_circular(x);
    let wide = h * pw;
    let mut acc = vec![0.0; cout * wide];
    for k in 0..9 {
        let (ky, kx) = (k / 3, k % 3);
        gemm_acc(
            cout,
            cin,
            wide,
            wd,
            View { offset: k, rs: cin * 9, cs: 9 },
            &padded,
            View { offset: ky * pw + kx, rs: ph * pw, cs: 1 },
            &mut acc,
            View { offset: 0, rs: wide, cs: 1 },
        );
    }
    let mut out = Tensor::zeros([cout, h, w]);
    for co in 0..cout {
        let b = bias.map_or(0.0, |b| b[co]);
        let src = &acc[co * wide..(co + 1) * wide];
        let dst = out.plane_mut(co);
        for r in 0..h {
            for (d, s) in dst[r * w..(r + 1) * w].iter_mut().zip(&src[r * pw..r * pw + w]) {
                *d = s + b;
            }
        }
    }
    out
}

pub fn conv3x3_forward(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Tensor {
    let cout = weight.shape()[0];
    debug_assert_eq!(weight.shape(), [cout, x.shape()[0], 9]);
    correlate(x, weight.data(), cout, Some(bias.data()))
}

pub struct ConvGrads {
    pub input: Option<Tensor>,
    pub weight: Option<Tensor>,
    pub bias: Option<Tensor>,
}

pub fn conv3x3_backward(
    x: &Tensor,
    weight: &Tensor,
    grad_out: &Tensor,
    need_input: bool,
    need_params: bool,
) -> ConvGrads {
    let [cin, h, w] = x.shape();
    let cout = weight.shape()[0];
    let wd = weight.data();

    let mut grads = ConvGrads {
        input: None,
        weight: None,
        bias: None,
    };

    if need_params {
        // gW_k = G · X_kᵀ on the padded-width grid, garbage columns of G zeroed
        let (ph, pw) = (h + 2, w + 2);
        let wide = h * pw;
        let padded = pad_circular(x);
        let mut g_wide = vec![0.0; cout * wide];
        for co in 0..cout {
            let src = grad_out.plane(co);
            for r in 0..h {
                g_wide[co * wide + r * pw..co * wide + r * pw + w].copy_from_slice(&src[r * w..(r + 1) * w]);
            }
        }
        let mut gw = vec![0.0; cout * cin * 9];
        for k in 0..9 {
            let (ky, kx) = (k / 3, k % 3);
            gemm_acc(
                cout,
                wide,
                cin,
                &g_wide,
                View { offset: 0, rs: wide, cs: 1 },
                &padded,
                View { offset: ky * pw + kx, rs: 1, cs: ph * pw },
                &mut gw,
                View { offset: k, rs: cin * 9, cs: 9 },
            );
        }
        let gb = (0..cout).map(|co| grad_out.plane(co).iter().sum()).collect();
        grads.weight = Some(Tensor::from_vec([cout, cin, 9], gw).expect("weight shape"));
        grads.bias = Some(Tensor::from_vec([cout, 1, 1], gb).expect("bias shape"));
    }

    if need_input {
        // adjoint of a circular correlation: correlate with the flipped,
        // transposed kernel
        let mut flipped = vec![0.0; cin * cout * 9];
        for co in 0..cout {
            for ci in 0..cin {
                for k in 0..9 {
                    flipped[(ci * cout + co) * 9 + (8 - k)] = wd[(co * cin + ci) * 9 + k];
                }
            }
        }
        grads.input = Some(correlate(grad_out, &flipped, cin, None));
    }
    grads
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(rng: &mut ChaCha8Rng, shape: [usize; 3]) -> Tensor {
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    // direct evaluation of the circular convolution sum
    fn naive(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Tensor {
        let [cin, h, w] = x.shape();
        let cout = weight.shape()[0];
        let mut out = Tensor::zeros([cout, h, w]);
        for co in 0..cout {
            for r in 0..h {
                for c in 0..w {
                    let mut s = bias.data()[co];
                    for ci in 0..cin {
                        for ky in 0..3 {
                            for kx in 0..3 {
                                let rr = (r + h + ky - 1) % h;
                                let cc = (c + w + kx - 1) % w;
                                s += weight.data()[(co * cin + ci) * 9 + ky * 3 + kx]
                                    * x.plane(ci)[rr * w + cc];
                            }
                        }
                    }
                    out.plane_mut(co)[r * w + c] = s;
                }
            }
        }
        out
    }

    #[test]
    fn matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = rand_tensor(&mut rng, [3, 5, 7]);
        let wt = rand_tensor(&mut rng, [4, 3, 9]);
        let b = rand_tensor(&mut rng, [4, 1, 1]);
        let fast = conv3x3_forward(&x, &wt, &b);
        let slow = naive(&x, &wt, &b);
        for (a, b) in fast.data().iter().zip(slow.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_is_the_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = rand_tensor(&mut rng, [2, 6, 4]);
        let wt = rand_tensor(&mut rng, [3, 2, 9]);
        let zero_b = Tensor::zeros([3, 1, 1]);
        let g = rand_tensor(&mut rng, [3, 6, 4]);
        let y = conv3x3_forward(&x, &wt, &zero_b);
        let grads = conv3x3_backward(&x, &wt, &g, true, true);
        // <conv(x), g> = <x, conv^T g> = <w, dconv/dw^T g>
        let lhs: f64 = y.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
        let via_x: f64 = x.data().iter().zip(grads.input.unwrap().data()).map(|(a, b)| a * b).sum();
        let via_w: f64 = wt.data().iter().zip(grads.weight.unwrap().data()).map(|(a, b)| a * b).sum();
        assert!((lhs - via_x).abs() < 1e-10);
        assert!((lhs - via_w).abs() < 1e-10);
        let gb = grads.bias.unwrap();
        for co in 0..3 {
            assert!((gb.data()[co] - g.plane(co).iter().sum::<f64>()).abs() < 1e-12);
        }
    }
}
