//! Image half of the alternation: the denoising proximal step and the
//! single gradient step on the image subproblem.

use crate::edge::NonEdgeMap;
use crate::error::{shape_err, Error, Result};
use crate::mri::{dc_gradient, fidelity, CoilSystem};
use crate::numerics::ComplexImage;
use crate::prox::{ProximalModule, Tensor};
use crate::wavelet::{swt_detail, swt_detail_adjoint};

#[derive(Clone, Copy, Debug)]
pub struct ImageStepInputs<'a> {
    pub x: &'a ComplexImage,
    pub z: &'a ComplexImage,
    pub pne: &'a NonEdgeMap,
    pub cs: &'a CoilSystem,
    pub rho: f64,
    pub beta: f64,
    pub s: f64,
}

impl ImageStepInputs<'_> {
    fn validate(&self) -> Result<()> {
        let shape = self.cs.shape();
        for got in [self.x.shape(), self.z.shape(), self.pne.shape()] {
            if got != shape {
                return Err(shape_err(shape, got));
            }
        }
        if !(self.rho >= 0.0 && self.beta >= 0.0 && self.s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho, beta, s must be nonnegative (got {}, {}, {})",
                self.rho, self.beta, self.s
            )));
        }
        Ok(())
    }
}

/// `Z = IDN(x)` on the (re, im) encoding of `x`.
pub fn image_prox(x: &ComplexImage, idn: &ProximalModule) -> Result<ComplexImage> {
    let out = idn.forward(&Tensor::from_complex(x))?;
    let z = out.to_complex()?;
    x.check_same_shape(&z)?;
    Ok(z)
}

/// `Wᴴ (P² ⊙ W x)`, the gradient of `½‖P·Wx‖²`.
pub fn edge_regularizer_gradient(x: &ComplexImage, pne: &NonEdgeMap) -> Result<ComplexImage> {
    let mut d = swt_detail(x)?;
    for (band, p) in d.subbands.iter_mut().zip(&pne.channels) {
        for (z, &pv) in band.data_mut().iter_mut().zip(p.data()) {
            *z = *z * pv * pv;
        }
    }
    swt_detail_adjoint(&d)
}

fn bracket(
    x: &ComplexImage,
    z: &ComplexImage,
    edge: Option<(&NonEdgeMap, f64)>,
    cs: &CoilSystem,
    beta: f64,
) -> Result<ComplexImage> {
    let mut g = dc_gradient(x, cs)?;
    if let Some((pne, rho)) = edge {
        g.axpy(rho, &edge_regularizer_gradient(x, pne)?)?;
    }
    g.axpy(-beta, &z.sub(x)?)?;
    Ok(g)
}

/// Gradient of the image subproblem objective (see [`image_objective`])
/// with respect to (re, im).
pub fn image_gradient(inp: &ImageStepInputs) -> Result<ComplexImage> {
    inp.validate()?;
    let edge = (inp.rho != 0.0).then_some((inp.pne, inp.rho));
    bracket(inp.x, inp.z, edge, inp.cs, inp.beta)
}

/// One gradient step `x − s·∇`, where the objective is
/// `½Σ‖UFSᵢx − yᵢ‖² + ρ/2‖P·Wx‖² + β/2‖Z − x‖²`.
pub fn image_step(inp: &ImageStepInputs) -> Result<ComplexImage> {
    let g = image_gradient(inp)?;
    let mut out = inp.x.clone();
    out.axpy(-inp.s, &g)?;
    Ok(out)
}

/// The step without the edge co-regularizer (identical to `image_step`
/// with `ρ = 0`).
pub fn image_step_noedge(
    x: &ComplexImage,
    z: &ComplexImage,
    cs: &CoilSystem,
    beta: f64,
    s: f64,
) -> Result<ComplexImage> {
    let (h, w) = cs.shape();
    let pne = NonEdgeMap::filled(h, w, 0.0);
    image_step(&ImageStepInputs {
        x,
        z,
        pne: &pne,
        cs,
        rho: 0.0,
        beta,
        s,
    })
}

pub fn image_objective(inp: &ImageStepInputs) -> Result<f64> {
    inp.validate()?;
    let data = fidelity(inp.x, inp.cs)?;
    let d = swt_detail(inp.x)?;
    let mut edge = 0.0;
    for (band, p) in d.subbands.iter().zip(&inp.pne.channels) {
        for (z, &pv) in band.data().iter().zip(p.data()) {
            edge += pv * pv * z.norm_sqr();
        }
    }
    let prox = inp.z.sub(inp.x)?.norm_sqr();
    Ok(data + 0.5 * inp.rho * edge + 0.5 * inp.beta * prox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mri::{make_mask, make_sensitivities, synthesize_acquisition, MaskScheme, SamplingMask};
    use crate::numerics::{dot_re, ifft2c};
    use crate::testutil::{random_complex, random_real, rel_err};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Instance {
        x: ComplexImage,
        z: ComplexImage,
        pne: NonEdgeMap,
        cs: CoilSystem,
    }

    fn instance(seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = random_complex(&mut rng, 8, 8);
        let mask = make_mask(MaskScheme::RandomPointwise, (8, 8), 2.0, 0, seed).unwrap();
        let sens = make_sensitivities((8, 8), 2, seed).unwrap();
        let cs = synthesize_acquisition(&gt, sens, mask, 0.1, seed).unwrap();
        Instance {
            x: random_complex(&mut rng, 8, 8),
            z: random_complex(&mut rng, 8, 8),
            pne: NonEdgeMap {
                channels: std::array::from_fn(|_| random_real(&mut rng, 8, 8, 0.0, 1.0)),
            },
            cs,
        }
    }

    fn inputs(i: &Instance, rho: f64, beta: f64, s: f64) -> ImageStepInputs<'_> {
        ImageStepInputs {
            x: &i.x,
            z: &i.z,
            pne: &i.pne,
            cs: &i.cs,
            rho,
            beta,
            s,
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let i = instance(1);
        assert_eq!(image_step(&inputs(&i, 0.7, 0.3, 0.0)).unwrap(), i.x);
        assert_eq!(image_step_noedge(&i.x, &i.z, &i.cs, 0.3, 0.0).unwrap(), i.x);
    }

    #[test]
    fn consistent_single_coil_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gt = random_complex(&mut rng, 8, 8);
        let sens = make_sensitivities((8, 8), 1, 0).unwrap();
        let cs = synthesize_acquisition(&gt, sens, SamplingMask::full(8, 8), 0.0, 0).unwrap();
        let x = ifft2c(&cs.kspace()[0]);
        let z = random_complex(&mut rng, 8, 8);
        let pne = NonEdgeMap::filled(8, 8, 1.0);
        let inp = ImageStepInputs { x: &x, z: &z, pne: &pne, cs: &cs, rho: 0.0, beta: 0.0, s: 1.0 };
        assert!(image_gradient(&inp).unwrap().norm() < 1e-12);
        assert!(image_step(&inp).unwrap().sub(&x).unwrap().norm() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let i = instance(3);
        let inp = inputs(&i, 1.7, 0.6, 1.0);
        let g = image_gradient(&inp).unwrap();
        let h = 1e-5;
        for p in 0..64 {
            for imag in [false, true] {
                let unit = if imag { Complex64::new(0.0, h) } else { Complex64::new(h, 0.0) };
                let mut xp = i.x.clone();
                xp.data_mut()[p] += unit;
                let mut xm = i.x.clone();
                xm.data_mut()[p] -= unit;
                let fp = image_objective(&ImageStepInputs { x: &xp, ..inp }).unwrap();
                let fm = image_objective(&ImageStepInputs { x: &xm, ..inp }).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                let an = if imag { g.data()[p].im } else { g.data()[p].re };
                assert!(rel_err(fd, an, 1e-2) < 1e-6, "pixel {p}: fd {fd} analytic {an}");
            }
        }
    }

    #[test]
    fn noedge_matches_rho_zero_bitwise_and_fd() {
        for seed in 0..10 {
            let i = instance(seed);
            let a = image_step(&inputs(&i, 0.0, 0.4, 0.8)).unwrap();
            let b = image_step_noedge(&i.x, &i.z, &i.cs, 0.4, 0.8).unwrap();
            assert_eq!(a, b);
        }
        // smooth part of the no-edge model: fidelity + β/2‖Z − x‖²
        let i = instance(4);
        let beta = 0.9;
        let g = image_step_noedge(&i.x, &i.z, &i.cs, beta, 1.0).unwrap();
        let g = i.x.sub(&g).unwrap();
        let f = |x: &ComplexImage| fidelity(x, &i.cs).unwrap() + 0.5 * beta * i.z.sub(x).unwrap().norm_sqr();
        let h = 1e-5;
        for p in [0usize, 13, 40] {
            let mut xp = i.x.clone();
            xp.data_mut()[p] += Complex64::new(h, 0.0);
            let mut xm = i.x.clone();
            xm.data_mut()[p] -= Complex64::new(h, 0.0);
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            assert!(rel_err(fd, g.data()[p].re, 1e-2) < 1e-6);
        }
    }

    #[test]
    fn small_steps_descend() {
        for seed in 0..20 {
            let i = instance(100 + seed);
            let inp = inputs(&i, 1.3, 0.5, 1e-3);
            let before = image_objective(&inp).unwrap();
            let next = image_step(&inp).unwrap();
            let after = image_objective(&ImageStepInputs { x: &next, ..inp }).unwrap();
            assert!(after <= before);
        }
    }

    #[test]
    fn larger_rho_smooths_more() {
        for seed in 0..10 {
            let i = instance(200 + seed);
            let ones = NonEdgeMap::filled(8, 8, 1.0);
            let detail_norm = |rho: f64| {
                let inp = ImageStepInputs { pne: &ones, ..inputs(&i, rho, 0.5, 0.05) };
                swt_detail(&image_step(&inp).unwrap()).unwrap().norm_sqr()
            };
            assert!(detail_norm(10.0) < detail_norm(0.0));
        }
    }

    #[test]
    fn step_is_affine_in_x() {
        // with y, Z fixed the step is affine; the difference of two steps is linear
        let i = instance(9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x2 = random_complex(&mut rng, 8, 8);
        let step = |x: &ComplexImage| image_step(&ImageStepInputs { x, ..inputs(&i, 0.8, 0.3, 0.7) }).unwrap();
        let (a, b) = (1.7, -0.4);
        let combo = i.x.scale(a).add(&x2.scale(b)).unwrap();
        let lhs = step(&combo);
        let base = step(&ComplexImage::zeros(8, 8));
        let rhs = step(&i.x)
            .sub(&base)
            .unwrap()
            .scale(a)
            .add(&step(&x2).sub(&base).unwrap().scale(b))
            .unwrap()
            .add(&base)
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-10);
        assert!(dot_re(&lhs, &lhs).unwrap().is_finite());
    }

    #[test]
    fn image_prox_identity() {
        let i = instance(5);
        assert_eq!(image_prox(&i.x, &ProximalModule::tiny_cnn(2, 4)).unwrap(), i.x);
        assert!(image_prox(&i.x, &ProximalModule::identity(3)).is_err());
    }
}
