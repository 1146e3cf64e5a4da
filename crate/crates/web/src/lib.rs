//! Browser demo: simulate an undersampled multi-coil acquisition, then run
//! the unrolled reconstruction with hand-set stage parameters and inspect
//! the non-edge probability map stage by stage.
//!
//! The modules are untrained here (identity ERN, optional wavelet
//! shrinkage IDN), so the demo shows the model-based half of the method.

use jeo_core::edge::init_nonedge_map;
use jeo_core::metrics::MetricReport;
use jeo_core::mri::{make_mask, make_sensitivities, synthesize_acquisition, zero_filled_init, CoilSystem, MaskScheme};
use jeo_core::numerics::ComplexImage;
use jeo_core::phantom::random_phantom;
use jeo_core::pipeline::{run_pipeline, run_pipeline_noedge, PlanConfig, ProxChoice, StagePlan, StageScalars, Strategy};
use wasm_bindgen::prelude::*;

fn js_err(e: jeo_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// A phantom and its simulated acquisition.
#[wasm_bindgen]
pub struct Scene {
    gt: ComplexImage,
    cs: CoilSystem,
}

/// Stage settings picked in the page.
#[wasm_bindgen]
#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub stages: usize,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub step: f64,
    /// Soft threshold of the wavelet-shrinkage IDN; 0 disables it.
    pub shrink: f64,
    pub edge: bool,
}

#[wasm_bindgen]
impl Settings {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Settings {
        Settings::default()
    }
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            stages: 10,
            rho: 0.5,
            alpha: 0.01,
            beta: 0.5,
            step: 1.0,
            shrink: 0.02,
            edge: true,
        }
    }
}

#[wasm_bindgen]
pub struct Reconstruction {
    image: Vec<f64>,
    maps: Vec<Vec<f64>>,
    report: MetricReport,
}

#[wasm_bindgen]
impl Reconstruction {
    /// `|x|` of the final stage, row-major.
    pub fn image(&self) -> Vec<f64> {
        self.image.clone()
    }

    /// Number of stored non-edge maps (initial map plus one per stage).
    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    /// Minimum over the three detail channels of the map after `stage`
    /// stages. Empty when edge optimization was off.
    pub fn nonedge(&self, stage: usize) -> Vec<f64> {
        self.maps.get(stage).cloned().unwrap_or_default()
    }

    pub fn psnr(&self) -> f64 {
        self.report.psnr_db
    }

    pub fn ssim(&self) -> f64 {
        self.report.ssim
    }
}

impl Scene {
    pub fn simulate(
        size: usize,
        coils: usize,
        acceleration: f64,
        scheme: &str,
        noise_std: f64,
        seed: u64,
    ) -> jeo_core::Result<Scene> {
        let scheme: MaskScheme = scheme.parse()?;
        let gt = random_phantom(size, size, seed, Default::default());
        let sens = make_sensitivities((size, size), coils, seed)?;
        let mask = make_mask(scheme, (size, size), acceleration, size / 16, seed)?;
        let cs = synthesize_acquisition(&gt, sens, mask, noise_std, seed)?;
        Ok(Scene { gt, cs })
    }

    pub fn run(&self, st: &Settings) -> jeo_core::Result<Reconstruction> {
        let plan = StagePlan::new(&PlanConfig {
            stages: st.stages,
            strategy: Strategy::Shared,
            ern: ProxChoice::Identity,
            idn: if st.shrink > 0.0 { ProxChoice::Shrinkage(st.shrink) } else { ProxChoice::Identity },
            init: StageScalars {
                rho: st.rho,
                alpha: st.alpha,
                beta: st.beta,
                s: st.step,
            },
            seed: 0,
        })?;
        let (x, maps) = if st.edge {
            let out = run_pipeline(&self.cs, &plan, true)?;
            let maps = out.trace.iter().map(|s| s.pne.min_channel().into_vec()).collect();
            (out.final_state.x, maps)
        } else {
            (run_pipeline_noedge(&self.cs, &plan)?.x, Vec::new())
        };
        Ok(Reconstruction {
            report: MetricReport::compute(&self.gt, &x)?,
            image: x.magnitude().into_vec(),
            maps,
        })
    }
}

#[wasm_bindgen]
impl Scene {
    /// `scheme` is `random`, `cartesian-random` or `cartesian-equidistant`.
    #[wasm_bindgen(constructor)]
    pub fn new(
        size: usize,
        coils: usize,
        acceleration: f64,
        scheme: &str,
        noise_std: f64,
        seed: u32,
    ) -> Result<Scene, JsError> {
        Scene::simulate(size, coils, acceleration, scheme, noise_std, u64::from(seed)).map_err(js_err)
    }

    pub fn size(&self) -> usize {
        self.gt.height()
    }

    pub fn ground_truth(&self) -> Vec<f64> {
        self.gt.magnitude().into_vec()
    }

    pub fn zero_filled(&self) -> Vec<f64> {
        zero_filled_init(&self.cs).magnitude().into_vec()
    }

    pub fn zero_filled_psnr(&self) -> Result<f64, JsError> {
        let r = MetricReport::compute(&self.gt, &zero_filled_init(&self.cs)).map_err(js_err)?;
        Ok(r.psnr_db)
    }

    /// Sampling pattern, 1 where k-space was acquired.
    pub fn mask(&self) -> Vec<u8> {
        self.cs.mask().pattern().to_vec()
    }

    pub fn sampled_fraction(&self) -> f64 {
        self.cs.mask().sampled_fraction()
    }

    /// Initial non-edge map of the zero-filled image (min over channels).
    pub fn initial_nonedge(&self) -> Result<Vec<f64>, JsError> {
        let p = init_nonedge_map(&zero_filled_init(&self.cs)).map_err(js_err)?;
        Ok(p.min_channel().into_vec())
    }

    pub fn reconstruct(&self, settings: &Settings) -> Result<Reconstruction, JsError> {
        self.run(settings).map_err(js_err)
    }
}
