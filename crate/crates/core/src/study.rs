//! Train-and-evaluate runs for the ablation studies: edge vs. no-edge
//! across accelerations, the IDN/ERN on/off grid, and shared vs.
//! non-shared parameters.

use std::sync::Arc;

use crate::dataset::{generate, Acquisition, Dataset, DatasetSpec};
use crate::error::Result;
use crate::metrics::MetricReport;
use crate::mri::zero_filled_init;
use crate::pipeline::{
    run_with_mode, train, EdgeMode, EpochRecord, PlanConfig, ProxChoice, StagePlan, StageScalars, Strategy,
    TrainConfig,
};

/// Everything held fixed across the arms of a study.
#[derive(Clone, Debug)]
pub struct StudySetup {
    /// Synthetic data settings; with `base` set only the acquisition
    /// fields (scheme, ACS, noise, seed) are used.
    pub data: DatasetSpec,
    /// Existing dataset whose phantoms and coil maps are re-acquired at
    /// each arm's acceleration.
    pub base: Option<Arc<Dataset>>,
    pub n_train: usize,
    pub stages: usize,
    pub init: StageScalars,
    pub train: TrainConfig,
    pub plan_seed: u64,
}

impl StudySetup {
    /// 40 phantoms at 64×64, 4 coils, pointwise random mask at R = 4,
    /// 32/8 split, K = 5, 150 epochs.
    pub fn desk_scale() -> Self {
        let mut data = DatasetSpec::new(40, (64, 64), 4);
        data.seed = 1;
        Self {
            data,
            base: None,
            n_train: 32,
            stages: 5,
            init: StageScalars::default(),
            train: TrainConfig {
                epochs: 150,
                ..TrainConfig::default()
            },
            plan_seed: 7,
        }
    }
}

/// One trained configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Arm {
    pub method: String,
    pub acceleration: f64,
    pub mode: EdgeMode,
    pub strategy: Strategy,
    pub stages: usize,
    pub ern: ProxChoice,
    pub idn: ProxChoice,
}

impl Arm {
    /// The full joint-edge, non-shared TinyCNN pipeline at the setup's R and K.
    pub fn full(setup: &StudySetup) -> Self {
        Self {
            method: "joint-edge".into(),
            acceleration: setup.data.acceleration,
            mode: EdgeMode::Joint,
            strategy: Strategy::NonShared,
            stages: setup.stages,
            ern: ProxChoice::TinyCnn,
            idn: ProxChoice::TinyCnn,
        }
    }

    pub fn no_edge(setup: &StudySetup) -> Self {
        Self {
            method: "no-edge".into(),
            mode: EdgeMode::Disabled,
            ern: ProxChoice::Identity,
            ..Self::full(setup)
        }
    }

    pub fn at_acceleration(mut self, r: f64) -> Self {
        self.acceleration = r;
        self
    }

    /// Cache key covering every field that affects the result; the
    /// method label is left out so equal configurations share one run.
    pub fn key(&self) -> String {
        let Self { method: _, acceleration, mode, strategy, stages, ern, idn } = self;
        format!("{acceleration:?}/{mode:?}/{strategy:?}/{stages}/{ern:?}/{idn:?}")
    }
}

#[derive(Clone, Debug)]
pub struct ArmResult {
    pub arm: Arm,
    pub plan: StagePlan,
    pub history: Vec<EpochRecord>,
    pub per_sample: Vec<MetricReport>,
    pub mean: MetricReport,
    pub zero_filled: MetricReport,
}

/// Dataset of the setup with the arm's acceleration, split train/test.
pub fn arm_data(setup: &StudySetup, acceleration: f64) -> Result<(Dataset, Dataset)> {
    let mut spec = setup.data.clone();
    spec.acceleration = acceleration;
    let data = match &setup.base {
        Some(base) => base.reacquire(&Acquisition::from_spec(&spec), spec.seed)?,
        None => generate(&spec)?,
    };
    Ok(data.split(setup.n_train))
}

/// Per-sample metrics of the pipeline and of the zero-filled baseline.
pub fn evaluate(plan: &StagePlan, mode: EdgeMode, test: &Dataset) -> Result<(Vec<MetricReport>, Vec<MetricReport>)> {
    let mut recon = Vec::with_capacity(test.len());
    let mut zf = Vec::with_capacity(test.len());
    for s in &test.samples {
        let out = run_with_mode(&s.cs, plan, mode)?;
        recon.push(MetricReport::compute(&s.gt, &out.x)?);
        zf.push(MetricReport::compute(&s.gt, &zero_filled_init(&s.cs))?);
    }
    Ok((recon, zf))
}

pub fn build_plan(setup: &StudySetup, arm: &Arm) -> Result<StagePlan> {
    StagePlan::new(&PlanConfig {
        stages: arm.stages,
        strategy: arm.strategy,
        ern: arm.ern,
        idn: arm.idn,
        init: setup.init,
        seed: setup.plan_seed,
    })
}

pub fn run_arm(setup: &StudySetup, arm: &Arm) -> Result<ArmResult> {
    let (train_set, test_set) = arm_data(setup, arm.acceleration)?;
    let mut plan = build_plan(setup, arm)?;
    let cfg = TrainConfig {
        mode: arm.mode,
        ..setup.train.clone()
    };
    let history = train(&train_set, &mut plan, &cfg)?;
    let (per_sample, zf) = evaluate(&plan, arm.mode, &test_set)?;
    let mean = MetricReport::mean(&per_sample).expect("test set is non-empty");
    let zero_filled = MetricReport::mean(&zf).expect("test set is non-empty");
    Ok(ArmResult {
        arm: arm.clone(),
        plan,
        history,
        per_sample,
        mean,
        zero_filled,
    })
}

/// Joint-edge and no-edge arms at each acceleration.
pub fn edge_arms(setup: &StudySetup, accelerations: &[f64]) -> Vec<Arm> {
    accelerations
        .iter()
        .flat_map(|&r| [Arm::full(setup).at_acceleration(r), Arm::no_edge(setup).at_acceleration(r)])
        .collect()
}

/// The {IDN on/off} × {ERN on/off} grid; "off" is the identity module.
pub fn module_arms(setup: &StudySetup) -> Vec<Arm> {
    let grid = [
        ("neither", ProxChoice::Identity, ProxChoice::Identity),
        ("ern-only", ProxChoice::TinyCnn, ProxChoice::Identity),
        ("idn-only", ProxChoice::Identity, ProxChoice::TinyCnn),
        ("both", ProxChoice::TinyCnn, ProxChoice::TinyCnn),
    ];
    grid.into_iter()
        .map(|(name, ern, idn)| {
            Arm {
                method: name.into(),
                ern,
                idn,
                ..Arm::full(setup)
            }
        })
        .collect()
}

/// Shared and non-shared arms for each stage count.
pub fn strategy_arms(setup: &StudySetup, stage_counts: &[usize]) -> Vec<Arm> {
    stage_counts
        .iter()
        .flat_map(|&k| {
            let nonshared = Arm {
                method: "non-shared".into(),
                stages: k,
                ..Arm::full(setup)
            };
            let shared = Arm {
                method: "shared".into(),
                strategy: Strategy::Shared,
                ..nonshared.clone()
            };
            [shared, nonshared]
        })
        .collect()
}
