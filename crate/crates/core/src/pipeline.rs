//! The unrolled alternating solver: per stage, edge recovery (ERN), the
//! closed-form edge update, image denoising (IDN) and one gradient step on
//! the image. Everything is recorded on a [`Tape`] so the same code path
//! serves inference and training.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{Dataset, Sample};
use crate::edge::{init_nonedge_map, NonEdgeMap};
use crate::error::{Error, Result};
use crate::mri::{zero_filled_init, CoilSystem};
use crate::numerics::ComplexImage;
use crate::prox::checkpoint::{read_weights, write_weights, WeightArray};
use crate::prox::{positive_param, raw_for_positive, ParamKey, ProxKind, ProximalModule, Tape, Tensor, TensorSet, Var};
use crate::wavelet::SUBBANDS;

/// Default stage count.
pub const DEFAULT_STAGES: usize = 7;
pub const DEFAULT_GAMMA1: f64 = 1.0;
pub const DEFAULT_GAMMA2: f64 = 0.1;
pub const DEFAULT_LR: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Shared,
    NonShared,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Shared => "shared",
            Strategy::NonShared => "non-shared",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(Strategy::Shared),
            "non-shared" | "nonshared" => Ok(Strategy::NonShared),
            other => Err(Error::InvalidParameter(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Whether the edge variables take part in the alternation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeMode {
    Joint,
    /// Data consistency and IDN only; ERN, α and ρ are ignored.
    Disabled,
}

/// Which realization a proximal slot uses when a plan is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProxChoice {
    Identity,
    Shrinkage(f64),
    TinyCnn,
}

impl FromStr for ProxChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "off" => Ok(ProxChoice::Identity),
            "tiny-cnn" | "cnn" | "on" => Ok(ProxChoice::TinyCnn),
            other => match other.strip_prefix("shrinkage:") {
                Some(t) => t
                    .parse::<f64>()
                    .map(ProxChoice::Shrinkage)
                    .map_err(|_| Error::InvalidParameter(format!("bad shrinkage threshold '{t}'"))),
                None => Err(Error::InvalidParameter(format!("unknown prox kind '{other}'"))),
            },
        }
    }
}

const RAW_NAMES: [&str; 4] = ["raw_rho", "raw_alpha", "raw_beta", "raw_s"];
const RHO: usize = 0;
const ALPHA: usize = 1;
const BETA: usize = 2;
const STEP: usize = 3;

/// Mapped stage hyperparameters. `alpha` is positive; the others may be
/// exactly zero (their raw value is then `-inf` and stays frozen).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageScalars {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
}

/// Detail coefficients of unit-range images are small (|Wx|² is of order
/// 1e-2 at edges), so a small α keeps the edge update responsive to the
/// current image instead of just passing V through.
impl Default for StageScalars {
    fn default() -> Self {
        Self {
            rho: 0.5,
            alpha: 0.01,
            beta: 0.5,
            s: 1.0,
        }
    }
}

/// One parameter block: raw scalars plus the ERN and IDN modules.
#[derive(Clone, Debug, PartialEq)]
pub struct StageParams {
    scalars: TensorSet,
    pub ern: ProximalModule,
    pub idn: ProximalModule,
}

impl StageParams {
    pub fn new(init: StageScalars, ern: ProximalModule, idn: ProximalModule) -> Result<Self> {
        let mut p = Self {
            scalars: TensorSet::new(),
            ern,
            idn,
        };
        for name in RAW_NAMES {
            p.scalars.insert(name, Tensor::scalar(0.0));
        }
        p.set_scalars(init)?;
        Ok(p)
    }

    pub fn raw(&self, which: usize) -> f64 {
        self.scalars.value(which).item()
    }

    pub fn raw_values(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.raw(i))
    }

    pub fn set_raw_values(&mut self, raw: [f64; 4]) {
        for (i, v) in raw.into_iter().enumerate() {
            self.scalars.entries_mut()[i].value.data_mut()[0] = v;
        }
    }

    pub fn scalars(&self) -> StageScalars {
        StageScalars {
            rho: positive_param(self.raw(RHO)),
            alpha: positive_param(self.raw(ALPHA)),
            beta: positive_param(self.raw(BETA)),
            s: positive_param(self.raw(STEP)),
        }
    }

    pub fn set_scalars(&mut self, v: StageScalars) -> Result<()> {
        if !(v.alpha > 0.0 && v.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", v.alpha)));
        }
        for (name, x) in [("rho", v.rho), ("beta", v.beta), ("s", v.s)] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {x}")));
            }
        }
        self.set_raw_values([
            raw_for_positive(v.rho),
            raw_for_positive(v.alpha),
            raw_for_positive(v.beta),
            raw_for_positive(v.s),
        ]);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PlanConfig {
    pub stages: usize,
    pub strategy: Strategy,
    pub ern: ProxChoice,
    pub idn: ProxChoice,
    pub init: StageScalars,
    pub seed: u64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            stages: DEFAULT_STAGES,
            strategy: Strategy::NonShared,
            ern: ProxChoice::TinyCnn,
            idn: ProxChoice::TinyCnn,
            init: StageScalars::default(),
            seed: 0,
        }
    }
}

/// All trainables of a K-stage pipeline. Shared plans hold one block used
/// by every stage; non-shared plans hold K independent blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct StagePlan {
    stages: usize,
    strategy: Strategy,
    blocks: Vec<StageParams>,
}

fn make_module(choice: ProxChoice, channels: usize, seed: u64) -> Result<ProximalModule> {
    match choice {
        ProxChoice::Identity => Ok(ProximalModule::identity(channels)),
        ProxChoice::Shrinkage(t) => ProximalModule::shrinkage(channels, t),
        ProxChoice::TinyCnn => Ok(ProximalModule::tiny_cnn(channels, seed)),
    }
}

impl StagePlan {
    pub fn new(cfg: &PlanConfig) -> Result<Self> {
        let n_blocks = match cfg.strategy {
            Strategy::Shared => usize::from(cfg.stages > 0),
            Strategy::NonShared => cfg.stages,
        };
        let blocks = (0..n_blocks)
            .map(|b| {
                let base = cfg.seed.wrapping_mul(1_000_003).wrapping_add(2 * b as u64);
                StageParams::new(
                    cfg.init,
                    make_module(cfg.ern, SUBBANDS, base)?,
                    make_module(cfg.idn, 2, base + 1)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            stages: cfg.stages,
            strategy: cfg.strategy,
            blocks,
        })
    }

    /// Identity modules everywhere, fixed scalars.
    pub fn with_identity_modules(stages: usize, strategy: Strategy, init: StageScalars) -> Result<Self> {
        Self::new(&PlanConfig {
            stages,
            strategy,
            ern: ProxChoice::Identity,
            idn: ProxChoice::Identity,
            init,
            seed: 0,
        })
    }

    pub fn from_blocks(stages: usize, strategy: Strategy, blocks: Vec<StageParams>) -> Result<Self> {
        let expected = match strategy {
            Strategy::Shared => usize::from(stages > 0),
            Strategy::NonShared => stages,
        };
        if blocks.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "{strategy} plan with K = {stages} needs {expected} parameter blocks, got {}",
                blocks.len()
            )));
        }
        Ok(Self {
            stages,
            strategy,
            blocks,
        })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn blocks(&self) -> &[StageParams] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [StageParams] {
        &mut self.blocks
    }

    /// Parameter block used by stage `k` (0-based).
    pub fn block_index(&self, k: usize) -> usize {
        match self.strategy {
            Strategy::Shared => 0,
            Strategy::NonShared => k,
        }
    }

    pub fn stage(&self, k: usize) -> &StageParams {
        &self.blocks[self.block_index(k)]
    }

    /// Tensor sets are indexed `3b` (scalars), `3b + 1` (ERN), `3b + 2` (IDN).
    pub fn set_count(&self) -> usize {
        3 * self.blocks.len()
    }

    pub fn set(&self, idx: usize) -> Option<&TensorSet> {
        let block = self.blocks.get(idx / 3)?;
        match idx % 3 {
            0 => Some(&block.scalars),
            1 => block.ern.weights(),
            _ => block.idn.weights(),
        }
    }

    pub fn set_mut(&mut self, idx: usize) -> Option<&mut TensorSet> {
        let block = self.blocks.get_mut(idx / 3)?;
        match idx % 3 {
            0 => Some(&mut block.scalars),
            1 => block.ern.weights_mut(),
            _ => block.idn.weights_mut(),
        }
    }

    pub fn param_keys(&self) -> Vec<(ParamKey, usize)> {
        let mut keys = Vec::new();
        for s in 0..self.set_count() {
            if let Some(set) = self.set(s) {
                for (e, entry) in set.entries().iter().enumerate() {
                    keys.push((ParamKey { set: s, entry: e }, entry.value.len()));
                }
            }
        }
        keys
    }

    pub fn param(&self, key: ParamKey) -> &Tensor {
        self.set(key.set).expect("valid set").value(key.entry)
    }

    pub fn param_mut(&mut self, key: ParamKey) -> &mut Tensor {
        &mut self.set_mut(key.set).expect("valid set").entries_mut()[key.entry].value
    }

    pub fn parameter_count(&self) -> usize {
        self.param_keys().iter().map(|(_, n)| n).sum()
    }

    pub fn is_finite(&self) -> bool {
        (0..self.set_count()).all(|s| self.set(s).is_none_or(TensorSet::is_finite))
    }

    pub fn zero_grad(&mut self) {
        for s in 0..self.set_count() {
            if let Some(set) = self.set_mut(s) {
                set.zero_grad();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineState {
    pub x: ComplexImage,
    pub pne: NonEdgeMap,
    pub stage_index: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub final_state: PipelineState,
    /// States after initialization and after every stage (empty unless
    /// tracing was requested).
    pub trace: Vec<PipelineState>,
}

/// Handles into a recorded pipeline.
pub struct Recorded {
    pub x: Var,
    pub pne: Var,
    pub trace: Vec<(Var, Var)>,
}

struct Constants {
    sens: Vec<Var>,
    kspace: Vec<Var>,
    mask: Var,
}

fn record_constants(tape: &mut Tape, cs: &CoilSystem) -> Constants {
    let (h, w) = cs.shape();
    Constants {
        sens: cs.sens().iter().map(|s| tape.constant(Tensor::from_complex(s))).collect(),
        kspace: cs.kspace().iter().map(|y| tape.constant(Tensor::from_complex(y))).collect(),
        mask: tape.constant(Tensor::from_vec([1, h, w], cs.mask_weights().to_vec()).unwrap()),
    }
}

/// `Σ_i S_iᴴ Fᴴ Uᴴ (U F S_i x − y_i)` on the tape.
fn record_dc_gradient(tape: &mut Tape, x: Var, c: &Constants) -> Var {
    let mut acc: Option<Var> = None;
    for (&s, &y) in c.sens.iter().zip(&c.kspace) {
        let sx = tape.complex_mul(x, s, false);
        let k = tape.fft2c(sx);
        let uk = tape.mask(k, c.mask);
        let r = tape.sub(uk, y);
        let ur = tape.mask(r, c.mask);
        let img = tape.ifft2c(ur);
        let back = tape.complex_mul(img, s, true);
        acc = Some(match acc {
            Some(a) => tape.add(a, back),
            None => back,
        });
    }
    acc.expect("at least one coil")
}

fn record_scalar(tape: &mut Tape, block: &StageParams, which: usize, key: Option<ParamKey>) -> Var {
    let raw = Tensor::scalar(block.raw(which));
    let leaf = match key {
        Some(k) => tape.param(raw, k),
        None => tape.constant(raw),
    };
    tape.softplus(leaf)
}

/// Records the full K-stage pipeline. With `trainable`, every plan
/// parameter becomes a tape leaf keyed by its tensor-set index.
pub fn record_pipeline(
    tape: &mut Tape,
    cs: &CoilSystem,
    plan: &StagePlan,
    mode: EdgeMode,
    trainable: bool,
    keep_trace: bool,
) -> Result<Recorded> {
    let x0 = zero_filled_init(cs);
    let p0 = init_nonedge_map(&x0)?;
    let consts = record_constants(tape, cs);
    let mut x = tape.constant(Tensor::from_complex(&x0));
    let mut p = tape.constant(p0.to_tensor());
    let mut trace = Vec::new();
    if keep_trace {
        trace.push((x, p));
    }

    for k in 0..plan.stages() {
        let b = plan.block_index(k);
        let block = &plan.blocks[b];
        let key = |set: usize, entry: usize| trainable.then_some(ParamKey { set, entry });
        let set_of = |slot: usize| trainable.then_some(3 * b + slot);

        let beta = record_scalar(tape, block, BETA, key(3 * b, BETA));
        let step = record_scalar(tape, block, STEP, key(3 * b, STEP));

        let mut edge_term = None;
        if mode == EdgeMode::Joint {
            let rho = record_scalar(tape, block, RHO, key(3 * b, RHO));
            let alpha = record_scalar(tape, block, ALPHA, key(3 * b, ALPHA));
            let ern_out = block.ern.record(tape, p, set_of(1))?;
            let v = tape.clamp01(ern_out);
            let wx = tape.swt(x);
            p = tape.eo_update(v, wx, alpha, rho);
            let pw = tape.map_mul(wx, p);
            let ppw = tape.map_mul(pw, p);
            let reg = tape.swt_adjoint(ppw);
            edge_term = Some(tape.scale_by(reg, rho));
        }

        let z = block.idn.record(tape, x, set_of(2))?;
        let mut bracket = record_dc_gradient(tape, x, &consts);
        if let Some(e) = edge_term {
            bracket = tape.add(bracket, e);
        }
        let zx = tape.sub(z, x);
        let pull = tape.scale_by(zx, beta);
        bracket = tape.sub(bracket, pull);
        let delta = tape.scale_by(bracket, step);
        x = tape.sub(x, delta);
        if keep_trace {
            trace.push((x, p));
        }
    }
    Ok(Recorded { x, pne: p, trace })
}

fn state_from(tape: &Tape, x: Var, p: Var, stage_index: usize) -> Result<PipelineState> {
    Ok(PipelineState {
        x: tape.value(x).to_complex()?,
        pne: NonEdgeMap::from_tensor(tape.value(p))?,
        stage_index,
    })
}

fn run_mode(cs: &CoilSystem, plan: &StagePlan, mode: EdgeMode, keep_trace: bool) -> Result<PipelineOutput> {
    let mut tape = Tape::new();
    let rec = record_pipeline(&mut tape, cs, plan, mode, false, keep_trace)?;
    let trace = rec
        .trace
        .iter()
        .enumerate()
        .map(|(k, &(x, p))| state_from(&tape, x, p, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineOutput {
        final_state: state_from(&tape, rec.x, rec.pne, plan.stages())?,
        trace,
    })
}

/// Runs the joint edge/image alternation.
pub fn run_pipeline(cs: &CoilSystem, plan: &StagePlan, keep_trace: bool) -> Result<PipelineOutput> {
    run_mode(cs, plan, EdgeMode::Joint, keep_trace)
}

/// Runs the edge-free variant: IDN plus data-consistency steps only. The
/// returned map is the untouched initialization.
pub fn run_pipeline_noedge(cs: &CoilSystem, plan: &StagePlan) -> Result<PipelineState> {
    Ok(run_mode(cs, plan, EdgeMode::Disabled, false)?.final_state)
}

pub fn run_with_mode(cs: &CoilSystem, plan: &StagePlan, mode: EdgeMode) -> Result<PipelineState> {
    Ok(run_mode(cs, plan, mode, false)?.final_state)
}

/// `γ₁ · mean |x − x̂|² + γ₂ · mean |P − P̂|`
pub fn total_loss(
    final_state: &PipelineState,
    gt_x: &ComplexImage,
    gt_pne: &NonEdgeMap,
    gamma1: f64,
    gamma2: f64,
) -> Result<f64> {
    if !(gamma1 >= 0.0 && gamma2 >= 0.0) {
        return Err(Error::InvalidParameter("loss weights must be nonnegative".into()));
    }
    final_state.x.check_same_shape(gt_x)?;
    if final_state.pne.shape() != gt_pne.shape() {
        return Err(crate::error::shape_err(gt_pne.shape(), final_state.pne.shape()));
    }
    let (h, w) = gt_x.shape();
    let mse = final_state.x.sub(gt_x)?.norm_sqr() / (h * w) as f64;
    let mut l1 = 0.0;
    for (a, b) in final_state.pne.channels.iter().zip(&gt_pne.channels) {
        l1 += a.data().iter().zip(b.data()).map(|(u, v)| (u - v).abs()).sum::<f64>();
    }
    l1 /= (SUBBANDS * h * w) as f64;
    Ok(gamma1 * mse + gamma2 * l1)
}

#[derive(Clone, Copy, Debug)]
pub struct LossWeights {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            gamma1: DEFAULT_GAMMA1,
            gamma2: DEFAULT_GAMMA2,
        }
    }
}

/// Per-sample loss and parameter gradients (summed over shared leaves).
pub struct SampleGradient {
    pub loss: f64,
    pub grads: Vec<(ParamKey, Vec<f64>)>,
}

pub fn sample_gradient(
    sample: &Sample,
    gt_pne: &NonEdgeMap,
    plan: &StagePlan,
    mode: EdgeMode,
    weights: LossWeights,
) -> Result<SampleGradient> {
    let mut tape = Tape::new();
    let rec = record_pipeline(&mut tape, &sample.cs, plan, mode, true, false)?;
    let (h, w) = sample.gt.shape();
    let gt = tape.constant(Tensor::from_complex(&sample.gt));
    let gp = tape.constant(gt_pne.to_tensor());
    let mse = tape.squared_error(rec.x, gt, (h * w) as f64);
    let l1 = tape.abs_error(rec.pne, gp, (SUBBANDS * h * w) as f64);
    let a = tape.scale_const(mse, weights.gamma1);
    let b = tape.scale_const(l1, weights.gamma2);
    let loss = tape.add(a, b);
    let loss_value = tape.value(loss).item();
    let g = tape.backward(loss, None);

    let mut grads: Vec<(ParamKey, Vec<f64>)> = Vec::new();
    for (key, gv) in g.params() {
        match grads.iter_mut().find(|(k, _)| *k == key) {
            Some((_, acc)) => acc.iter_mut().zip(gv).for_each(|(a, b)| *a += b),
            None => grads.push((key, gv.to_vec())),
        }
    }
    grads.sort_by_key(|(k, _)| *k);
    Ok(SampleGradient {
        loss: loss_value,
        grads,
    })
}

/// Loss of one sample for a given plan, evaluated without gradients.
pub fn sample_loss(
    sample: &Sample,
    gt_pne: &NonEdgeMap,
    plan: &StagePlan,
    mode: EdgeMode,
    weights: LossWeights,
) -> Result<f64> {
    let out = run_with_mode(&sample.cs, plan, mode)?;
    total_loss(&out, &sample.gt, gt_pne, weights.gamma1, weights.gamma2)
}

/// Cosine decay `lr0 · ½(1 + cos(π e / E))`.
pub fn cosine_lr(lr0: f64, epoch: usize, epochs: usize) -> f64 {
    if epochs == 0 {
        return lr0;
    }
    lr0 * 0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / epochs as f64).cos())
}

/// Adam with per-array first/second moments.
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    moments: Vec<(ParamKey, Vec<f64>, Vec<f64>)>,
}

impl Adam {
    pub fn new(plan: &StagePlan) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            moments: plan
                .param_keys()
                .into_iter()
                .map(|(k, n)| (k, vec![0.0; n], vec![0.0; n]))
                .collect(),
        }
    }

    /// Applies one update from the gradient slots held in `plan`.
    pub fn step(&mut self, plan: &mut StagePlan, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (key, m, v) in self.moments.iter_mut() {
            let set = plan.set_mut(key.set).expect("plan layout is fixed");
            let entry = &mut set.entries_mut()[key.entry];
            for i in 0..m.len() {
                let g = entry.grad[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                entry.value.data_mut()[i] -= lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub weights: LossWeights,
    pub seed: u64,
    pub mode: EdgeMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 180,
            batch_size: 2,
            lr0: DEFAULT_LR,
            weights: LossWeights::default(),
            seed: 0,
            mode: EdgeMode::Joint,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub loss: f64,
}

/// Mini-batch Adam with cosine learning-rate decay. Sample gradients in a
/// batch are computed independently and then summed in sample order, so
/// results do not depend on the thread count.
pub fn train(dataset: &Dataset, plan: &mut StagePlan, cfg: &TrainConfig) -> Result<Vec<EpochRecord>> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("training set is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be >= 1".into()));
    }
    let targets: Vec<NonEdgeMap> = dataset
        .samples
        .iter()
        .map(|s| init_nonedge_map(&s.gt))
        .collect::<Result<_>>()?;
    let mut adam = Adam::new(plan);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(cfg.lr0, epoch, cfg.epochs);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let results: Vec<Result<SampleGradient>> = batch
                .par_iter()
                .map(|&i| sample_gradient(&dataset.samples[i], &targets[i], plan, cfg.mode, cfg.weights))
                .collect();
            plan.zero_grad();
            let scale = 1.0 / batch.len() as f64;
            for r in results {
                let sg = r?;
                if !sg.loss.is_finite() {
                    return Err(Error::Numeric(format!(
                        "loss became {} at epoch {epoch}; stage scalars: {}",
                        sg.loss,
                        describe_scalars(plan)
                    )));
                }
                epoch_loss += sg.loss;
                for (key, g) in sg.grads {
                    let scaled: Vec<f64> = g.iter().map(|v| v * scale).collect();
                    plan.set_mut(key.set).expect("key from this plan").accumulate_grad(key.entry, &scaled);
                }
            }
            adam.step(plan, lr);
            if !plan.is_finite() {
                return Err(Error::Numeric(format!(
                    "parameters became non-finite at epoch {epoch}; stage scalars: {}",
                    describe_scalars(plan)
                )));
            }
        }
        history.push(EpochRecord {
            epoch,
            lr,
            loss: epoch_loss / dataset.len() as f64,
        });
    }
    Ok(history)
}

fn describe_scalars(plan: &StagePlan) -> String {
    plan.blocks()
        .iter()
        .enumerate()
        .map(|(b, p)| {
            let s = p.scalars();
            format!("[{b}: rho={:.4e} alpha={:.4e} beta={:.4e} s={:.4e}]", s.rho, s.alpha, s.beta, s.s)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn kind_code(m: &ProximalModule) -> u8 {
    match m.kind() {
        ProxKind::Identity => 0,
        ProxKind::Shrinkage { .. } => 1,
        ProxKind::TinyCnn(_) => 2,
    }
}

fn module_arrays(prefix: &str, m: &ProximalModule, out: &mut Vec<WeightArray>) {
    match m.kind() {
        ProxKind::Identity => {}
        ProxKind::Shrinkage { threshold } => out.push(WeightArray {
            name: format!("{prefix}.threshold"),
            dims: vec![1],
            data: vec![*threshold],
        }),
        ProxKind::TinyCnn(set) => {
            for e in set.entries() {
                let [a, b, c] = e.value.shape();
                let dims = if c == 9 { vec![a, b, 3, 3] } else { vec![a] };
                out.push(WeightArray {
                    name: format!("{prefix}.{}", e.name),
                    dims,
                    data: e.value.data().to_vec(),
                });
            }
        }
    }
}

fn module_from_arrays(code: u8, prefix: &str, channels: usize, arrays: &[WeightArray]) -> Result<ProximalModule> {
    let find = |name: &str| arrays.iter().find(|a| a.name == format!("{prefix}.{name}"));
    match code {
        0 => Ok(ProximalModule::identity(channels)),
        1 => {
            let t = find("threshold").ok_or_else(|| Error::Format(format!("{prefix}.threshold missing")))?;
            ProximalModule::shrinkage(channels, t.data[0])
        }
        2 => {
            let mut set = TensorSet::new();
            for (wn, bn) in crate::prox::module::CONV_NAMES {
                for name in [wn, bn] {
                    let a = find(name).ok_or_else(|| Error::Format(format!("{prefix}.{name} missing")))?;
                    let shape = match a.dims.as_slice() {
                        [o, i, 3, 3] => [*o, *i, 9],
                        [o] => [*o, 1, 1],
                        other => return Err(Error::Format(format!("{prefix}.{name}: bad dims {other:?}"))),
                    };
                    set.insert(name, Tensor::from_vec(shape, a.data.clone())?);
                }
            }
            ProximalModule::from_weights(channels, set)
        }
        other => Err(Error::Format(format!("unknown module kind code {other}"))),
    }
}

impl StagePlan {
    /// Header `{K: u32, strategy: u8}`, then per parameter block the four
    /// raw scalars (ρ, α, β, s) as f64 and the ERN/IDN kind codes
    /// (0 identity, 1 shrinkage, 2 tiny-cnn) as u8, followed by a
    /// `JEOW0001` weight stream with arrays named `stage{b}.{ern|idn}.*`.
    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> Result<()> {
        let k = u32::try_from(self.stages).map_err(|_| Error::Format("K exceeds u32".into()))?;
        out.write_all(&k.to_le_bytes())?;
        out.write_all(&[match self.strategy {
            Strategy::Shared => 0,
            Strategy::NonShared => 1,
        }])?;
        let mut arrays = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            for v in block.raw_values() {
                out.write_all(&v.to_le_bytes())?;
            }
            out.write_all(&[kind_code(&block.ern), kind_code(&block.idn)])?;
            module_arrays(&format!("stage{b}.ern"), &block.ern, &mut arrays);
            module_arrays(&format!("stage{b}.idn"), &block.idn, &mut arrays);
        }
        write_weights(&mut out, &arrays)?;
        out.flush()?;
        Ok(())
    }

    pub fn checkpoint_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_checkpoint(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Self> {
        let mut k = [0u8; 4];
        input.read_exact(&mut k)?;
        let stages = u32::from_le_bytes(k) as usize;
        let mut s = [0u8; 1];
        input.read_exact(&mut s)?;
        let strategy = match s[0] {
            0 => Strategy::Shared,
            1 => Strategy::NonShared,
            other => return Err(Error::Format(format!("unknown strategy code {other}"))),
        };
        let n_blocks = match strategy {
            Strategy::Shared => usize::from(stages > 0),
            Strategy::NonShared => stages,
        };
        let mut headers = Vec::with_capacity(n_blocks);
        for _ in 0..n_blocks {
            let mut raw = [0.0; 4];
            for r in raw.iter_mut() {
                let mut b = [0u8; 8];
                input.read_exact(&mut b)?;
                *r = f64::from_le_bytes(b);
            }
            let mut kinds = [0u8; 2];
            input.read_exact(&mut kinds)?;
            headers.push((raw, kinds));
        }
        let arrays = read_weights(&mut input)?;
        let blocks = headers
            .into_iter()
            .enumerate()
            .map(|(b, (raw, kinds))| {
                let ern = module_from_arrays(kinds[0], &format!("stage{b}.ern"), SUBBANDS, &arrays)?;
                let idn = module_from_arrays(kinds[1], &format!("stage{b}.idn"), 2, &arrays)?;
                let mut p = StageParams::new(StageScalars::default(), ern, idn)?;
                p.set_raw_values(raw);
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(stages, strategy, blocks)
    }
}
