//! The four subcommands. Each resolves its whole configuration first, then
//! computes, then writes into its output location.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use jeo_core::dataset::{generate, Dataset, DatasetSpec};
use jeo_core::metrics::{csv_row, error_map, fmt_sig, MetricReport, CSV_HEADER};
use jeo_core::mri::{zero_filled_init, MaskScheme};
use jeo_core::pipeline::{
    run_with_mode, train, EdgeMode, LossWeights, PlanConfig, ProxChoice, StagePlan, StageScalars, Strategy,
    TrainConfig, DEFAULT_GAMMA1, DEFAULT_GAMMA2, DEFAULT_LR, DEFAULT_STAGES,
};
use jeo_core::study::{edge_arms, module_arms, run_arm, strategy_arms, Arm, ArmResult, StudySetup};

use crate::config::{Command, RawConfig, Resolver, Shape, Switch};
use crate::error::CliError;
use crate::png16::{to_u16, write_png16};

/// Full-scale value of the error-map PNGs (errors at or above it saturate).
pub const ERROR_MAP_SCALE: f64 = 0.25;
pub const CONFIG_FILE: &str = "config.txt";
pub const VERSION_FILE: &str = "VERSION";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

const GENERATE_KEYS: &[&str] = &["out", "samples", "shape", "coils", "scheme", "R", "acs", "noise_std", "seed"];
const TRAIN_KEYS: &[&str] = &[
    "dataset", "out", "n_train", "K", "strategy", "epochs", "batch", "lr0", "gamma1", "gamma2", "seed", "ern", "idn",
    "edge", "rho", "alpha", "beta", "s",
];
const RECONSTRUCT_KEYS: &[&str] = &["dataset", "checkpoint", "out", "n_train", "edge", "seed"];
const ABLATE_KEYS: &[&str] = &[
    "dataset", "out", "n_train", "K", "epochs", "batch", "lr0", "gamma1", "gamma2", "seed", "rho", "alpha", "beta",
    "s", "scheme", "acs", "noise_std", "data_seed", "studies", "accelerations", "stage_counts",
];

pub fn run(cmd: Command, raw: &RawConfig) -> Result<(), CliError> {
    match cmd {
        Command::Generate => cmd_generate(raw),
        Command::Train => cmd_train(raw),
        Command::Reconstruct => cmd_reconstruct(raw),
        Command::Ablate => cmd_ablate(raw),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_run_info(dir: &Path, res: &Resolver, cmd: Command) -> Result<(), CliError> {
    write_file(&dir.join(CONFIG_FILE), res.render(cmd).as_bytes())?;
    write_file(&dir.join(VERSION_FILE), format!("jeo-core {}\n", jeo_core::VERSION).as_bytes())
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Dataset::read_from(std::io::BufReader::new(f)).map_err(|e| match e {
        jeo_core::Error::Io(io) => CliError::io(path, io),
        jeo_core::Error::Format(m) => CliError::io(path, m),
        other => other.into(),
    })
}

fn read_checkpoint(path: &Path) -> Result<StagePlan, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    StagePlan::read_checkpoint(std::io::BufReader::new(f)).map_err(|e| match e {
        jeo_core::Error::Io(io) => CliError::io(path, io),
        jeo_core::Error::Format(m) => CliError::io(path, m),
        other => other.into(),
    })
}

fn default_n_train(n: usize) -> usize {
    (n * 4 / 5).max(1)
}

pub fn cmd_generate(raw: &RawConfig) -> Result<(), CliError> {
    raw.check_keys(GENERATE_KEYS)?;
    let mut res = raw.resolver();
    let out: PathBuf = res.required("out")?;
    let samples = res.get("samples", 40usize)?;
    let Shape(h, w) = res.get("shape", Shape(64, 64))?;
    let coils = res.get("coils", 4usize)?;
    let scheme = res.get("scheme", MaskScheme::RandomPointwise)?;
    let r = res.get("R", 4.0)?;
    let acs = res.get_or_else("acs", || w / 16)?;
    let noise_std = res.get("noise_std", 0.005)?;
    let seed = res.get("seed", 0u64)?;
    res.check(samples > 0, "samples must be >= 1")?;
    res.check(h >= 2 && w >= 2, "shape must be at least 2x2")?;
    res.check(coils > 0, "coils must be >= 1")?;
    res.check(r >= 1.0, "R must be >= 1")?;
    res.check(noise_std >= 0.0, "noise_std must be >= 0")?;

    let mut spec = DatasetSpec::new(samples, (h, w), coils);
    spec.scheme = scheme;
    spec.acceleration = r;
    spec.acs_lines = acs;
    spec.noise_std = noise_std;
    spec.seed = seed;
    let ds = generate(&spec)?;

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_file(&out, &ds.to_bytes())?;
    let mut info = out.clone().into_os_string();
    info.push(".config.txt");
    write_file(Path::new(&info), res.render(Command::Generate).as_bytes())
}

struct TrainSetup {
    out: PathBuf,
    n_train: usize,
    plan: PlanConfig,
    train: TrainConfig,
}

fn resolve_scalars(res: &mut Resolver) -> Result<StageScalars, CliError> {
    let d = StageScalars::default();
    let v = StageScalars {
        rho: res.get("rho", d.rho)?,
        alpha: res.get("alpha", d.alpha)?,
        beta: res.get("beta", d.beta)?,
        s: res.get("s", d.s)?,
    };
    res.check(v.alpha > 0.0, "alpha must be > 0")?;
    res.check(v.rho >= 0.0 && v.beta >= 0.0 && v.s >= 0.0, "rho, beta and s must be >= 0")?;
    Ok(v)
}

fn resolve_optimizer(res: &mut Resolver, default_epochs: usize) -> Result<(usize, usize, f64, LossWeights), CliError> {
    let epochs = res.get("epochs", default_epochs)?;
    let batch = res.get("batch", 2usize)?;
    let lr0 = res.get("lr0", DEFAULT_LR)?;
    let weights = LossWeights {
        gamma1: res.get("gamma1", DEFAULT_GAMMA1)?,
        gamma2: res.get("gamma2", DEFAULT_GAMMA2)?,
    };
    res.check(batch > 0, "batch must be >= 1")?;
    res.check(lr0 > 0.0, "lr0 must be > 0")?;
    res.check(weights.gamma1 >= 0.0 && weights.gamma2 >= 0.0, "gamma1 and gamma2 must be >= 0")?;
    Ok((epochs, batch, lr0, weights))
}

pub fn cmd_train(raw: &RawConfig) -> Result<(), CliError> {
    raw.check_keys(TRAIN_KEYS)?;
    let mut res = raw.resolver();
    let dataset_path: PathBuf = res.required("dataset")?;
    let out: PathBuf = res.required("out")?;
    let stages = res.get("K", DEFAULT_STAGES)?;
    let strategy = res.get("strategy", Strategy::NonShared)?;
    let (epochs, batch_size, lr0, weights) = resolve_optimizer(&mut res, 180)?;
    let seed = res.get("seed", 0u64)?;
    let ern = res.get("ern", ProxChoice::TinyCnn)?;
    let idn = res.get("idn", ProxChoice::TinyCnn)?;
    let edge = res.get("edge", Switch(true))?;
    let init = resolve_scalars(&mut res)?;
    let mode = if edge.0 { EdgeMode::Joint } else { EdgeMode::Disabled };
    let n_train_flag: Option<usize> = res.peek("n_train")?;
    let ds = read_dataset(&dataset_path)?;
    let n_train = res.get("n_train", n_train_flag.unwrap_or_else(|| default_n_train(ds.len())))?;
    res.check(n_train >= 1 && n_train <= ds.len(), format!("n_train must be in 1..={}", ds.len()))?;
    let setup = TrainSetup {
        out,
        n_train,
        plan: PlanConfig {
            stages,
            strategy,
            ern,
            idn,
            init,
            seed,
        },
        train: TrainConfig {
            epochs,
            batch_size,
            lr0,
            weights,
            seed,
            mode,
        },
    };

    let (train_set, _) = ds.split(setup.n_train);
    let mut plan = StagePlan::new(&setup.plan)?;
    let history = train(&train_set, &mut plan, &setup.train)?;

    create_dir(&setup.out)?;
    let ckpt = setup.out.join(CHECKPOINT_FILE);
    let f = fs::File::create(&ckpt).map_err(|e| CliError::io(&ckpt, e))?;
    plan.write_checkpoint(BufWriter::new(f)).map_err(|e| CliError::io(&ckpt, e))?;
    let mut csv = String::from("epoch,lr,loss\n");
    for e in &history {
        csv.push_str(&format!("{},{},{}\n", e.epoch, fmt_sig(e.lr), fmt_sig(e.loss)));
    }
    write_file(&setup.out.join("loss.csv"), csv.as_bytes())?;
    write_run_info(&setup.out, &res, Command::Train)
}

fn method_name(mode: EdgeMode) -> &'static str {
    match mode {
        EdgeMode::Joint => "joint-edge",
        EdgeMode::Disabled => "no-edge",
    }
}

pub fn cmd_reconstruct(raw: &RawConfig) -> Result<(), CliError> {
    raw.check_keys(RECONSTRUCT_KEYS)?;
    let mut res = raw.resolver();
    let dataset_path: PathBuf = res.required("dataset")?;
    let ckpt_path: PathBuf = res.required("checkpoint")?;
    let out: PathBuf = res.required("out")?;
    let mode = if res.get("edge", Switch(true))?.0 { EdgeMode::Joint } else { EdgeMode::Disabled };
    let seed = res.get("seed", 0u64)?;
    let n_train_flag: Option<usize> = res.peek("n_train")?;
    let ds = read_dataset(&dataset_path)?;
    let plan = read_checkpoint(&ckpt_path)?;
    let n_train = res.get(
        "n_train",
        n_train_flag.unwrap_or_else(|| if ds.len() > 1 { default_n_train(ds.len()) } else { 0 }),
    )?;
    res.check(n_train < ds.len(), format!("n_train must leave at least one test sample (< {})", ds.len()))?;

    let (_, test) = ds.split(n_train);

    let results = test
        .samples
        .par_iter()
        .map(|s| {
            let st = run_with_mode(&s.cs, &plan, mode)?;
            let zf = zero_filled_init(&s.cs);
            Ok((
                MetricReport::compute(&s.gt, &st.x)?,
                MetricReport::compute(&s.gt, &zf)?,
                st,
            ))
        })
        .collect::<Result<Vec<_>, jeo_core::Error>>()?;

    create_dir(&out)?;
    let mut per_sample = String::from("sample,method,psnr_db,ssim,mse\n");
    for (i, ((m, zf, st), s)) in results.iter().zip(&test.samples).enumerate() {
        let idx = n_train + i;
        let gt_mag = s.gt.magnitude();
        let mag = st.x.magnitude();
        let (h, w) = mag.shape();
        let images = [
            ("recon", to_u16(&mag, 1.0)),
            ("error", to_u16(&error_map(&mag, &gt_mag)?, ERROR_MAP_SCALE)),
            ("pne", to_u16(&st.pne.min_channel(), 1.0)),
        ];
        for (tag, px) in images {
            let path = out.join(format!("sample_{idx:04}_{tag}.png"));
            let f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            write_png16(BufWriter::new(f), w, h, &px).map_err(|e| CliError::io(&path, e))?;
        }
        for (name, r) in [(method_name(mode), m), ("zero-filled", zf)] {
            per_sample.push_str(&format!(
                "{idx},{name},{},{},{}\n",
                fmt_sig(r.psnr_db),
                fmt_sig(r.ssim),
                fmt_sig(r.mse)
            ));
        }
    }
    let mask = test.samples[0].cs.mask();
    let (scheme, r) = (mask.scheme().name(), mask.acceleration());
    let recon: Vec<MetricReport> = results.iter().map(|x| x.0).collect();
    let zf: Vec<MetricReport> = results.iter().map(|x| x.1).collect();
    let mut csv = format!("{CSV_HEADER}\n");
    csv.push_str(&csv_row(method_name(mode), scheme, r, seed, &MetricReport::mean(&recon).expect("non-empty")));
    csv.push('\n');
    csv.push_str(&csv_row("zero-filled", scheme, r, seed, &MetricReport::mean(&zf).expect("non-empty")));
    csv.push('\n');
    write_file(&out.join("metrics.csv"), csv.as_bytes())?;
    write_file(&out.join("per_sample.csv"), per_sample.as_bytes())?;
    write_file(
        &out.join("report.txt"),
        format!(
            "images: 16-bit grayscale PNG\nrecon: |x| on [0, 1]\nerror: |(|x| - |gt|)| on [0, {}]\npne: min over LH/HL/HH channels on [0, 1]\n",
            fmt_sig(ERROR_MAP_SCALE)
        )
        .as_bytes(),
    )?;
    write_run_info(&out, &res, Command::Reconstruct)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Study {
    Edge,
    Modules,
    Strategy,
}

fn parse_studies(list: &[String]) -> Result<Vec<Study>, CliError> {
    let mut out = Vec::new();
    for s in list {
        let st = match s.as_str() {
            "edge" => Study::Edge,
            "modules" => Study::Modules,
            "strategy" => Study::Strategy,
            other => {
                return Err(CliError::Config(format!(
                    "studies: unknown study '{other}' (expected edge, modules, strategy)"
                )))
            }
        };
        if !out.contains(&st) {
            out.push(st);
        }
    }
    Ok(out)
}

fn summary_table(title: &str, rows: &[(String, &ArmResult)], zf: bool) -> String {
    let mut t = format!("{title}\n\n| method | R | K | PSNR (dB) | SSIM |\n|---|---|---|---|---|\n");
    for (method, r) in rows {
        t.push_str(&format!(
            "| {} | {} | {} | {:.3} | {:.4} |\n",
            method,
            fmt_sig(r.arm.acceleration),
            r.arm.stages,
            r.mean.psnr_db,
            r.mean.ssim
        ));
    }
    if zf {
        let mut seen = Vec::new();
        for (_, r) in rows {
            if !seen.contains(&r.arm.acceleration.to_bits()) {
                seen.push(r.arm.acceleration.to_bits());
                t.push_str(&format!(
                    "| zero-filled | {} | - | {:.3} | {:.4} |\n",
                    fmt_sig(r.arm.acceleration),
                    r.zero_filled.psnr_db,
                    r.zero_filled.ssim
                ));
            }
        }
    }
    t
}

pub fn cmd_ablate(raw: &RawConfig) -> Result<(), CliError> {
    raw.check_keys(ABLATE_KEYS)?;
    let mut res = raw.resolver();
    let dataset_path: PathBuf = res.required("dataset")?;
    let out: PathBuf = res.required("out")?;
    let stages = res.get("K", 5usize)?;
    let (epochs, batch_size, lr0, weights) = resolve_optimizer(&mut res, 150)?;
    let seed = res.get("seed", 0u64)?;
    let init = resolve_scalars(&mut res)?;
    let noise_std = res.get("noise_std", 0.005)?;
    let data_seed = res.get("data_seed", 0u64)?;
    let studies = parse_studies(&res.get(
        "studies",
        vec!["edge".to_string(), "modules".to_string(), "strategy".to_string()],
    )?)?;
    let accelerations = res.get("accelerations", vec![2.0, 4.0, 6.0, 8.0, 10.0])?;
    let stage_counts = res.get("stage_counts", (1..=7).collect::<Vec<usize>>())?;
    res.check(accelerations.iter().all(|&r| r >= 1.0), "accelerations must be >= 1")?;
    res.check(!studies.is_empty(), "studies must name at least one study")?;
    let scheme_flag: Option<MaskScheme> = res.peek("scheme")?;
    let acs_flag: Option<usize> = res.peek("acs")?;
    let n_train_flag: Option<usize> = res.peek("n_train")?;

    let ds = read_dataset(&dataset_path)?;
    let scheme = res.get("scheme", scheme_flag.unwrap_or_else(|| ds.samples[0].cs.mask().scheme()))?;
    let acs = res.get("acs", acs_flag.unwrap_or(ds.width / 16))?;
    let n_train = res.get("n_train", n_train_flag.unwrap_or_else(|| default_n_train(ds.len())))?;
    res.check(
        n_train >= 1 && n_train < ds.len(),
        format!("n_train must be in 1..{} so both splits are non-empty", ds.len()),
    )?;

    let mut data = DatasetSpec::new(ds.len(), (ds.height, ds.width), ds.coils);
    data.scheme = scheme;
    data.acs_lines = acs;
    data.noise_std = noise_std;
    data.seed = data_seed;
    data.acceleration = accelerations.first().copied().unwrap_or(4.0);
    let setup = StudySetup {
        data,
        base: Some(Arc::new(ds)),
        n_train,
        stages,
        init,
        train: TrainConfig {
            epochs,
            batch_size,
            lr0,
            weights,
            seed,
            mode: EdgeMode::Joint,
        },
        plan_seed: seed,
    };

    let mut arms: Vec<(Study, Arm)> = Vec::new();
    for &study in &studies {
        let list = match study {
            Study::Edge => edge_arms(&setup, &accelerations),
            Study::Modules => module_arms(&setup),
            Study::Strategy => strategy_arms(&setup, &stage_counts),
        };
        arms.extend(list.into_iter().map(|a| (study, a)));
    }
    // identical configurations across studies are trained once
    let mut unique: Vec<&Arm> = Vec::new();
    for (_, a) in &arms {
        if !unique.iter().any(|u| u.key() == a.key()) {
            unique.push(a);
        }
    }
    let results = unique
        .par_iter()
        .map(|a| run_arm(&setup, a))
        .collect::<Result<Vec<_>, _>>()?;
    let find = |a: &Arm| results.iter().find(|r| r.arm.key() == a.key()).expect("every arm was run");

    create_dir(&out)?;
    let mut summary = String::new();
    for &study in &studies {
        let rows: Vec<(String, &ArmResult)> = arms
            .iter()
            .filter(|(s, _)| *s == study)
            .map(|(_, a)| {
                let label = match study {
                    Study::Strategy => format!("{}-K{}", a.method, a.stages),
                    _ => a.method.clone(),
                };
                (label, find(a))
            })
            .collect();
        let (file, title) = match study {
            Study::Edge => ("edge.csv", "Joint edge optimization vs. no edge"),
            Study::Modules => ("modules.csv", "IDN / ERN on-off grid"),
            Study::Strategy => ("strategy.csv", "Shared vs. non-shared parameters"),
        };
        let mut csv = format!("{CSV_HEADER}\n");
        for (method, r) in &rows {
            csv.push_str(&csv_row(method, scheme.name(), r.arm.acceleration, seed, &r.mean));
            csv.push('\n');
        }
        write_file(&out.join(file), csv.as_bytes())?;
        summary.push_str(&summary_table(title, &rows, study == Study::Edge));
        summary.push('\n');
    }
    write_file(&out.join("summary.md"), summary.as_bytes())?;
    write_run_info(&out, &res, Command::Ablate)
}
