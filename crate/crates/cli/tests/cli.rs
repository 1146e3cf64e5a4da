use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jeo_core::dataset::Dataset;
use jeo_core::pipeline::StagePlan;

fn jeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jeo-mri"))
        .args(args)
        .env("JEO_THREADS", "1")
        .output()
        .expect("spawn jeo-mri")
}

fn ok(args: &[&str]) {
    let out = jeo(args);
    assert!(
        out.status.success(),
        "jeo-mri {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn tiny_dataset(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec![
        "generate", "--out", p(&path), "--samples", "4", "--shape", "16x16", "--coils", "2", "--R", "2", "--seed",
        "5",
    ];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn generate_is_deterministic_and_echoes_config() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tiny_dataset(tmp.path(), "a.bin", &[]);
    let first = fs::read(&a).unwrap();
    let cfg = fs::read_to_string(tmp.path().join("a.bin.config.txt")).unwrap();
    ok(&[
        "generate", "--out", p(&a), "--samples", "4", "--shape", "16x16", "--coils", "2", "--R", "2", "--seed", "5",
    ]);
    assert_eq!(fs::read(&a).unwrap(), first);
    assert!(first.starts_with(b"JEOMRI01"));
    assert!(cfg.contains("jeo-mri"));
    assert!(cfg.contains("seed = 5"));
    assert!(cfg.contains("R = 2"));
}

#[test]
fn single_coil_dataset_has_unit_sensitivity() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tiny_dataset(tmp.path(), "one.bin", &["--coils", "1"]);
    let ds = Dataset::read_from(fs::File::open(path).unwrap()).unwrap();
    for s in &ds.samples {
        assert_eq!(s.cs.coils(), 1);
        assert!(s.cs.sens()[0].data().iter().all(|z| z.re == 1.0 && z.im == 0.0));
    }
}

#[test]
fn mask_fraction_tracks_acceleration() {
    let tmp = tempfile::tempdir().unwrap();
    for (scheme, r) in [("random", "4"), ("cartesian-random", "4"), ("cartesian-equidistant", "4"), ("random", "8")] {
        let path = tmp.path().join(format!("{scheme}_{r}.bin"));
        ok(&[
            "generate", "--out", p(&path), "--samples", "2", "--shape", "64x64", "--coils", "2", "--scheme", scheme,
            "--R", r, "--seed", "3",
        ]);
        let ds = Dataset::read_from(fs::File::open(&path).unwrap()).unwrap();
        let target = 1.0 / r.parse::<f64>().unwrap();
        for s in &ds.samples {
            let frac = s.cs.mask().sampled_fraction();
            assert!((frac - target).abs() <= 0.02, "{scheme} R={r}: fraction {frac}");
        }
    }
}

#[test]
fn train_writes_checkpoint_loss_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = tiny_dataset(tmp.path(), "ds.bin", &[]);
    for (strategy, k, blocks) in [("shared", "3", 1), ("non-shared", "5", 5)] {
        let out = tmp.path().join(strategy);
        ok(&[
            "train", "--dataset", p(&ds), "--out", p(&out), "--strategy", strategy, "--K", k, "--epochs", "2",
        ]);
        let plan = StagePlan::read_checkpoint(fs::File::open(out.join("checkpoint.bin")).unwrap()).unwrap();
        assert_eq!(plan.blocks().len(), blocks);
        let csv = fs::read_to_string(out.join("loss.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("epoch,lr,loss"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[1].parse::<f64>().unwrap(), 0.01);
        assert_eq!(csv.lines().count(), 3);
        let cfg = fs::read_to_string(out.join("config.txt")).unwrap();
        assert!(cfg.contains("lr0 = 0.01"));
        assert!(cfg.contains("gamma1 = 1"));
        assert!(cfg.contains("gamma2 = 0.1"));
        assert!(cfg.contains(&format!("strategy = {strategy}")));
        assert!(out.join("VERSION").exists());
    }
}

#[test]
fn train_rerun_gives_identical_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = tiny_dataset(tmp.path(), "ds.bin", &[]);
    let out = tmp.path().join("run");
    let args = ["train", "--dataset", p(&ds), "--out", p(&out), "--K", "2", "--epochs", "3", "--seed", "9"];
    ok(&args);
    let first = read_dir_bytes(&out);
    ok(&args);
    assert_eq!(read_dir_bytes(&out), first);
}

#[test]
fn reconstruct_writes_png_triples_and_zero_filled_row() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = tiny_dataset(tmp.path(), "ds.bin", &[]);
    let model = tmp.path().join("model");
    ok(&["train", "--dataset", p(&ds), "--out", p(&model), "--K", "2", "--epochs", "1"]);
    let rec = tmp.path().join("rec");
    ok(&[
        "reconstruct", "--dataset", p(&ds), "--checkpoint", p(&model.join("checkpoint.bin")), "--out", p(&rec),
        "--n_train", "2",
    ]);
    for idx in [2, 3] {
        for tag in ["recon", "error", "pne"] {
            let path = rec.join(format!("sample_{idx:04}_{tag}.png"));
            let bytes = fs::read(&path).unwrap();
            assert!(bytes.starts_with(b"\x89PNG"), "{path:?}");
        }
    }
    let pngs = read_dir_bytes(&rec).keys().filter(|k| k.ends_with(".png")).count();
    assert_eq!(pngs, 6);
    let csv = fs::read_to_string(rec.join("metrics.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "method,scheme,R,seed,psnr_db,ssim,mse");
    assert!(rows[1].starts_with("joint-edge,random,2,0,"));
    assert!(rows[2].starts_with("zero-filled,random,2,0,"));
    assert!(rec.join("config.txt").exists() && rec.join("VERSION").exists());
}

#[test]
fn full_mask_identity_pipeline_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = tmp.path().join("full.bin");
    ok(&[
        "generate", "--out", p(&ds), "--samples", "1", "--shape", "16x16", "--coils", "4", "--R", "1", "--noise_std",
        "0",
    ]);
    let model = tmp.path().join("model");
    ok(&[
        "train", "--dataset", p(&ds), "--out", p(&model), "--K", "1", "--epochs", "0", "--ern", "identity", "--idn",
        "identity", "--rho", "0", "--beta", "0", "--s", "1",
    ]);
    let rec = tmp.path().join("rec");
    ok(&["reconstruct", "--dataset", p(&ds), "--checkpoint", p(&model.join("checkpoint.bin")), "--out", p(&rec)]);
    let csv = fs::read_to_string(rec.join("metrics.csv")).unwrap();
    let method: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(method[4], "inf", "{csv}");
}

#[test]
fn ablate_emits_one_csv_per_study() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = tmp.path().join("ds.bin");
    ok(&[
        "generate", "--out", p(&ds), "--samples", "3", "--shape", "16x16", "--coils", "2", "--R", "2", "--acs", "2",
    ]);
    let out = tmp.path().join("ablate");
    ok(&[
        "ablate", "--dataset", p(&ds), "--out", p(&out), "--n_train", "2", "--K", "2", "--epochs", "1",
        "--stage_counts", "1,2",
    ]);
    let rows = |f: &str| fs::read_to_string(out.join(f)).unwrap().lines().count() - 1;
    assert_eq!(rows("edge.csv"), 10);
    assert_eq!(rows("modules.csv"), 4);
    assert_eq!(rows("strategy.csv"), 4);
    let summary = fs::read_to_string(out.join("summary.md")).unwrap();
    assert!(summary.contains("both"));
    assert!(out.join("config.txt").exists() && out.join("VERSION").exists());
}

#[test]
fn exit_codes_follow_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| jeo(args).status.code().unwrap();
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["generate", "--out", "x.bin", "--bogus", "1"]), 2);
    assert_eq!(code(&["generate", "--out", "x.bin", "--R", "fast"]), 2);
    assert_eq!(code(&["generate"]), 2);
    let missing = tmp.path().join("missing.bin");
    assert_eq!(code(&["train", "--dataset", p(&missing), "--out", p(&tmp.path().join("o"))]), 4);
    let cfg = tmp.path().join("nope.txt");
    assert_eq!(code(&["generate", "--config", p(&cfg)]), 4);

    // a learning rate this large drives the parameters to infinity
    let ds = tiny_dataset(tmp.path(), "ds.bin", &[]);
    let out = jeo(&[
        "train", "--dataset", p(&ds), "--out", p(&tmp.path().join("nan")), "--K", "2", "--epochs", "3", "--lr0",
        "1e300",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = Command::new(env!("CARGO_BIN_EXE_jeo-mri"))
        .args(["generate", "--out", p(&tmp.path().join("t.bin"))])
        .env("JEO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("gen.txt");
    let out = tmp.path().join("cfg.bin");
    fs::write(&cfg, format!("# tiny\nout = {}\nsamples = 2\nshape = 8x8\ncoils = 3\nseed = 1\n", p(&out))).unwrap();
    ok(&["generate", "--config", p(&cfg), "--coils", "2"]);
    let ds = Dataset::read_from(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(ds.len(), 2);
    assert_eq!(ds.samples[0].cs.coils(), 2);

    fs::write(&cfg, "samples = 2\nunknown_key = 3\n").unwrap();
    assert_eq!(jeo(&["generate", "--config", p(&cfg), "--out", p(&out)]).status.code(), Some(2));
}
