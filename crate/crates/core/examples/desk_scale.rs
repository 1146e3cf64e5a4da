//! Trains one desk-scale arm and prints test metrics.
//!
//! `desk_scale [noedge] [rho=V] [alpha=V] [beta=V] [s=V] [R=V] [epochs=N]`

use std::time::Instant;

use jeo_core::study::{run_arm, Arm, StudySetup};

fn main() -> jeo_core::Result<()> {
    let mut setup = StudySetup::desk_scale();
    let mut noedge = false;
    let mut r = None;
    for arg in std::env::args().skip(1) {
        if arg == "noedge" {
            noedge = true;
            continue;
        }
        let (k, v) = arg.split_once('=').expect("expected key=value");
        let v: f64 = v.parse().expect("numeric value");
        match k {
            "rho" => setup.init.rho = v,
            "alpha" => setup.init.alpha = v,
            "beta" => setup.init.beta = v,
            "s" => setup.init.s = v,
            "R" => r = Some(v),
            "epochs" => setup.train.epochs = v as usize,
            _ => panic!("unknown key {k}"),
        }
    }
    let mut arm = if noedge { Arm::no_edge(&setup) } else { Arm::full(&setup) };
    if let Some(r) = r {
        arm = arm.at_acceleration(r);
    }
    println!("{arm:?} init {:?}", setup.init);
    let t = Instant::now();
    let res = run_arm(&setup, &arm)?;
    for e in res.history.iter().step_by(10) {
        println!("epoch {:3}  lr {:.5}  loss {:.6e}", e.epoch, e.lr, e.loss);
    }
    println!("zero-filled: {:.3} dB  ssim {:.4}", res.zero_filled.psnr_db, res.zero_filled.ssim);
    println!("{}: {:.3} dB  ssim {:.4}", arm.method, res.mean.psnr_db, res.mean.ssim);
    for (b, p) in res.plan.blocks().iter().enumerate() {
        println!("stage {b}: {:?}", p.scalars());
    }
    println!("elapsed {:.1?}", t.elapsed());
    Ok(())
}
