//! `jeo-mri {generate|train|reconstruct|ablate} [--config FILE] [--key value ...]`

use std::process::ExitCode;

use jeo_mri::config::parse_args;
use jeo_mri::{commands, init_threads};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = init_threads().and_then(|()| {
        let (cmd, raw) = parse_args(&args)?;
        commands::run(cmd, &raw)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jeo-mri: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
