use std::process::ExitCode;

use clap::Parser;

use nkcomm::cli::{run, Cli};
use nkcomm::error::{Error, Result};

/// NKCOMM_THREADS caps the rayon pool; results never depend on it.
fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("NKCOMM_THREADS") else {
        return Ok(());
    };
    let threads: usize = v.trim().parse().ok().filter(|&t| t >= 1).ok_or_else(|| {
        Error::Parameter(format!(
            "NKCOMM_THREADS must be a positive integer (got '{v}')"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Internal(format!("thread pool init: {e}")))
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code().clamp(0, 255) as u8)
        }
    }
}
