use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use inertial_sim::{run, Mode, RunConfig};

/// Inertial-solution simulator for the chirped two-level system.
#[derive(Parser, Debug)]
#[command(name = "inertial", version)]
struct Args {
    /// JSON run configuration.
    config: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Carry the geometric phase in the inertial solution.
    #[arg(long)]
    geometric: bool,
    /// Comma-separated δ/α₀ values, replacing `delta_list`.
    #[arg(long = "delta-over-alpha0", value_delimiter = ',', allow_hyphen_values = true)]
    delta_over_alpha0: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    match try_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> anyhow::Result<bool> {
    let args = Args::parse();
    let mut cfg = RunConfig::load(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    if args.geometric {
        cfg.include_geometric = true;
    }
    if let Some(list) = args.delta_over_alpha0 {
        cfg.delta_list = Some(list);
    }
    let summary = run(&cfg)?;
    for path in &summary.written {
        println!("wrote {}", path.display());
    }
    for f in &summary.failures {
        eprintln!("failed: {f}");
    }
    Ok(summary.ok())
}
