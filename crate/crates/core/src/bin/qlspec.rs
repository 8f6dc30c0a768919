use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qlspec_core::cli::{run, RunOptions};
use qlspec_core::config::RunConfig;
use qlspec_core::Error;

/// Quantum-light spectroscopy runs driven by a TOML config.
#[derive(Parser, Debug)]
#[command(name = "qlspec", version, about)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for grid sweeps.
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", args.config.display())),
        other => other,
    })?;
    let opts = RunOptions { out_dir: args.out.clone(), threads: args.threads, verbose: args.verbose };
    let summary = run(&cfg, &text, &opts)?;
    println!("{}: {} rows -> {}", summary.command, summary.rows, summary.csv_path.display());
    for n in &summary.notes {
        println!("  {n}");
    }
    println!("manifest -> {}", summary.manifest_path.display());
    Ok(())
}
