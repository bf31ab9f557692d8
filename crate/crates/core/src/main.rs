use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use bregman_core::cli::{execute, load_config, Format, Overrides};

/// Bregman projection experiments driven by a JSON configuration.
#[derive(Debug, Parser)]
#[command(name = "bregman", version)]
struct Args {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        output: args.output,
        format: args.format,
    };
    let start = Instant::now();
    let result = load_config(&args.config, &overrides).and_then(|cfg| execute(&cfg));
    match result {
        Ok((report, outcome)) => {
            eprintln!(
                "{} records, passed: {}, wall time {:.3}s",
                report.records.len(),
                report.passed(),
                start.elapsed().as_secs_f64()
            );
            ExitCode::from(outcome.code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
