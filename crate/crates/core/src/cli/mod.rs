//! Command-line front end: configuration, execution and reports.

pub mod config;
pub mod report;
pub mod run;

use std::path::PathBuf;

pub use config::{Command, ExperimentConfig, Format};
pub use report::ExperimentReport;
pub use run::run;

use crate::error::{Error, Result};

/// Exit status: 0 when every assertion holds, 1 on an assertion failure
/// (the report is still written), 2 on configuration or domain errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    AssertionFailed,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Passed => 0,
            Outcome::AssertionFailed => 1,
        }
    }
}

/// Flags override the file: `seed`, `output`, `format`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn load_config(path: &std::path::Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(output) = &overrides.output {
        cfg.output = Some(output.clone());
    }
    if let Some(format) = overrides.format {
        cfg.format = format;
    }
    Ok(cfg)
}

/// Run and write the report to `cfg.output` (stdout when absent).
pub fn execute(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Outcome)> {
    let report = run(cfg)?;
    let text = report.render(cfg.format)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    let outcome = if report.passed() {
        Outcome::Passed
    } else {
        Outcome::AssertionFailed
    };
    Ok((report, outcome))
}
