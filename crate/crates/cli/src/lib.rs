//! Batch runner for the frachs experiments: TOML configuration in, JSON
//! report and CSV data series out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{Experiment, ExperimentConfig, SCHEMA_VERSION};
pub use error::CliError;
pub use report::{Check, Report, Table};

/// Result of [`run_config`]: the report and the files written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// 0 when every check passed, 4 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.report.passed {
            0
        } else {
            4
        }
    }
}

/// Runs the experiment described by `cfg`. `seed` and `out` override the
/// config values; the default output directory is `frachs-out`.
pub fn run_config(cfg: &ExperimentConfig, seed: Option<u64>, out: Option<&Path>) -> Result<RunOutcome, CliError> {
    let seed = seed.unwrap_or(cfg.seed);
    let report = experiments::run(cfg, seed)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("frachs-out"));
    let files = report.write(&dir, cfg.output.csv)?;
    Ok(RunOutcome { report, files })
}
