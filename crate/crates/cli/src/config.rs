//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use frachs::geometry::ProfileKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FormInequality,
    NormIdentity,
    GreenKernels,
    Kelvin,
    HalfspaceMinimizer,
    Nonattainment,
    Pohozaev,
    Curvature,
    TrialSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::FormInequality,
        Experiment::NormIdentity,
        Experiment::GreenKernels,
        Experiment::Kelvin,
        Experiment::HalfspaceMinimizer,
        Experiment::Nonattainment,
        Experiment::Pohozaev,
        Experiment::Curvature,
        Experiment::TrialSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FormInequality => "form-inequality",
            Experiment::NormIdentity => "norm-identity",
            Experiment::GreenKernels => "green-kernels",
            Experiment::Kelvin => "kelvin",
            Experiment::HalfspaceMinimizer => "halfspace-minimizer",
            Experiment::Nonattainment => "nonattainment",
            Experiment::Pohozaev => "pohozaev",
            Experiment::Curvature => "curvature",
            Experiment::TrialSweep => "trial-sweep",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

/// `(n, s, σ)`; each experiment has its own default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n: usize,
    pub s: f64,
    pub sigma: f64,
}

/// Discretization settings. Fields not used by an experiment are ignored;
/// missing ones take the experiment default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution: Option<usize>,
    pub levels: Option<usize>,
    pub domain: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub torus_factor: Option<usize>,
    pub samples: Option<usize>,
    pub orders: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub gauge_radius: Option<f64>,
    pub alpha: Option<f64>,
    pub profile: Option<ProfileKind>,
}

/// Check thresholds; missing ones take the experiment default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// relative mismatch or stability bound
    pub relative: Option<f64>,
    /// absolute slack
    pub absolute: Option<f64>,
    /// minimum observed convergence order
    pub order: Option<f64>,
    /// solver tolerance
    pub solver: Option<f64>,
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("relative", self.relative),
            ("absolute", self.absolute),
            ("order", self.order),
            ("solver", self.solver),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(CliError::Config(format!("tolerance `{name}` must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub csv: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub params: Option<ParamsConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.kind()?;
        cfg.tolerances.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn kind(&self) -> Result<Experiment, CliError> {
        Experiment::from_name(&self.experiment).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            CliError::Config(format!(
                "unknown experiment `{}`; valid experiments are: {}",
                self.experiment,
                names.join(", ")
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = ExperimentConfig::parse("schema_version = 1\nexperiment = \"kelvin\"\n").unwrap();
        assert_eq!(c.kind().unwrap(), Experiment::Kelvin);
        assert_eq!(c.seed, 0);
        assert!(c.output.csv || c.output.dir.is_none());
    }

    #[test]
    fn parse_error_reports_line() {
        let e = ExperimentConfig::parse("schema_version = 1\nexperiment = \"kelvin\"\n[grid]\nresolution = \"x\"\n").unwrap_err();
        assert!(e.to_string().contains("line 4"), "{e}");
    }

    #[test]
    fn unknown_field_and_bad_tolerance() {
        assert!(ExperimentConfig::parse("schema_version = 1\nexperiment = \"kelvin\"\nsed = 3\n").is_err());
        let e = ExperimentConfig::parse("schema_version = 1\nexperiment = \"kelvin\"\n[tolerances]\nrelative = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("relative"));
    }

    #[test]
    fn profile_table() {
        let c = ExperimentConfig::parse(
            "schema_version = 1\nexperiment = \"curvature\"\n[grid.profile]\nkind = \"power-law\"\nalpha = 2.5\ncoeff = 1.0\n",
        )
        .unwrap();
        assert_eq!(c.grid.profile, Some(ProfileKind::PowerLaw { alpha: 2.5, coeff: 1.0 }));
    }
}
