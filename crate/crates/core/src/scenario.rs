//! Scenario files.
//!
//! A scenario is a TOML document whose keys carry their units:
//!
//! ```toml
//! [session]
//! mean_seconds = 600.0
//!
//! [macro]
//! family = "gamma"            # or "exponential"; default "gamma"
//! mean_seconds = 60.0
//! variance_seconds2 = 60.0    # ignored for "exponential"
//!
//! [femto]
//! mean_seconds = 60.0
//! variance_seconds2 = 60000.0
//!
//! [threshold]                 # optional, default mean_seconds = 60
//! mean_seconds = 60.0
//!
//! [simulation]                # optional
//! replications = 1000000      # default 1000000
//! seed = 1                    # default 1
//! counting_mode = "paper"     # or "flowchart"; default "paper"
//! batch_count = 100           # default: largest divisor of replications <= 100
//!
//! [optimizer]                 # optional
//! delta_per_second = 200.0    # or min_threshold_mean_seconds = 0.005
//! epsilon_per_second = 2e-7   # default delta * 1e-9
//! tolerance = 1e-10
//! grid_points = 128
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::analytics::ScenarioParams;
use crate::optimizer::{OptimizerConfig, DEFAULT_EPSILON_FACTOR};
use crate::residence::{DistributionSpec, Family};
use crate::simulator::{CountingMode, SimConfig};

pub const DEFAULT_THRESHOLD_MEAN: f64 = 60.0;
pub const DEFAULT_REPLICATIONS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ScenarioError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionSection {
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    #[serde(default = "default_family")]
    pub family: Family,
    pub mean_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_seconds2: Option<f64>,
}

fn default_family() -> Family {
    Family::Gamma
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counting_mode: Option<CountingMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_count: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_per_second: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_threshold_mean_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_per_second: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

/// The document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub session: SessionSection,
    #[serde(rename = "macro")]
    pub macro_cell: CellSection,
    #[serde(rename = "femto")]
    pub femto_cell: CellSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub simulation: SimConfig,
    pub optimizer: OptimizerConfig,
}

fn positive(field: &str, value: f64) -> Result<f64, ScenarioError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::invalid(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

impl CellSection {
    fn to_spec(&self, section: &str) -> Result<DistributionSpec, ScenarioError> {
        let mean = positive(&format!("{section}.mean_seconds"), self.mean_seconds)?;
        let variance = match (self.family, self.variance_seconds2) {
            (Family::Exponential, _) => mean * mean,
            (Family::Gamma, Some(v)) => positive(&format!("{section}.variance_seconds2"), v)?,
            (Family::Gamma, None) => {
                return Err(ScenarioError::invalid(
                    &format!("{section}.variance_seconds2"),
                    "required for the gamma family",
                ))
            }
        };
        DistributionSpec::from_moments(self.family, mean, variance)
            .map_err(|e| ScenarioError::invalid(section, e.to_string()))
    }

    pub fn from_spec(spec: &DistributionSpec) -> Self {
        CellSection {
            family: spec.family(),
            mean_seconds: spec.mean(),
            variance_seconds2: match spec.family() {
                Family::Gamma => Some(spec.variance()),
                Family::Exponential => None,
            },
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    /// Scenario file describing `p` with no simulation or optimizer section.
    pub fn from_params(p: &ScenarioParams) -> Self {
        ScenarioFile {
            session: SessionSection {
                mean_seconds: p.session_mean(),
            },
            macro_cell: CellSection::from_spec(&p.macro_law),
            femto_cell: CellSection::from_spec(&p.femto_law),
            threshold: Some(ThresholdSection {
                mean_seconds: p.threshold_mean(),
            }),
            simulation: None,
            optimizer: None,
        }
    }

    pub fn params(&self) -> Result<ScenarioParams, ScenarioError> {
        let session = positive("session.mean_seconds", self.session.mean_seconds)?;
        let macro_law = self.macro_cell.to_spec("macro")?;
        let femto_law = self.femto_cell.to_spec("femto")?;
        let threshold = match &self.threshold {
            Some(t) => positive("threshold.mean_seconds", t.mean_seconds)?,
            None => DEFAULT_THRESHOLD_MEAN,
        };
        ScenarioParams::from_means(session, macro_law, femto_law, threshold)
            .map_err(|e| ScenarioError::invalid("scenario", e.to_string()))
    }

    pub fn simulation(&self) -> Result<SimConfig, ScenarioError> {
        let s = self.simulation.clone().unwrap_or_default();
        let replications = s.replications.unwrap_or(DEFAULT_REPLICATIONS);
        let seed = s.seed.unwrap_or(DEFAULT_SEED);
        let mode = s.counting_mode.unwrap_or_default();
        let cfg = match s.batch_count {
            Some(b) => SimConfig::new(replications, seed, mode, b),
            None => SimConfig::with_auto_batches(replications, seed, mode),
        };
        cfg.map_err(|e| ScenarioError::invalid("simulation", e.to_string()))
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig, ScenarioError> {
        let o = self.optimizer.clone().unwrap_or_default();
        let delta = match (o.delta_per_second, o.min_threshold_mean_seconds) {
            (Some(_), Some(_)) => {
                return Err(ScenarioError::invalid(
                    "optimizer",
                    "set either delta_per_second or min_threshold_mean_seconds, not both",
                ))
            }
            (Some(d), None) => positive("optimizer.delta_per_second", d)?,
            (None, Some(m)) => 1.0 / positive("optimizer.min_threshold_mean_seconds", m)?,
            (None, None) => OptimizerConfig::default().delta,
        };
        let defaults = OptimizerConfig::default();
        let epsilon_rate = match o.epsilon_per_second {
            Some(e) => positive("optimizer.epsilon_per_second", e)?,
            None => delta * DEFAULT_EPSILON_FACTOR,
        };
        let tolerance = match o.tolerance {
            Some(t) => positive("optimizer.tolerance", t)?,
            None => defaults.tolerance,
        };
        let cfg = OptimizerConfig {
            delta,
            epsilon_rate,
            grid_points: o.grid_points.unwrap_or(defaults.grid_points),
            tolerance,
        };
        cfg.validate()
            .map_err(|e| ScenarioError::invalid("optimizer", e.to_string()))?;
        Ok(cfg)
    }

    pub fn resolve(&self) -> Result<Scenario, ScenarioError> {
        Ok(Scenario {
            params: self.params()?,
            simulation: self.simulation()?,
            optimizer: self.optimizer()?,
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        ScenarioFile::load(path)?.resolve()
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        ScenarioFile::parse(text)?.resolve()
    }
}
