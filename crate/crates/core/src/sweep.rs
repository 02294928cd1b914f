//! One-parameter sweeps of Θ and Λ.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::analytics::{analyze, AnalyticReport, ScenarioParams};
use crate::error::{ModelError, Result};
use crate::residence::{DistributionSpec, Family};
use crate::simulator::{run_monte_carlo, MonteCarloReport, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Mean femto residence (s). The variance-to-mean ratio is held fixed.
    FemtoMean,
    /// Femto residence variance (s²).
    FemtoVariance,
    /// Mean session length (s).
    SessionMean,
    /// Mean threshold (s).
    ThresholdMean,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [
        SweepAxis::FemtoMean,
        SweepAxis::FemtoVariance,
        SweepAxis::SessionMean,
        SweepAxis::ThresholdMean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::FemtoMean => "femto_mean",
            SweepAxis::FemtoVariance => "femto_variance",
            SweepAxis::SessionMean => "session_mean",
            SweepAxis::ThresholdMean => "threshold_mean",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepAxis::FemtoVariance => "s^2",
            _ => "s",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ScenarioParams, value: f64) -> Result<ScenarioParams> {
        let femto = &base.femto_law;
        match self {
            SweepAxis::FemtoMean => {
                let dispersion = femto.variance() / femto.mean();
                let law = DistributionSpec::from_moments(femto.family(), value, dispersion * value)?;
                ScenarioParams::new(base.eta_s, base.macro_law, law, base.eta_o)
            }
            SweepAxis::FemtoVariance => {
                if femto.family() == Family::Exponential {
                    return Err(ModelError::Config(
                        "femto_variance sweeps need a gamma femto law".into(),
                    ));
                }
                let law = DistributionSpec::gamma(femto.mean(), value)?;
                ScenarioParams::new(base.eta_s, base.macro_law, law, base.eta_o)
            }
            SweepAxis::SessionMean => ScenarioParams::from_means(
                value,
                base.macro_law,
                base.femto_law,
                base.threshold_mean(),
            ),
            SweepAxis::ThresholdMean => ScenarioParams::from_means(
                base.session_mean(),
                base.macro_law,
                base.femto_law,
                value,
            ),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown axis `{s}` (expected femto_mean | femto_variance | session_mean | threshold_mean)"
                )
            })
    }
}

/// Grid of axis values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        for (name, v) in [("from", self.from), ("to", self.to)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::domain(name, v, "must be finite and > 0"));
            }
        }
        match self.points {
            0 => Err(ModelError::Config("a sweep needs at least one point".into())),
            1 => Ok(vec![self.from]),
            n => {
                let (a, b) = if self.log {
                    (self.from.ln(), self.to.ln())
                } else {
                    (self.from, self.to)
                };
                let step = (b - a) / (n - 1) as f64;
                Ok((0..n)
                    .map(|i| match i {
                        0 => self.from,
                        i if i == n - 1 => self.to,
                        i if self.log => (a + step * i as f64).exp(),
                        i => a + step * i as f64,
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub analytic: AnalyticReport,
    pub simulated: Option<MonteCarloReport>,
}

/// Analytic report (and optionally a simulation) at every grid value.
pub fn run_sweep(
    base: &ScenarioParams,
    axis: SweepAxis,
    range: &SweepRange,
    simulate: Option<&SimConfig>,
) -> Result<Vec<SweepRow>> {
    range
        .values()?
        .into_iter()
        .map(|value| {
            let p = axis.apply(base, value)?;
            let analytic = analyze(&p)?;
            let simulated = simulate.map(|cfg| run_monte_carlo(&p, cfg)).transpose()?;
            Ok(SweepRow {
                value,
                analytic,
                simulated,
            })
        })
        .collect()
}
