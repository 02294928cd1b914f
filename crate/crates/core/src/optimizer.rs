//! Optimal threshold selection.
//!
//! The objective `f(eta_o) = Θ(eta_o) + Λ(eta_o)` trades handover reduction
//! against offloading loss. It is maximized over `[epsilon_rate, delta]`:
//! a log-spaced grid brackets every interior local maximum, each bracket is
//! refined by golden-section search in `ln eta_o`, and the refined candidates
//! are compared against both boundary values.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::analytics::{analyze, ScenarioParams};
use crate::error::{ModelError, Result};

pub const DEFAULT_DELTA: f64 = 200.0;
pub const DEFAULT_GRID_POINTS: usize = 128;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// `epsilon_rate = delta * DEFAULT_EPSILON_FACTOR` unless set explicitly.
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-9;

const MIN_GRID_POINTS: usize = 16;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Search range and resolution, all rates in 1/seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Upper bound on `eta_o`.
    pub delta: f64,
    /// Stand-in for the `eta_o = 0` boundary.
    pub epsilon_rate: f64,
    pub grid_points: usize,
    /// Relative convergence threshold on `eta_o`.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            delta: DEFAULT_DELTA,
            epsilon_rate: DEFAULT_DELTA * DEFAULT_EPSILON_FACTOR,
            grid_points: DEFAULT_GRID_POINTS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl OptimizerConfig {
    /// Default configuration with upper rate bound `delta`.
    pub fn with_delta(delta: f64) -> Result<Self> {
        let cfg = OptimizerConfig {
            delta,
            epsilon_rate: delta * DEFAULT_EPSILON_FACTOR,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default configuration whose rate bound is given as the smallest
    /// admissible mean threshold, `delta = 1 / min_threshold_mean`.
    pub fn with_min_threshold_mean(seconds: f64) -> Result<Self> {
        if !(seconds.is_finite() && seconds > 0.0) {
            return Err(ModelError::domain(
                "min_threshold_mean",
                seconds,
                "must be finite and > 0",
            ));
        }
        Self::with_delta(1.0 / seconds)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(ModelError::domain("delta", self.delta, "must be finite and > 0"));
        }
        if !(self.epsilon_rate > 0.0 && self.epsilon_rate < self.delta) {
            return Err(ModelError::domain(
                "epsilon_rate",
                self.epsilon_rate,
                "must satisfy 0 < epsilon_rate < delta",
            ));
        }
        if self.grid_points < MIN_GRID_POINTS {
            return Err(ModelError::domain(
                "grid_points",
                self.grid_points as f64,
                "must be >= 16",
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(ModelError::domain(
                "tolerance",
                self.tolerance,
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}

/// Which end of the search range the optimum sits on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryHit {
    None,
    Lower,
    Upper,
}

impl fmt::Display for BoundaryHit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryHit::None => "none",
            BoundaryHit::Lower => "lower",
            BoundaryHit::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub eta_o_star: f64,
    /// `1 / eta_o_star`, seconds.
    pub expected_threshold_star: f64,
    /// `theta_at + lambda_at`.
    pub objective_value: f64,
    pub theta_at: f64,
    pub lambda_at: f64,
    pub boundary_hit: BoundaryHit,
}

/// One row of an objective profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub eta_o: f64,
    pub theta: f64,
    pub lambda: f64,
    pub objective: f64,
}

fn evaluate(p: &ScenarioParams, eta_o: f64) -> Result<ProfilePoint> {
    let report = analyze(&p.with_eta_o(eta_o)?)?;
    let objective = report.theta + report.lambda;
    if !objective.is_finite() {
        return Err(ModelError::NonFiniteObjective {
            eta_o,
            value: objective,
        });
    }
    Ok(ProfilePoint {
        eta_o,
        theta: report.theta,
        lambda: report.lambda,
        objective,
    })
}

/// `Θ + Λ` at threshold rate `eta_o`; the `eta_o` stored in `p` is ignored.
pub fn objective(p: &ScenarioParams, eta_o: f64) -> Result<f64> {
    evaluate(p, eta_o).map(|pt| pt.objective)
}

/// `n` log-spaced points from `lo` to `hi`, endpoints exact.
fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + step * i as f64).exp(),
        })
        .collect()
}

/// Objective, Θ and Λ on `n_points` log-spaced rates over `[epsilon_rate, delta]`.
pub fn objective_profile(
    p: &ScenarioParams,
    cfg: &OptimizerConfig,
    n_points: usize,
) -> Result<Vec<ProfilePoint>> {
    cfg.validate()?;
    if n_points < 2 {
        return Err(ModelError::domain(
            "n_points",
            n_points as f64,
            "must be >= 2",
        ));
    }
    log_grid(cfg.epsilon_rate, cfg.delta, n_points)
        .into_iter()
        .map(|eta_o| evaluate(p, eta_o))
        .collect()
}

// Maximizes g(u) = f(exp(u)) on [a, b] by golden-section search.
fn golden_section(p: &ScenarioParams, mut a: f64, mut b: f64, tol: f64) -> Result<ProfilePoint> {
    let f = |u: f64| evaluate(p, u.exp());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc.objective >= fd.objective {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc.objective >= fd.objective { fc } else { fd })
}

/// Threshold rate maximizing `Θ + Λ` on `[epsilon_rate, delta]`.
pub fn find_optimal(p: &ScenarioParams, cfg: &OptimizerConfig) -> Result<Optimum> {
    let grid = objective_profile(p, cfg, cfg.grid_points)?;
    let n = grid.len();

    let mut best = (grid[0], BoundaryHit::Lower);
    let mut consider = |pt: ProfilePoint, hit: BoundaryHit| {
        if pt.objective > best.0.objective {
            best = (pt, hit);
        }
    };
    for i in 1..n - 1 {
        let (l, m, r) = (grid[i - 1].objective, grid[i].objective, grid[i + 1].objective);
        if m >= l && m >= r && (m > l || m > r) {
            let refined = golden_section(
                p,
                grid[i - 1].eta_o.ln(),
                grid[i + 1].eta_o.ln(),
                cfg.tolerance,
            )?;
            let pt = if refined.objective >= grid[i].objective {
                refined
            } else {
                grid[i]
            };
            consider(pt, BoundaryHit::None);
        }
    }
    consider(grid[n - 1], BoundaryHit::Upper);

    let (pt, boundary_hit) = best;
    Ok(Optimum {
        eta_o_star: pt.eta_o,
        expected_threshold_star: 1.0 / pt.eta_o,
        objective_value: pt.theta + pt.lambda,
        theta_at: pt.theta,
        lambda_at: pt.lambda,
        boundary_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residence::DistributionSpec;

    fn frequent_visits() -> ScenarioParams {
        let eta_s = 1.0 / 600.0;
        let eta_f = 10.0 * eta_s;
        let femto = DistributionSpec::gamma(1.0 / eta_f, 1000.0 / eta_f).unwrap();
        let macro_law = DistributionSpec::gamma(60.0, 60.0).unwrap();
        ScenarioParams::new(eta_s, macro_law, femto, 1.0).unwrap()
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = log_grid(2e-7, 200.0, 17);
        assert_eq!(g[0], 2e-7);
        assert_eq!(g[16], 200.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn frequent_visit_optimum() {
        let opt = find_optimal(&frequent_visits(), &OptimizerConfig::default()).unwrap();
        assert_eq!(opt.boundary_hit, BoundaryHit::None);
        assert!((opt.eta_o_star - 0.217214).abs() / 0.217214 < 1e-5);
        assert!((opt.expected_threshold_star - 4.60375).abs() / 4.60375 < 1e-5);
        assert_eq!(opt.expected_threshold_star, 1.0 / opt.eta_o_star);
        assert_eq!(opt.objective_value, opt.theta_at + opt.lambda_at);
    }

    #[test]
    fn small_delta_hits_upper_bound() {
        let cfg = OptimizerConfig::with_delta(0.05).unwrap();
        let opt = find_optimal(&frequent_visits(), &cfg).unwrap();
        assert_eq!(opt.boundary_hit, BoundaryHit::Upper);
        assert_eq!(opt.eta_o_star, 0.05);
    }

    #[test]
    fn min_threshold_reading() {
        let cfg = OptimizerConfig::with_min_threshold_mean(5.0).unwrap();
        assert_eq!(cfg.delta, 0.2);
        assert!(OptimizerConfig::with_min_threshold_mean(0.0).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let small = OptimizerConfig { grid_points: 4, ..Default::default() };
        assert!(small.validate().is_err());
        let empty = OptimizerConfig { epsilon_rate: DEFAULT_DELTA, ..Default::default() };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn objective_at_reference_point() {
        let macro_law = DistributionSpec::gamma(60.0, 60.0).unwrap();
        let femto = DistributionSpec::gamma(60.0, 60000.0).unwrap();
        let p = ScenarioParams::from_means(600.0, macro_law, femto, 60.0).unwrap();
        let f = objective(&p, 1.0 / 60.0).unwrap();
        assert!((f - (0.42599332 + 0.81251399)).abs() < 1e-7);
    }
}
