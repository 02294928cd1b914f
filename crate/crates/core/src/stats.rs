//! Batch-means confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Confidence level of every reported interval.
pub const CONFIDENCE: f64 = 0.95;

// statrs' Student-t inverse drifts for very large dof; the normal limit is
// within 1e-3 of the exact quantile beyond this point.
const LARGE_DOF: u64 = 1000;

/// A Monte Carlo point estimate with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub ci_halfwidth: f64,
    /// Standard error of `mean` estimated from the batch spread.
    pub std_error: f64,
    /// Number of replications behind the estimate.
    pub n: u64,
}

impl SimEstimate {
    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn within_std_errors(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }

    pub fn relative_error(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / reference.abs()
    }
}

/// Two-sided Student-t quantile for [`CONFIDENCE`] with `dof` degrees of freedom.
pub fn t_quantile(dof: u64) -> f64 {
    if dof > LARGE_DOF {
        let z = Normal::new(0.0, 1.0).expect("unit normal");
        return z.inverse_cdf(0.5 + CONFIDENCE / 2.0);
    }
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("dof > 0");
    dist.inverse_cdf(0.5 + CONFIDENCE / 2.0)
}

/// Estimate with point value `point` and spread taken from per-batch values.
///
/// Fewer than two usable batches, or any non-finite batch value, give an
/// infinite interval.
pub fn batch_means(point: f64, batch_values: &[f64], n: u64) -> SimEstimate {
    let b = batch_values.len();
    if b < 2 || batch_values.iter().any(|v| !v.is_finite()) {
        return SimEstimate {
            mean: point,
            ci_halfwidth: f64::INFINITY,
            std_error: f64::INFINITY,
            n,
        };
    }
    let bf = b as f64;
    let avg = batch_values.iter().sum::<f64>() / bf;
    let var = batch_values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / (bf - 1.0);
    let std_error = (var / bf).sqrt();
    SimEstimate {
        mean: point,
        ci_halfwidth: t_quantile(b as u64 - 1) * std_error,
        std_error,
        n,
    }
}
