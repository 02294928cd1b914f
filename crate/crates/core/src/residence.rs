//! Cell residence-time laws.
//!
//! A [`DistributionSpec`] is a Gamma (or exponential) law fixed by its mean and
//! variance. Besides density and sampling it exposes the transforms the
//! renewal model is written in terms of:
//!
//! - `laplace(s)`            = E[e^{-sT}]
//! - `weighted_moment(s)`    = E[T e^{-sT}]
//! - `residual_laplace(s)`   = E[e^{-sψ}] for the equilibrium (residual-life) law ψ
//! - `residual_weighted_moment(s)` = E[ψ e^{-sψ}]
//!
//! Everything is evaluated through `ln_1p`/`exp_m1` so that very small shapes
//! (heavy-variance laws) and very small `s` stay accurate.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Open01};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::fmt;

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gamma,
    Exponential,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gamma => f.write_str("gamma"),
            Family::Exponential => f.write_str("exponential"),
        }
    }
}

/// A residence-time law given by its first two moments (seconds, seconds²).
///
/// Internally a Gamma law with `shape = mean²/variance` and
/// `rate = mean/variance`; the exponential family is the `shape = 1` member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    family: Family,
    mean: f64,
    variance: f64,
    shape: f64,
    rate: f64,
}

// Below this value of (shape + 1)·s/rate the residual weighted moment is
// summed as a power series instead of the cancelling closed form.
const SERIES_CUTOFF: f64 = 0.1;

impl DistributionSpec {
    /// Builds a law from its mean and variance. For [`Family::Exponential`]
    /// the variance argument is ignored and set to `mean²`.
    pub fn from_moments(family: Family, mean: f64, variance: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(ModelError::domain("mean", mean, "must be finite and > 0"));
        }
        let variance = match family {
            Family::Exponential => mean * mean,
            Family::Gamma => {
                if !(variance.is_finite() && variance > 0.0) {
                    return Err(ModelError::domain(
                        "variance",
                        variance,
                        "must be finite and > 0",
                    ));
                }
                variance
            }
        };
        let (shape, rate) = match family {
            Family::Exponential => (1.0, 1.0 / mean),
            Family::Gamma => (mean * mean / variance, mean / variance),
        };
        Ok(DistributionSpec {
            family,
            mean,
            variance,
            shape,
            rate,
        })
    }

    pub fn gamma(mean: f64, variance: f64) -> Result<Self> {
        Self::from_moments(Family::Gamma, mean, variance)
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        Self::from_moments(Family::Exponential, mean, mean * mean)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Mean residence time in seconds.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Crossing rate `1/mean` (η_m or η_f in the model).
    pub fn crossing_rate(&self) -> f64 {
        1.0 / self.mean
    }

    /// Mean of the equilibrium law, `(variance + mean²) / (2·mean)`.
    pub fn residual_mean(&self) -> f64 {
        (self.variance + self.mean * self.mean) / (2.0 * self.mean)
    }

    /// Probability density at `t` seconds.
    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let (k, lambda) = (self.shape, self.rate);
        if t == 0.0 {
            return match k.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => lambda,
                _ => 0.0,
            };
        }
        (k * lambda.ln() - ln_gamma(k) + (k - 1.0) * t.ln() - lambda * t).exp()
    }

    /// `E[e^{-sT}]`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        check_rate(s)?;
        Ok(self.laplace_unchecked(s))
    }

    /// `E[T e^{-sT}] = -d/ds laplace(s)`.
    pub fn weighted_moment(&self, s: f64) -> Result<f64> {
        check_rate(s)?;
        Ok(self.weighted_moment_unchecked(s))
    }

    /// Transform of the equilibrium law, `(1 - laplace(s)) / (mean·s)`; equals 1 at `s = 0`.
    pub fn residual_laplace(&self, s: f64) -> Result<f64> {
        check_rate(s)?;
        Ok(self.residual_laplace_unchecked(s))
    }

    /// `E[ψ e^{-sψ}]` for the equilibrium law ψ; equals [`residual_mean`](Self::residual_mean)
    /// at `s = 0`.
    pub fn residual_weighted_moment(&self, s: f64) -> Result<f64> {
        check_rate(s)?;
        Ok(self.residual_weighted_moment_unchecked(s))
    }

    /// `laplace(s) - laplace(s + ds)` without cancellation.
    pub fn laplace_decrement(&self, s: f64, ds: f64) -> Result<f64> {
        check_rate(s)?;
        check_rate(ds)?;
        Ok(self.laplace_decrement_unchecked(s, ds))
    }

    /// `1 - laplace(s)` without cancellation.
    pub fn laplace_complement(&self, s: f64) -> Result<f64> {
        check_rate(s)?;
        Ok(self.laplace_complement_unchecked(s))
    }

    // ln E[e^{-sT}] = -k ln(1 + s/λ)
    fn log_laplace(&self, s: f64) -> f64 {
        -self.shape * (s / self.rate).ln_1p()
    }

    pub(crate) fn laplace_unchecked(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return 0.0;
        }
        self.log_laplace(s).exp()
    }

    pub(crate) fn laplace_complement_unchecked(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return 1.0;
        }
        -self.log_laplace(s).exp_m1()
    }

    pub(crate) fn laplace_decrement_unchecked(&self, s: f64, ds: f64) -> f64 {
        if ds.is_infinite() {
            return self.laplace_unchecked(s);
        }
        let step = -self.shape * (ds / (self.rate + s)).ln_1p();
        self.laplace_unchecked(s) * -step.exp_m1()
    }

    pub(crate) fn weighted_moment_unchecked(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return 0.0;
        }
        self.shape / (self.rate + s) * self.laplace_unchecked(s)
    }

    pub(crate) fn residual_laplace_unchecked(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 1.0;
        }
        if s.is_infinite() {
            return 0.0;
        }
        self.laplace_complement_unchecked(s) / (self.mean * s)
    }

    pub(crate) fn residual_weighted_moment_unchecked(&self, s: f64) -> f64 {
        if s == 0.0 {
            return self.residual_mean();
        }
        if s.is_infinite() {
            return 0.0;
        }
        let (k, lambda) = (self.shape, self.rate);
        let x = s / lambda;
        if (k + 1.0) * x < SERIES_CUTOFF {
            return residual_weighted_series(k, x) / lambda;
        }
        let numerator = self.laplace_complement_unchecked(s) - s * self.weighted_moment_unchecked(s);
        numerator / (self.mean * s * s)
    }

    /// One draw of the residence time.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        ResidenceSampler::new(self).sample(rng)
    }

    /// One draw from the equilibrium (residual-life) law.
    pub fn residual_sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        ResidenceSampler::new(self).residual_sample(rng)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(mean={} s, variance={} s^2, shape={}, rate={} /s)",
            self.family, self.mean, self.variance, self.shape, self.rate
        )
    }
}

fn check_rate(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(ModelError::domain("s", s, "transform argument must be >= 0"));
    }
    Ok(())
}

/// `[1 - L(s) - s·W(s)]·λ/(k·x²)` for `x = s/λ`, summed as a power series.
///
/// With `a = k + 1`, the n-th term is `(-1)^n (n-1)/n · (a)_{n-1}/(n-1)! · x^{n-2}`.
fn residual_weighted_series(k: f64, x: f64) -> f64 {
    let a = k + 1.0;
    // c_n = (a)_{n-1} / (n-1)!, starting at n = 2
    let mut c = a;
    let mut x_pow = 1.0;
    let mut sum = 0.0;
    for n in 2..400u32 {
        let nf = f64::from(n);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (nf - 1.0) / nf * c * x_pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        c *= (a + nf - 1.0) / nf;
        x_pow *= x;
    }
    sum
}

/// Precomputed samplers for a residence law and its length-biased law.
///
/// Equilibrium draws use `U·X` with `X` length-biased (Gamma(k+1, λ)) and
/// `U` uniform on (0, 1).
#[derive(Debug, Clone)]
pub struct ResidenceSampler {
    full: Gamma<f64>,
    length_biased: Gamma<f64>,
}

impl ResidenceSampler {
    pub fn new(spec: &DistributionSpec) -> Self {
        let scale = 1.0 / spec.rate();
        // Parameters are validated by DistributionSpec.
        let full = Gamma::new(spec.shape(), scale).expect("valid gamma parameters");
        let length_biased = Gamma::new(spec.shape() + 1.0, scale).expect("valid gamma parameters");
        ResidenceSampler {
            full,
            length_biased,
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.full.sample(rng)
    }

    pub fn residual_sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        u * self.length_biased.sample(rng)
    }
}

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Streams with the same identity produce the same sequence no matter how
/// many other streams are alive or which thread drives them.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Exponential draw with the given rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        let u: f64 = self.rng.sample(Open01);
        -u.ln() / rate
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_to_shape_and_rate() {
        let d = DistributionSpec::gamma(60.0, 60000.0).unwrap();
        assert_relative_eq!(d.shape(), 0.06, max_relative = 1e-15);
        assert_relative_eq!(d.rate(), 0.001, max_relative = 1e-15);

        let e = DistributionSpec::from_moments(Family::Exponential, 1.0, 123.0).unwrap();
        assert_eq!(e.shape(), 1.0);
        assert_eq!(e.rate(), 1.0);
        assert_eq!(e.variance(), 1.0);

        let g = DistributionSpec::gamma(0.1, 0.1).unwrap();
        assert_relative_eq!(g.shape(), 0.1, max_relative = 1e-15);
        assert_relative_eq!(g.rate(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_moments() {
        assert!(DistributionSpec::gamma(0.0, 1.0).is_err());
        assert!(DistributionSpec::gamma(-1.0, 1.0).is_err());
        assert!(DistributionSpec::gamma(1.0, 0.0).is_err());
        assert!(DistributionSpec::gamma(1.0, -3.0).is_err());
        assert!(DistributionSpec::gamma(f64::NAN, 1.0).is_err());
        // variance is ignored for the exponential family
        assert!(DistributionSpec::from_moments(Family::Exponential, 2.0, -1.0).is_ok());
    }

    #[test]
    fn transform_examples() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        assert_relative_eq!(e.laplace(1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(e.laplace(0.0).unwrap(), 1.0);
        assert_relative_eq!(e.weighted_moment(0.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(e.weighted_moment(1.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(e.residual_laplace(1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(e.residual_weighted_moment(0.0).unwrap(), 1.0);

        let g2 = DistributionSpec::gamma(2.0, 2.0).unwrap();
        assert_relative_eq!(g2.weighted_moment(1.0).unwrap(), 0.25, max_relative = 1e-15);

        let table = DistributionSpec::gamma(60.0, 60000.0).unwrap();
        let s = 1.0 / 600.0 + 1.0 / 60.0;
        assert_relative_eq!(table.laplace(s).unwrap(), 0.83718, max_relative = 1e-5);
    }

    #[test]
    fn negative_argument_is_a_domain_error() {
        let d = DistributionSpec::exponential(1.0).unwrap();
        assert!(matches!(d.laplace(-1.0), Err(ModelError::Domain { name: "s", .. })));
        assert!(d.weighted_moment(-1e-9).is_err());
        assert!(d.residual_laplace(f64::NAN).is_err());
        assert!(d.residual_weighted_moment(-2.0).is_err());
    }

    #[test]
    fn zero_limits() {
        let d = DistributionSpec::gamma(0.1, 0.1).unwrap();
        assert_eq!(d.residual_laplace(0.0).unwrap(), 1.0);
        assert_relative_eq!(d.residual_weighted_moment(0.0).unwrap(), 0.55, max_relative = 1e-14);
        // continuity across the series cutoff and towards zero
        for s in [1e-12, 1e-8, 1e-4] {
            assert_relative_eq!(d.residual_laplace(s).unwrap(), 1.0, max_relative = 2.0 * s);
            assert_relative_eq!(
                d.residual_weighted_moment(s).unwrap(),
                0.55,
                max_relative = 10.0 * s
            );
        }
    }

    #[test]
    fn series_and_closed_form_meet_at_cutoff() {
        for (mean, var) in [(1.0, 1.0), (60.0, 60000.0), (60.0, 60.0), (0.1, 0.1), (5.0, 0.01)] {
            let d = DistributionSpec::gamma(mean, var).unwrap();
            let s = SERIES_CUTOFF * d.rate() / (d.shape() + 1.0);
            let series = residual_weighted_series(d.shape(), s / d.rate()) / d.rate();
            let closed = (d.laplace_complement_unchecked(s) - s * d.weighted_moment_unchecked(s))
                / (d.mean() * s * s);
            assert_relative_eq!(series, closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn residual_laplace_identity() {
        let d = DistributionSpec::gamma(3.0, 7.0).unwrap();
        for i in 1..50 {
            let s = 0.05 * f64::from(i);
            let lhs = d.residual_laplace(s).unwrap() * s * d.mean();
            let rhs = 1.0 - d.laplace(s).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn decrement_matches_difference() {
        let d = DistributionSpec::gamma(60.0, 60000.0).unwrap();
        let s = 1.0 / 600.0;
        for ds in [1e-3, 1.0 / 60.0, 1.0, 100.0] {
            let direct = d.laplace(s).unwrap() - d.laplace(s + ds).unwrap();
            assert_relative_eq!(d.laplace_decrement(s, ds).unwrap(), direct, max_relative = 1e-12);
        }
        assert_eq!(d.laplace_decrement(s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn tiny_shape_stays_finite() {
        let d = DistributionSpec::gamma(1.0, 1e6).unwrap();
        for s in [0.0, 1e-9, 1e-3, 1.0, 1e6] {
            let l = d.laplace(s).unwrap();
            assert!(l > 0.0 && l <= 1.0);
            assert!(d.weighted_moment(s).unwrap().is_finite());
            assert!(d.residual_weighted_moment(s).unwrap().is_finite());
        }
        let big = DistributionSpec::gamma(60.0, 0.6).unwrap();
        assert!(big.weighted_moment(1.0).unwrap() > 0.0);
    }

    #[test]
    fn pdf_at_origin() {
        assert_eq!(DistributionSpec::gamma(0.1, 0.1).unwrap().pdf(0.0), f64::INFINITY);
        assert_eq!(DistributionSpec::exponential(2.0).unwrap().pdf(0.0), 0.5);
        assert_eq!(DistributionSpec::gamma(2.0, 1.0).unwrap().pdf(0.0), 0.0);
        assert_eq!(DistributionSpec::gamma(2.0, 1.0).unwrap().pdf(-1.0), 0.0);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let d = DistributionSpec::gamma(60.0, 60000.0).unwrap();
        let a = d.sample(&mut RandomStream::new(7, 0));
        let b = d.sample(&mut RandomStream::new(7, 0));
        let c = d.sample(&mut RandomStream::new(7, 1));
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn exponential_sample_mean() {
        let d = DistributionSpec::exponential(1.0).unwrap();
        let mut rs = RandomStream::new(2024, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample(&mut rs)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
    }
}
