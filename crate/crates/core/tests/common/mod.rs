//! Shared helpers for integration tests and the acceptance harness.
//!
//! The quadrature oracle integrates over `[0, ∞)` with the exp-sinh
//! substitution `t = exp(π/2 · sinh u)`, evaluating integrands through
//! `ln t` so that power singularities at 0 and exponential tails never
//! overflow. It is deliberately independent of the crate's transform code:
//! it only uses the Gamma density and survival function.

#![allow(dead_code)]

use femto_offload::{DistributionSpec, ScenarioParams};
use statrs::function::gamma::{gamma_ur, ln_gamma};
use std::f64::consts::FRAC_PI_2;

/// `∫_0^∞ exp(ln_f(ln t)) dt`, refined until two step sizes agree to 1e-13.
pub fn integrate_log(ln_f: impl Fn(f64) -> f64) -> f64 {
    let sum_at = |h: f64, offset: f64| -> f64 {
        let n = (9.0 / h).ceil() as i64;
        (-n..n)
            .map(|i| {
                let u = (i as f64 + offset) * h;
                let ln_t = FRAC_PI_2 * u.sinh();
                let ln_jac = ln_t + (FRAC_PI_2 * u.cosh()).ln();
                let v = ln_f(ln_t) + ln_jac;
                if v.is_nan() { 0.0 } else { v.exp() }
            })
            .sum::<f64>()
            * h
    };
    let mut h = 0.125;
    let mut total = sum_at(h, 0.0);
    loop {
        // midpoints of the previous grid halve the step
        let refined = 0.5 * (total + sum_at(h, 0.5));
        h *= 0.5;
        if (refined - total).abs() <= 1e-13 * refined.abs() || h < 1e-4 {
            return refined;
        }
        total = refined;
    }
}

pub fn ln_pdf(d: &DistributionSpec, ln_t: f64) -> f64 {
    let (k, lambda) = (d.shape(), d.rate());
    k * lambda.ln() - ln_gamma(k) + (k - 1.0) * ln_t - lambda * ln_t.exp()
}

/// `ln P[T > t]`.
pub fn ln_survival(d: &DistributionSpec, ln_t: f64) -> f64 {
    let x = d.rate() * ln_t.exp();
    if x == 0.0 {
        0.0
    } else if !x.is_finite() {
        f64::NEG_INFINITY
    } else {
        gamma_ur(d.shape(), x).ln()
    }
}

/// `ln` of the equilibrium density `P[T > t] / mean`.
pub fn ln_residual_pdf(d: &DistributionSpec, ln_t: f64) -> f64 {
    ln_survival(d, ln_t) - d.mean().ln()
}

pub fn q_mass(d: &DistributionSpec) -> f64 {
    integrate_log(|lt| ln_pdf(d, lt))
}

pub fn q_laplace(d: &DistributionSpec, s: f64) -> f64 {
    integrate_log(|lt| ln_pdf(d, lt) - s * lt.exp())
}

pub fn q_weighted_moment(d: &DistributionSpec, s: f64) -> f64 {
    integrate_log(|lt| lt + ln_pdf(d, lt) - s * lt.exp())
}

pub fn q_residual_laplace(d: &DistributionSpec, s: f64) -> f64 {
    integrate_log(|lt| ln_residual_pdf(d, lt) - s * lt.exp())
}

pub fn q_residual_weighted_moment(d: &DistributionSpec, s: f64) -> f64 {
    integrate_log(|lt| lt + ln_residual_pdf(d, lt) - s * lt.exp())
}

/// `ln E[(t - t_o)^+]` for `t_o ~ Exp(rate)`: `t - (1 - e^{-rate·t}) / rate`.
fn ln_excess(rate: f64, ln_t: f64) -> f64 {
    let ln_x = rate.ln() + ln_t;
    let x = ln_x.exp();
    let ln_v = if x < 1e-3 {
        (x * x * (0.5 - x * (1.0 / 6.0 - x / 24.0))).ln()
    } else if x > 1e3 {
        // x - 1 + e^{-x} without overflowing x
        ln_x + (-1.0 / x).ln_1p()
    } else {
        (x - 1.0 + (-x).exp()).ln()
    };
    ln_v - rate.ln()
}

/// `ln P[t_o < t]` for `t_o ~ Exp(rate)`.
fn ln_expired(rate: f64, ln_t: f64) -> f64 {
    (-(-rate * ln_t.exp()).exp_m1()).ln()
}

/// Per-visit conditional quantities, each from its defining integral.
#[derive(Debug, Clone, Copy)]
pub struct VisitOracle {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub sigma: f64,
    pub xi: f64,
    pub phi: f64,
    pub rho: f64,
}

pub fn visit_oracle(p: &ScenarioParams) -> VisitOracle {
    let f = &p.femto_law;
    let (s, o) = (p.eta_s, p.eta_o);
    // completed entered visit: weight f(t) e^{-s t}
    let completed = |extra: &dyn Fn(f64) -> f64| {
        integrate_log(|lt| ln_pdf(f, lt) - s * lt.exp() + extra(lt))
    };
    // session ends during an entered visit at age a: weight s e^{-s a} P[T > a]
    let ending = |extra: &dyn Fn(f64) -> f64| {
        integrate_log(|lt| s.ln() + ln_survival(f, lt) - s * lt.exp() + extra(lt))
    };
    // session-start residual that ends first: weight g(t) e^{-s t}
    let start = |extra: &dyn Fn(f64) -> f64| {
        integrate_log(|lt| ln_residual_pdf(f, lt) - s * lt.exp() + extra(lt))
    };

    let c0 = completed(&|_| 0.0);
    let c_exp = completed(&|lt| ln_expired(o, lt));
    let e0 = ending(&|_| 0.0);
    let e_exp = ending(&|lt| ln_expired(o, lt));
    let s0 = start(&|_| 0.0);

    VisitOracle {
        alpha: c_exp / c0,
        beta: e_exp / e0,
        tau: start(&|lt| lt) / s0,
        sigma: ending(&|lt| lt) / e0,
        xi: completed(&|lt| lt) / c0,
        phi: completed(&|lt| ln_excess(o, lt)) / c_exp,
        rho: ending(&|lt| ln_excess(o, lt)) / e_exp,
    }
}

/// Validation-table parameters: 600 s sessions, 60 s residences, macro
/// variance 60 s², femto variance 60000 s².
pub fn reference_scenario(threshold_mean: f64) -> ScenarioParams {
    ScenarioParams::from_means(
        600.0,
        DistributionSpec::gamma(60.0, 60.0).unwrap(),
        DistributionSpec::gamma(60.0, 60_000.0).unwrap(),
        threshold_mean,
    )
    .unwrap()
}

pub const REFERENCE_THRESHOLDS: [f64; 4] = [60.0, 120.0, 180.0, 240.0];

/// Printed analytic rows: N_t, T_t, Θ %, Λ %.
pub const REFERENCE_ANALYTIC: [[f64; 4]; 4] = [
    [5.74007, 5.55835, 5.45672, 5.38896],
    [192.43505, 169.83760, 154.62965, 143.48846],
    [42.59933, 44.41655, 45.43281, 46.11039],
    [81.25140, 71.71013, 65.28891, 60.58480],
];

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Deterministic scenario generator for randomized suites.
pub struct ScenarioGen(rand_chacha::ChaCha8Rng);

impl ScenarioGen {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        ScenarioGen(rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    /// Log-uniform on `[lo, hi]`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        (lo.ln() + self.0.random::<f64>() * (hi.ln() - lo.ln())).exp()
    }

    pub fn law(&mut self) -> DistributionSpec {
        let mean = self.log_uniform(1.0, 1000.0);
        let cv2 = self.log_uniform(0.01, 100.0);
        DistributionSpec::gamma(mean, cv2 * mean * mean).unwrap()
    }

    pub fn scenario(&mut self) -> ScenarioParams {
        let session = self.log_uniform(10.0, 10_000.0);
        let macro_law = self.law();
        let femto_law = self.law();
        let threshold = self.log_uniform(0.1, 1000.0);
        ScenarioParams::from_means(session, macro_law, femto_law, threshold).unwrap()
    }
}
