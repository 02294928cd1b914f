//! Closed-form renewal analytics for threshold offloading.
//!
//! A session of exponential length `1/eta_s` alternates between macrocell and
//! femtocell residences. It starts in the macrocell (case 1) or in a femtocell
//! (case 2) with the stationary probabilities of the alternating renewal
//! process, and the first residence is a residual life. Every entry into a
//! femtocell from the macrocell draws a fresh exponential threshold `t_o`; the
//! macro-to-femto handover only executes once `t_o` has elapsed inside the
//! femtocell.
//!
//! Each expectation is a series over the crossing count `N_b`:
//!
//! ```text
//! E[X | case] = sum_i (A·i + B) · Pr[N_b = 2i or 2i+1 | case]
//! ```
//!
//! whose pmf factors are geometric in `q = f*_m(eta_s)·f*_f(eta_s)`, so every
//! sum is evaluated exactly in closed form.
//!
//! Handovers under threshold offloading are counted as in the renewal model
//! ("paper mode"): a completed femto visit costs 2 if its threshold expired and
//! 1 otherwise, the session-ending visit costs 1 if the threshold expired and 0
//! otherwise, and the exit from a session-start femtocell costs 1.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::residence::DistributionSpec;

/// Relative tolerance for the case-sum vs printed-closed-form check.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;

/// Full parameter vector of a scenario. Rates are per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Session-end rate; the mean session lasts `1/eta_s` seconds.
    pub eta_s: f64,
    pub macro_law: DistributionSpec,
    pub femto_law: DistributionSpec,
    /// Threshold rate; the mean threshold is `1/eta_o` seconds.
    pub eta_o: f64,
}

impl ScenarioParams {
    pub fn new(
        eta_s: f64,
        macro_law: DistributionSpec,
        femto_law: DistributionSpec,
        eta_o: f64,
    ) -> Result<Self> {
        check_positive_rate("eta_s", eta_s)?;
        check_positive_rate("eta_o", eta_o)?;
        Ok(ScenarioParams {
            eta_s,
            macro_law,
            femto_law,
            eta_o,
        })
    }

    /// Same as [`new`](Self::new) with mean session and mean threshold in seconds.
    pub fn from_means(
        session_mean: f64,
        macro_law: DistributionSpec,
        femto_law: DistributionSpec,
        threshold_mean: f64,
    ) -> Result<Self> {
        check_positive_rate("session_mean", session_mean)?;
        check_positive_rate("threshold_mean", threshold_mean)?;
        Self::new(1.0 / session_mean, macro_law, femto_law, 1.0 / threshold_mean)
    }

    pub fn with_eta_o(&self, eta_o: f64) -> Result<Self> {
        Self::new(self.eta_s, self.macro_law, self.femto_law, eta_o)
    }

    pub fn eta_m(&self) -> f64 {
        self.macro_law.crossing_rate()
    }

    pub fn eta_f(&self) -> f64 {
        self.femto_law.crossing_rate()
    }

    pub fn session_mean(&self) -> f64 {
        1.0 / self.eta_s
    }

    pub fn threshold_mean(&self) -> f64 {
        1.0 / self.eta_o
    }
}

fn check_positive_rate(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(ModelError::domain(name, value, "must be finite and > 0"));
    }
    Ok(())
}

/// Cell type. As a session start cell, macro is case 1 and femto is case 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Macro,
    Femto,
}

/// Contributions of the four end-cell cases to a conditional expectation.
///
/// `case_1_1` is `Σ_i E[X | N_b = 2i] Pr[N_b = 2i | start in macro]`, and so on;
/// `case_1_1 + case_1_2` is therefore `E[X | start in macro]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseTerms {
    pub case_1_1: f64,
    pub case_1_2: f64,
    pub case_2_1: f64,
    pub case_2_2: f64,
}

impl CaseTerms {
    pub fn given_start(&self, start: Cell) -> f64 {
        match start {
            Cell::Macro => self.case_1_1 + self.case_1_2,
            Cell::Femto => self.case_2_1 + self.case_2_2,
        }
    }

    pub fn combine(&self, prob_case1: f64, prob_case2: f64) -> f64 {
        prob_case1 * self.given_start(Cell::Macro)
            + prob_case2 * self.given_start(Cell::Femto)
    }
}

/// Conditional offload-time means of a single femto visit (seconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffloadTimes {
    /// Residual femto time of a session-start residence that ends before the session.
    pub tau: f64,
    /// Age of the femto visit in which the session ends.
    pub sigma: f64,
    /// Length of a completed femto visit.
    pub xi: f64,
    /// Offloaded time of a completed visit whose threshold expired.
    pub phi: f64,
    /// Offloaded time of the session-ending visit whose threshold expired.
    pub rho: f64,
}

/// Every intermediate and headline quantity of the model for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub params: ScenarioParams,
    pub prob_case1: f64,
    pub prob_case2: f64,
    /// `f*_m(eta_s)`
    pub macro_laplace: f64,
    /// `f*_f(eta_s)`
    pub femto_laplace: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub sigma: f64,
    pub xi: f64,
    pub phi: f64,
    pub rho: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// `E[t_f e^{-eta_s t_f}]`
    pub y1: f64,
    /// `E[ψ_f e^{-eta_s ψ_f}]`
    pub y2: f64,
    pub e_nb: f64,
    pub e_nt: f64,
    pub e_tb: f64,
    pub e_tt: f64,
    /// See [`static_femto_time`].
    pub static_femto_time: f64,
    pub theta: f64,
    pub lambda: f64,
    pub theta_closed_form: f64,
    pub lambda_closed_form: f64,
    pub n_b_cases: CaseTerms,
    pub n_t_cases: CaseTerms,
    pub t_b_cases: CaseTerms,
    pub t_t_cases: CaseTerms,
}

impl AnalyticReport {
    pub fn objective(&self) -> f64 {
        self.theta + self.lambda
    }

    /// Checks both metrics against their printed closed forms.
    pub fn check_closed_forms(&self, rel_tol: f64) -> Result<()> {
        check_agreement("theta", self.theta, self.theta_closed_form, rel_tol)?;
        check_agreement("lambda", self.lambda, self.lambda_closed_form, rel_tol)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn check_agreement(metric: &'static str, case_sum: f64, closed_form: f64, tol: f64) -> Result<()> {
    let gap = relative_gap(case_sum, closed_form);
    if gap > tol || gap.is_nan() {
        return Err(ModelError::ClosedFormMismatch {
            metric,
            case_sum,
            closed_form,
            relative_gap: gap,
        });
    }
    Ok(())
}

/// Transform values shared by every series.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    eta_s: f64,
    eta_m: f64,
    eta_f: f64,
    fm: f64,
    ff: f64,
    /// 1 - fm
    cm: f64,
    /// 1 - ff
    cf: f64,
    q: f64,
    /// 1 - q
    cq: f64,
}

impl Kernel {
    fn new(p: &ScenarioParams) -> Self {
        let fm = p.macro_law.laplace_unchecked(p.eta_s);
        let ff = p.femto_law.laplace_unchecked(p.eta_s);
        let cm = p.macro_law.laplace_complement_unchecked(p.eta_s);
        let cf = p.femto_law.laplace_complement_unchecked(p.eta_s);
        Kernel {
            eta_s: p.eta_s,
            eta_m: p.eta_m(),
            eta_f: p.eta_f(),
            fm,
            ff,
            cm,
            cf,
            q: fm * ff,
            cq: cm + fm * cf,
        }
    }

    // Σ_{i≥1} (a·i + b) · lead/eta_s · q^{i-1}
    fn even(&self, lead: f64, a: f64, b: f64) -> f64 {
        lead * (a + b * self.cq) / (self.eta_s * self.cq * self.cq)
    }

    // Σ_{i≥0} (a·i + b) · lead/eta_s · q^i
    fn odd(&self, lead: f64, a: f64, b: f64) -> f64 {
        lead * (a * self.q + b * self.cq) / (self.eta_s * self.cq * self.cq)
    }

    fn lead_1_1(&self) -> f64 {
        self.eta_m * self.ff * self.cm * self.cm
    }

    fn lead_1_2(&self) -> f64 {
        self.eta_m * self.cf * self.cm
    }

    fn lead_2_1(&self) -> f64 {
        self.eta_f * self.cf * self.cm
    }

    fn lead_2_2(&self) -> f64 {
        self.eta_f * self.fm * self.cf * self.cf
    }

    /// Case terms of a quantity that is `a·i + b_xy` on each branch.
    fn cases(&self, a: f64, b: [f64; 4]) -> CaseTerms {
        CaseTerms {
            case_1_1: self.even(self.lead_1_1(), a, b[0]),
            case_1_2: self.odd(self.lead_1_2(), a, b[1]),
            case_2_1: self.odd(self.lead_2_1(), a, b[2]),
            case_2_2: self.even(self.lead_2_2(), a, b[3]),
        }
    }
}

/// Stationary probabilities of starting in the macrocell (case 1) and in a femtocell (case 2).
pub fn case_probabilities(p: &ScenarioParams) -> (f64, f64) {
    let (eta_m, eta_f) = (p.eta_m(), p.eta_f());
    let case1 = eta_f / (eta_f + eta_m);
    (case1, 1.0 - case1)
}

/// Expected number of cell crossings (= baseline handovers) per session.
pub fn baseline_handover_count(p: &ScenarioParams) -> f64 {
    let (eta_m, eta_f) = (p.eta_m(), p.eta_f());
    2.0 * eta_m * eta_f / (p.eta_s * (eta_m + eta_f))
}

/// Shared pieces of the threshold integrals, written so that the `1/eta_o`
/// terms cancel analytically.
#[derive(Debug, Clone, Copy)]
struct ThresholdTerms {
    alpha: f64,
    beta: f64,
    /// α·φ
    alpha_phi: f64,
    /// β·ρ
    beta_rho: f64,
}

fn threshold_terms(p: &ScenarioParams, k: &Kernel) -> Result<ThresholdTerms> {
    let (eta_s, eta_o) = (p.eta_s, p.eta_o);
    if k.cf <= 0.0 {
        return Err(ModelError::domain(
            "femto_law",
            p.femto_law.mean(),
            "f*_f(eta_s) = 1: femto visits have zero length relative to the session",
        ));
    }
    if k.ff <= 0.0 {
        return Err(ModelError::domain(
            "femto_law",
            p.femto_law.mean(),
            "f*_f(eta_s) = 0: no femto visit ever completes within a session",
        ));
    }
    let y1 = p.femto_law.weighted_moment_unchecked(eta_s);
    // f*_f(eta_s) - f*_f(eta_s + eta_o)
    let dec = p.femto_law.laplace_decrement_unchecked(eta_s, eta_o);
    let alpha = dec / k.ff;
    let beta = (eta_o * k.cf - eta_s * dec) / ((eta_s + eta_o) * k.cf);
    let alpha_phi = (y1 - dec / eta_o) / k.ff;
    let beta_rho = (k.cf * eta_o / (eta_s * (eta_s + eta_o)) - y1
        + eta_s * (dec / eta_o) / (eta_s + eta_o))
        / k.cf;
    Ok(ThresholdTerms {
        alpha: alpha.clamp(0.0, 1.0),
        beta: beta.clamp(0.0, 1.0),
        alpha_phi: alpha_phi.max(0.0),
        beta_rho: beta_rho.max(0.0),
    })
}

/// `(alpha, beta)`: probability that the threshold expires inside a completed
/// femto visit, and inside the visit in which the session ends.
pub fn handover_success_probs(p: &ScenarioParams) -> Result<(f64, f64)> {
    let t = threshold_terms(p, &Kernel::new(p))?;
    Ok((t.alpha, t.beta))
}

/// `Pr[N_b = k | start]`, the distribution of the number of cell crossings.
pub fn crossing_count_pmf(p: &ScenarioParams, start: Cell, k: u64) -> f64 {
    let kn = Kernel::new(p);
    let (rate_start, c_start, c_other, f_other) = match start {
        Cell::Macro => (kn.eta_m, kn.cm, kn.cf, kn.ff),
        Cell::Femto => (kn.eta_f, kn.cf, kn.cm, kn.fm),
    };
    let lead = rate_start / kn.eta_s;
    if k == 0 {
        // 1 - residual-life transform of the starting cell
        return 1.0 - lead * c_start;
    }
    let i = k / 2;
    if k.is_multiple_of(2) {
        lead * f_other * c_start * c_start * kn.q.powf((i - 1) as f64)
    } else {
        lead * c_other * c_start * kn.q.powf(i as f64)
    }
}

/// Expected handovers under threshold offloading, with its case terms.
pub fn to_handover_count(p: &ScenarioParams) -> Result<(f64, CaseTerms)> {
    let k = Kernel::new(p);
    let t = threshold_terms(p, &k)?;
    let cases = nt_cases(&k, &t);
    let (p1, p2) = case_probabilities(p);
    Ok((cases.combine(p1, p2), cases))
}

fn nt_cases(k: &Kernel, t: &ThresholdTerms) -> CaseTerms {
    let a = 1.0 + t.alpha;
    k.cases(a, [0.0, t.beta, 1.0, t.beta - t.alpha])
}

fn nb_cases(k: &Kernel) -> CaseTerms {
    k.cases(2.0, [0.0, 1.0, 1.0, 0.0])
}

/// `tau, sigma, xi, phi, rho` for the scenario.
pub fn offload_time_means(p: &ScenarioParams) -> Result<OffloadTimes> {
    let k = Kernel::new(p);
    let t = threshold_terms(p, &k)?;
    Ok(offload_times(p, &k, &t))
}

fn offload_times(p: &ScenarioParams, k: &Kernel, t: &ThresholdTerms) -> OffloadTimes {
    let femto = &p.femto_law;
    let y1 = femto.weighted_moment_unchecked(p.eta_s);
    let y2 = femto.residual_weighted_moment_unchecked(p.eta_s);
    let tau = y2 / femto.residual_laplace_unchecked(p.eta_s);
    let xi = y1 / k.ff;
    // conditional means are reported as 0 when their conditioning event has probability 0
    let phi = if t.alpha > 0.0 { t.alpha_phi / t.alpha } else { 0.0 };
    let rho = if t.beta > 0.0 { t.beta_rho / t.beta } else { 0.0 };
    OffloadTimes {
        tau,
        sigma: tau,
        xi,
        phi,
        rho,
    }
}

/// Expected femto offload time without threshold offloading, with its case terms.
pub fn baseline_offload_time(p: &ScenarioParams) -> Result<(f64, CaseTerms)> {
    let k = Kernel::new(p);
    let t = threshold_terms(p, &k)?;
    let times = offload_times(p, &k, &t);
    let cases = tb_cases(&k, &times);
    let (p1, p2) = case_probabilities(p);
    Ok((cases.combine(p1, p2), cases))
}

fn tb_cases(k: &Kernel, o: &OffloadTimes) -> CaseTerms {
    k.cases(o.xi, [0.0, o.sigma, o.tau, o.tau + o.sigma - o.xi])
}

/// Expected femto offload time under threshold offloading, with its case terms.
pub fn to_offload_time(p: &ScenarioParams) -> Result<(f64, CaseTerms)> {
    let k = Kernel::new(p);
    let t = threshold_terms(p, &k)?;
    let times = offload_times(p, &k, &t);
    let cases = tt_cases(&k, &t, &times);
    let (p1, p2) = case_probabilities(p);
    Ok((cases.combine(p1, p2), cases))
}

fn tt_cases(k: &Kernel, t: &ThresholdTerms, o: &OffloadTimes) -> CaseTerms {
    let a = t.alpha_phi;
    k.cases(a, [0.0, t.beta_rho, o.tau, o.tau + t.beta_rho - a])
}

/// Mean femto time per session spent in sessions that start inside a
/// femtocell and end there without any crossing,
/// `P2 · E[t_s; t_s < ψ_f] = P2 · (1 - ψ*_f(eta_s) - eta_s·Y2) / eta_s`.
///
/// The case sums start at one crossing, so this time is part of neither
/// `E[T_b]` nor `E[T_t]`; `E[T_b]` plus this term is the stationary femto
/// time `E[t_s]·eta_m/(eta_m + eta_f)`.
pub fn static_femto_time(p: &ScenarioParams) -> f64 {
    let femto = &p.femto_law;
    let psi = femto.residual_laplace_unchecked(p.eta_s);
    let y2 = femto.residual_weighted_moment_unchecked(p.eta_s);
    case_probabilities(p).1 * (1.0 - psi - p.eta_s * y2) / p.eta_s
}

/// Limit of Θ as `eta_o → 0` when a completed visit without handover costs
/// nothing (flow-chart counting). Only exits from a session-start femtocell
/// remain: `1 - P2·ψ*_f(eta_s) / E[N_b]`.
pub fn flowchart_theta_limit(p: &ScenarioParams) -> f64 {
    let exits = case_probabilities(p).1 * p.femto_law.residual_laplace_unchecked(p.eta_s);
    1.0 - exits / baseline_handover_count(p)
}

/// Printed closed form of the signaling overhead reduction ratio.
pub fn theta_closed_form(p: &ScenarioParams) -> f64 {
    let s = p.eta_s + p.eta_o;
    (p.eta_s + p.eta_o * p.femto_law.laplace_unchecked(s)) / (2.0 * s)
}

/// Printed closed form of the offloading capability ratio, in terms of
/// `Y1 = E[t_f e^{-eta_s t_f}]` and `Y2 = E[ψ_f e^{-eta_s ψ_f}]`.
pub fn lambda_closed_form(p: &ScenarioParams) -> f64 {
    let (eta_s, eta_o, eta_f) = (p.eta_s, p.eta_o, p.eta_f());
    let femto = &p.femto_law;
    let y1 = femto.weighted_moment_unchecked(eta_s);
    let y2 = femto.residual_weighted_moment_unchecked(eta_s);
    let cf = femto.laplace_complement_unchecked(eta_s);
    let dec = femto.laplace_decrement_unchecked(eta_s, eta_o);
    // eta_f·eta_o - eta_f(eta_s+eta_o)f*_f(eta_s) + eta_f·eta_s·f*_f(eta_s+eta_o)
    //   = eta_f·(eta_o(1 - f*_f(eta_s)) - eta_s·dec)
    let numerator = eta_f * (eta_o * cf - eta_s * dec) + eta_s * eta_s * (eta_s + eta_o) * y2;
    numerator / (eta_s * (eta_s + eta_o) * (eta_f * y1 + 2.0 * eta_s * y2))
}

/// Signaling overhead reduction ratio `(E[N_b] - E[N_t]) / E[N_b]`.
///
/// The case sums are checked against the printed closed form; on disagreement
/// the error carries the case-sum value.
pub fn theta(p: &ScenarioParams) -> Result<f64> {
    let e_nb = baseline_handover_count(p);
    let (e_nt, _) = to_handover_count(p)?;
    let value = (e_nb - e_nt) / e_nb;
    check_agreement("theta", value, theta_closed_form(p), CLOSED_FORM_TOLERANCE)?;
    Ok(value)
}

/// Offloading capability ratio `E[T_t] / E[T_b]`, checked like [`theta`].
pub fn lambda(p: &ScenarioParams) -> Result<f64> {
    let (e_tb, _) = baseline_offload_time(p)?;
    let (e_tt, _) = to_offload_time(p)?;
    let value = e_tt / e_tb;
    check_agreement("lambda", value, lambda_closed_form(p), CLOSED_FORM_TOLERANCE)?;
    Ok(value)
}

/// Evaluates every model quantity. Does not enforce closed-form agreement;
/// see [`AnalyticReport::check_closed_forms`].
pub fn analyze(p: &ScenarioParams) -> Result<AnalyticReport> {
    let k = Kernel::new(p);
    let t = threshold_terms(p, &k)?;
    let times = offload_times(p, &k, &t);
    let (p1, p2) = case_probabilities(p);

    let n_b_cases = nb_cases(&k);
    let n_t_cases = nt_cases(&k, &t);
    let t_b_cases = tb_cases(&k, &times);
    let t_t_cases = tt_cases(&k, &t, &times);

    let e_nb = baseline_handover_count(p);
    let e_nt = n_t_cases.combine(p1, p2);
    let e_tb = t_b_cases.combine(p1, p2);
    let e_tt = t_t_cases.combine(p1, p2);

    let x_scale = k.eta_f * k.eta_m / (k.eta_s * (k.eta_f + k.eta_m) * k.cq * k.cq);

    Ok(AnalyticReport {
        params: *p,
        prob_case1: p1,
        prob_case2: p2,
        macro_laplace: k.fm,
        femto_laplace: k.ff,
        alpha: t.alpha,
        beta: t.beta,
        tau: times.tau,
        sigma: times.sigma,
        xi: times.xi,
        phi: times.phi,
        rho: times.rho,
        x1: x_scale * k.ff * k.cm * k.cm,
        x2: x_scale * k.cf * k.cm,
        x3: x_scale * k.fm * k.cf * k.cf,
        y1: p.femto_law.weighted_moment_unchecked(p.eta_s),
        y2: p.femto_law.residual_weighted_moment_unchecked(p.eta_s),
        e_nb,
        e_nt,
        e_tb,
        e_tt,
        static_femto_time: static_femto_time(p),
        theta: (e_nb - e_nt) / e_nb,
        lambda: e_tt / e_tb,
        theta_closed_form: theta_closed_form(p),
        lambda_closed_form: lambda_closed_form(p),
        n_b_cases,
        n_t_cases,
        t_b_cases,
        t_t_cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_params(eta_s: f64, eta_m: f64, eta_f: f64, eta_o: f64) -> ScenarioParams {
        ScenarioParams::new(
            eta_s,
            DistributionSpec::exponential(1.0 / eta_m).unwrap(),
            DistributionSpec::exponential(1.0 / eta_f).unwrap(),
            eta_o,
        )
        .unwrap()
    }

    #[test]
    fn case_probability_examples() {
        let p = exp_params(1.0, 3.0, 3.0, 1.0);
        assert_eq!(case_probabilities(&p), (0.5, 0.5));
        let p = exp_params(1.0, 10.0, 40.0, 1.0);
        let (a, b) = case_probabilities(&p);
        assert_relative_eq!(a, 0.8, max_relative = 1e-15);
        assert_relative_eq!(b, 0.2, max_relative = 1e-15);
        assert_eq!(a + b, 1.0);
    }

    #[test]
    fn baseline_count_examples() {
        let p = exp_params(1.0 / 600.0, 1.0 / 60.0, 1.0 / 60.0, 1.0);
        assert_relative_eq!(baseline_handover_count(&p), 10.0, max_relative = 1e-14);
        let p = exp_params(2.0, 2.0, 2.0, 1.0);
        assert_relative_eq!(baseline_handover_count(&p), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn alpha_for_exponential_law() {
        let p = exp_params(1.0, 1.0, 1.0, 1.0);
        let (alpha, beta) = handover_success_probs(&p).unwrap();
        assert_relative_eq!(alpha, 1.0 / 3.0, max_relative = 1e-14);
        // given t_s < t_f, t_s ~ Exp(eta_s + eta_f), so the race against t_o is the same as for alpha
        assert_relative_eq!(beta, 1.0 / 3.0, max_relative = 1e-14);

        let p = exp_params(1.0, 1.0, 1.0, 1e12);
        let (alpha, beta) = handover_success_probs(&p).unwrap();
        assert_relative_eq!(alpha, 1.0, max_relative = 1e-9);
        assert_relative_eq!(beta, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn exponential_offload_times() {
        let p = exp_params(0.3, 1.0, 2.0, 0.7);
        let o = offload_time_means(&p).unwrap();
        assert_relative_eq!(o.tau, 1.0 / 2.3, max_relative = 1e-13);
        assert_relative_eq!(o.xi, 1.0 / 2.3, max_relative = 1e-13);
        assert_eq!(o.tau, o.sigma);
        assert!(o.phi <= o.xi);
    }

    #[test]
    fn pmf_zero_crossings() {
        let p = exp_params(1.0, 1.0, 5.0, 1.0);
        assert_relative_eq!(crossing_count_pmf(&p, Cell::Macro, 0), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn alternate_phi_and_rho_forms_agree() {
        let p = ScenarioParams::new(
            1.0 / 600.0,
            DistributionSpec::gamma(60.0, 60.0).unwrap(),
            DistributionSpec::gamma(60.0, 60000.0).unwrap(),
            1.0 / 60.0,
        )
        .unwrap();
        let (eta_s, eta_o) = (p.eta_s, p.eta_o);
        let f = &p.femto_law;
        let ff = f.laplace(eta_s).unwrap();
        let f2 = f.laplace(eta_s + eta_o).unwrap();
        let y1 = f.weighted_moment(eta_s).unwrap();
        let (alpha, beta) = handover_success_probs(&p).unwrap();
        let phi = (y1 + (f2 - ff) / eta_o) / (alpha * ff);
        let rho = (1.0 / eta_s + (1.0 / eta_o - 1.0 / eta_s) * ff
            - y1
            - (eta_o + eta_s * f2) / (eta_o * (eta_s + eta_o)))
            / (beta * (1.0 - ff));
        let beta_printed =
            (eta_o / (eta_s + eta_o) + eta_s / (eta_s + eta_o) * f2 - ff) / (1.0 - ff);
        let o = offload_time_means(&p).unwrap();
        assert_relative_eq!(o.phi, phi, max_relative = 1e-10);
        assert_relative_eq!(o.rho, rho, max_relative = 1e-10);
        assert_relative_eq!(beta, beta_printed, max_relative = 1e-12);
    }

    #[test]
    fn femto_time_adds_up_to_stationary_share() {
        for (m, vm, f, vf, ts) in [
            (60.0, 60.0, 60.0, 60000.0, 600.0),
            (60.0, 3600.0, 15.0, 1.5, 40.0),
            (10.0, 500.0, 200.0, 400.0, 3000.0),
        ] {
            let p = ScenarioParams::from_means(
                ts,
                DistributionSpec::gamma(m, vm).unwrap(),
                DistributionSpec::gamma(f, vf).unwrap(),
                30.0,
            )
            .unwrap();
            let r = analyze(&p).unwrap();
            assert_relative_eq!(
                r.e_tb + r.static_femto_time,
                ts * f / (m + f),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn degenerate_femto_law_is_rejected() {
        // eta_s·mean underflows: f*_f(eta_s) == 1
        let p = ScenarioParams::new(
            1e-300,
            DistributionSpec::exponential(1.0).unwrap(),
            DistributionSpec::exponential(1e-30).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(matches!(handover_success_probs(&p), Err(ModelError::Domain { .. })));
    }

    #[test]
    fn invalid_rates_rejected() {
        let d = DistributionSpec::exponential(1.0).unwrap();
        assert!(ScenarioParams::new(0.0, d, d, 1.0).is_err());
        assert!(ScenarioParams::new(1.0, d, d, -1.0).is_err());
        assert!(ScenarioParams::new(1.0, d, d, f64::INFINITY).is_err());
    }

    #[test]
    fn mismatch_error_carries_case_sum() {
        let err = check_agreement("theta", 0.5, 0.6, 1e-9).unwrap_err();
        match err {
            ModelError::ClosedFormMismatch { case_sum, .. } => assert_eq!(case_sum, 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
