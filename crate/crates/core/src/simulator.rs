//! Monte Carlo session simulator.
//!
//! Sessions are generated directly from the alternating renewal process the
//! analytics describe, so every analytic quantity has an independent
//! empirical counterpart here. Replication `r` always draws from
//! `RandomStream::new(seed, r)`; replications are grouped into contiguous
//! batches that run in parallel and are merged in batch order, which makes
//! every aggregate bitwise reproducible regardless of the worker count.
//!
//! Per-session tallies are physical: a session spent entirely inside its
//! starting femtocell has `T_b = T_t = t_s`. The aggregate offload times
//! follow the renewal model instead and count only sessions with at least
//! one crossing; the remainder is reported separately as `t_static`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::analytics::{case_probabilities, Cell, ScenarioParams};
use crate::error::{ModelError, Result};
use crate::residence::{RandomStream, ResidenceSampler};
use crate::stats::{batch_means, SimEstimate};

/// How a femto visit whose threshold never expired is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingMode {
    /// Completed visit without handover costs 1, as in the renewal model.
    #[default]
    Paper,
    /// Completed visit without handover costs 0, as in the TO flow chart.
    Flowchart,
}

impl fmt::Display for CountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountingMode::Paper => f.write_str("paper"),
            CountingMode::Flowchart => f.write_str("flowchart"),
        }
    }
}

impl FromStr for CountingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(CountingMode::Paper),
            "flowchart" => Ok(CountingMode::Flowchart),
            other => Err(format!("unknown counting mode `{other}` (expected paper | flowchart)")),
        }
    }
}

pub const DEFAULT_BATCH_COUNT: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub replications: u64,
    pub seed: u64,
    pub counting_mode: CountingMode,
    pub batch_count: u64,
}

impl SimConfig {
    /// Validated configuration. `batch_count` must be at least 2 and divide
    /// `replications`; a single replication runs as a single batch.
    pub fn new(
        replications: u64,
        seed: u64,
        counting_mode: CountingMode,
        batch_count: u64,
    ) -> Result<Self> {
        let cfg = SimConfig {
            replications,
            seed,
            counting_mode,
            batch_count,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Picks the largest divisor of `replications` not above
    /// [`DEFAULT_BATCH_COUNT`] (or one batch per replication when none exists).
    pub fn with_auto_batches(replications: u64, seed: u64, counting_mode: CountingMode) -> Result<Self> {
        Self::new(replications, seed, counting_mode, auto_batch_count(replications))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(ModelError::Config("replications must be >= 1".into()));
        }
        if self.replications == 1 {
            if self.batch_count != 1 {
                return Err(ModelError::Config(
                    "a single replication must run as a single batch".into(),
                ));
            }
            return Ok(());
        }
        if self.batch_count < 2 {
            return Err(ModelError::Config("batch_count must be >= 2".into()));
        }
        if !self.replications.is_multiple_of(self.batch_count) {
            return Err(ModelError::Config(format!(
                "batch_count {} does not divide replications {}",
                self.batch_count, self.replications
            )));
        }
        Ok(())
    }

    fn batch_size(&self) -> u64 {
        self.replications / self.batch_count
    }
}

fn auto_batch_count(replications: u64) -> u64 {
    if replications <= 1 {
        return 1;
    }
    (2..=DEFAULT_BATCH_COUNT.min(replications))
        .rev()
        .find(|b| replications.is_multiple_of(*b))
        .unwrap_or(replications)
}

/// End-cell classification of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Starts and ends in the macrocell with at least one crossing.
    Case11,
    /// Starts in the macrocell, ends in a femtocell.
    Case12,
    /// Starts in a femtocell, ends in the macrocell.
    Case21,
    /// Starts and ends in a femtocell with at least one crossing.
    Case22,
    /// The session ends inside its first residence.
    ZeroCrossing,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 5] = [
        CaseLabel::Case11,
        CaseLabel::Case12,
        CaseLabel::Case21,
        CaseLabel::Case22,
        CaseLabel::ZeroCrossing,
    ];

    fn index(self) -> usize {
        match self {
            CaseLabel::Case11 => 0,
            CaseLabel::Case12 => 1,
            CaseLabel::Case21 => 2,
            CaseLabel::Case22 => 3,
            CaseLabel::ZeroCrossing => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::Case11 => "1-1",
            CaseLabel::Case12 => "1-2",
            CaseLabel::Case21 => "2-1",
            CaseLabel::Case22 => "2-2",
            CaseLabel::ZeroCrossing => "degenerate-0-crossing",
        }
    }
}

/// Tallies of one simulated session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub start_cell: Cell,
    pub case_label: CaseLabel,
    pub n_crossings: u64,
    pub n_handover_baseline: u64,
    pub n_handover_to: u64,
    pub t_offload_baseline: f64,
    pub t_offload_to: f64,
    pub t_session: f64,
}

/// Position of a femto residence within its session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VisitKind {
    /// The session started inside this femtocell.
    SessionStart,
    /// Entered from the macrocell and left before the session ended.
    Completed,
    /// Entered from the macrocell; the session ended inside.
    SessionEnd,
}

/// One femto residence observed during a session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FemtoVisit {
    pub kind: VisitKind,
    /// Time since session start at which the residence began (0 for session-start residences).
    pub entered_at: f64,
    /// Time spent in the femtocell within the session.
    pub occupancy: f64,
    /// Whether the residence ended before the session did.
    pub left_before_session_end: bool,
    /// Drawn threshold; `None` for session-start residences.
    pub threshold: Option<f64>,
    pub threshold_expired: bool,
    pub offloaded: f64,
}

/// Receives the events of a simulated session in time order.
pub trait SessionObserver {
    fn femto_visit(&mut self, _visit: &FemtoVisit) {}

    /// A cell crossing at `at` seconds after session start into cell `into`.
    fn crossing(&mut self, _at: f64, _into: Cell) {}
}

impl SessionObserver for () {}

/// Samplers for one scenario, built once per run.
#[derive(Debug, Clone)]
pub struct SessionSampler {
    params: ScenarioParams,
    prob_macro_start: f64,
    macro_cell: ResidenceSampler,
    femto_cell: ResidenceSampler,
}

impl SessionSampler {
    pub fn new(params: &ScenarioParams) -> Self {
        SessionSampler {
            params: *params,
            prob_macro_start: case_probabilities(params).0,
            macro_cell: ResidenceSampler::new(&params.macro_law),
            femto_cell: ResidenceSampler::new(&params.femto_law),
        }
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    fn sampler(&self, cell: Cell) -> &ResidenceSampler {
        match cell {
            Cell::Macro => &self.macro_cell,
            Cell::Femto => &self.femto_cell,
        }
    }

    pub fn simulate(&self, rs: &mut RandomStream, mode: CountingMode) -> SessionOutcome {
        self.simulate_observed(rs, mode, &mut ())
    }

    /// Simulates one session, reporting femto visits and crossings to `observer`.
    pub fn simulate_observed<O: SessionObserver + ?Sized>(
        &self,
        rs: &mut RandomStream,
        mode: CountingMode,
        observer: &mut O,
    ) -> SessionOutcome {
        let start_cell = if rs.random::<f64>() < self.prob_macro_start {
            Cell::Macro
        } else {
            Cell::Femto
        };
        let t_session = rs.exponential(self.params.eta_s);

        let mut cell = start_cell;
        let mut now = 0.0;
        let mut residence = self.sampler(cell).residual_sample(rs);
        let mut first = true;

        let mut n_crossings = 0u64;
        let mut n_handover_to = 0u64;
        let mut t_offload_baseline = 0.0;
        let mut t_offload_to = 0.0;

        loop {
            let end = now + residence;
            let completed = end < t_session;
            let occupancy = if completed { residence } else { t_session - now };

            if cell == Cell::Femto {
                t_offload_baseline += occupancy;
                let visit = if first {
                    // already attached: fully offloaded, only its exit is signaled
                    t_offload_to += occupancy;
                    n_handover_to += u64::from(completed);
                    FemtoVisit {
                        kind: VisitKind::SessionStart,
                        entered_at: 0.0,
                        occupancy,
                        left_before_session_end: completed,
                        threshold: None,
                        threshold_expired: false,
                        offloaded: occupancy,
                    }
                } else {
                    let threshold = rs.exponential(self.params.eta_o);
                    let expired = threshold < occupancy;
                    let offloaded = if expired { occupancy - threshold } else { 0.0 };
                    t_offload_to += offloaded;
                    n_handover_to += match (completed, expired, mode) {
                        (true, true, _) => 2,
                        (true, false, CountingMode::Paper) => 1,
                        (true, false, CountingMode::Flowchart) => 0,
                        (false, true, _) => 1,
                        (false, false, _) => 0,
                    };
                    FemtoVisit {
                        kind: if completed {
                            VisitKind::Completed
                        } else {
                            VisitKind::SessionEnd
                        },
                        entered_at: now,
                        occupancy,
                        left_before_session_end: completed,
                        threshold: Some(threshold),
                        threshold_expired: expired,
                        offloaded,
                    }
                };
                observer.femto_visit(&visit);
            }

            if !completed {
                break;
            }
            n_crossings += 1;
            cell = match cell {
                Cell::Macro => Cell::Femto,
                Cell::Femto => Cell::Macro,
            };
            observer.crossing(end, cell);
            now = end;
            residence = self.sampler(cell).sample(rs);
            first = false;
        }

        let case_label = match (n_crossings, start_cell, cell) {
            (0, _, _) => CaseLabel::ZeroCrossing,
            (_, Cell::Macro, Cell::Macro) => CaseLabel::Case11,
            (_, Cell::Macro, Cell::Femto) => CaseLabel::Case12,
            (_, Cell::Femto, Cell::Macro) => CaseLabel::Case21,
            (_, Cell::Femto, Cell::Femto) => CaseLabel::Case22,
        };

        // occupancies are summed one visit at a time
        let slack = t_session * 1e-9;
        debug_assert!(n_handover_to <= n_crossings);
        debug_assert!(0.0 <= t_offload_to && t_offload_to <= t_offload_baseline + slack);
        debug_assert!(t_offload_baseline <= t_session + slack);

        SessionOutcome {
            start_cell,
            case_label,
            n_crossings,
            n_handover_baseline: n_crossings,
            n_handover_to,
            t_offload_baseline,
            t_offload_to,
            t_session,
        }
    }
}

/// Simulates a single session.
pub fn simulate_session(
    p: &ScenarioParams,
    rs: &mut RandomStream,
    mode: CountingMode,
) -> SessionOutcome {
    SessionSampler::new(p).simulate(rs, mode)
}

/// Aggregated Monte Carlo estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: SimConfig,
    pub n_b: SimEstimate,
    pub n_t: SimEstimate,
    pub t_b: SimEstimate,
    pub t_t: SimEstimate,
    /// Femto time of sessions that never cross a cell boundary. Such a
    /// session starts and ends in the same femtocell; like the renewal
    /// model, `t_b` and `t_t` leave it out.
    pub t_static: SimEstimate,
    /// `(mean N_b - mean N_t) / mean N_b`
    pub theta: SimEstimate,
    /// `mean T_t / mean T_b`
    pub lambda: SimEstimate,
    /// Fraction of sessions starting in the macrocell.
    pub start_macro: SimEstimate,
    /// Session counts per [`CaseLabel`], in [`CaseLabel::ALL`] order.
    pub case_counts: [u64; 5],
    /// `crossing_histogram[k]` sessions had exactly `k` crossings.
    pub crossing_histogram: Vec<u64>,
    /// Crossing histograms split by start cell (macro, femto).
    pub crossing_histogram_by_start: [Vec<u64>; 2],
}

impl MonteCarloReport {
    pub fn case_count(&self, label: CaseLabel) -> u64 {
        self.case_counts[label.index()]
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    sessions: u64,
    n_b: u64,
    n_t: u64,
    t_b: f64,
    t_t: f64,
    t_static: f64,
    start_macro: u64,
    cases: [u64; 5],
    hist: [Vec<u64>; 2],
}

impl Tally {
    fn record(&mut self, o: &SessionOutcome) {
        self.sessions += 1;
        self.n_b += o.n_handover_baseline;
        self.n_t += o.n_handover_to;
        if o.n_crossings == 0 {
            self.t_static += o.t_offload_baseline;
        } else {
            self.t_b += o.t_offload_baseline;
            self.t_t += o.t_offload_to;
        }
        let start = usize::from(o.start_cell == Cell::Femto);
        self.start_macro += u64::from(start == 0);
        self.cases[o.case_label.index()] += 1;
        let k = o.n_crossings as usize;
        let hist = &mut self.hist[start];
        if hist.len() <= k {
            hist.resize(k + 1, 0);
        }
        hist[k] += 1;
    }

    fn merge(&mut self, other: &Tally) {
        self.sessions += other.sessions;
        self.n_b += other.n_b;
        self.n_t += other.n_t;
        self.t_b += other.t_b;
        self.t_t += other.t_t;
        self.t_static += other.t_static;
        self.start_macro += other.start_macro;
        for (a, b) in self.cases.iter_mut().zip(other.cases) {
            *a += b;
        }
        for (mine, theirs) in self.hist.iter_mut().zip(&other.hist) {
            if mine.len() < theirs.len() {
                mine.resize(theirs.len(), 0);
            }
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
    }

    fn mean(&self, sum: f64) -> f64 {
        sum / self.sessions as f64
    }

    fn theta(&self) -> f64 {
        (self.n_b as f64 - self.n_t as f64) / self.n_b as f64
    }

    fn lambda(&self) -> f64 {
        self.t_t / self.t_b
    }
}

fn run_batches<T, F>(cfg: &SimConfig, run: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    let size = cfg.batch_size();
    (0..cfg.batch_count)
        .into_par_iter()
        .map(|b| run(b * size..(b + 1) * size))
        .collect()
}

/// Runs `cfg.replications` independent sessions and aggregates them.
pub fn run_monte_carlo(p: &ScenarioParams, cfg: &SimConfig) -> Result<MonteCarloReport> {
    cfg.validate()?;
    let sampler = SessionSampler::new(p);
    let batches = run_batches(cfg, |range| {
        let mut tally = Tally::default();
        for r in range {
            let mut rs = RandomStream::new(cfg.seed, r);
            let outcome = sampler.simulate(&mut rs, cfg.counting_mode);
            tally.record(&outcome);
        }
        tally
    });

    let mut total = Tally::default();
    for b in &batches {
        total.merge(b);
    }
    let n = total.sessions;
    let per_batch = |f: &dyn Fn(&Tally) -> f64| batches.iter().map(f).collect::<Vec<_>>();

    let n_b = batch_means(
        total.mean(total.n_b as f64),
        &per_batch(&|t| t.mean(t.n_b as f64)),
        n,
    );
    let n_t = batch_means(
        total.mean(total.n_t as f64),
        &per_batch(&|t| t.mean(t.n_t as f64)),
        n,
    );
    let t_b = batch_means(total.mean(total.t_b), &per_batch(&|t| t.mean(t.t_b)), n);
    let t_t = batch_means(total.mean(total.t_t), &per_batch(&|t| t.mean(t.t_t)), n);
    let t_static = batch_means(
        total.mean(total.t_static),
        &per_batch(&|t| t.mean(t.t_static)),
        n,
    );
    let theta = batch_means(total.theta(), &per_batch(&Tally::theta), n);
    let lambda = batch_means(total.lambda(), &per_batch(&Tally::lambda), n);
    let start_macro = batch_means(
        total.mean(total.start_macro as f64),
        &per_batch(&|t| t.mean(t.start_macro as f64)),
        n,
    );

    let [macro_hist, femto_hist] = total.hist.clone();
    let mut crossing_histogram = vec![0; macro_hist.len().max(femto_hist.len())];
    for h in [&macro_hist, &femto_hist] {
        for (a, b) in crossing_histogram.iter_mut().zip(h) {
            *a += b;
        }
    }

    Ok(MonteCarloReport {
        config: *cfg,
        n_b,
        n_t,
        t_b,
        t_t,
        t_static,
        theta,
        lambda,
        start_macro,
        case_counts: total.cases,
        crossing_histogram,
        crossing_histogram_by_start: [macro_hist, femto_hist],
    })
}

/// Empirical per-visit quantities, for comparison with the analytic
/// `alpha, beta, tau, sigma, xi, phi, rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitProbe {
    /// Fraction of completed entered visits whose threshold expired.
    pub alpha: SimEstimate,
    /// Fraction of session-ending entered visits whose threshold expired.
    pub beta: SimEstimate,
    /// Mean length of session-start residences that end before the session.
    pub tau: SimEstimate,
    /// Mean occupancy of session-ending entered visits.
    pub sigma: SimEstimate,
    /// Mean length of completed entered visits.
    pub xi: SimEstimate,
    /// Mean offloaded time of completed visits whose threshold expired.
    pub phi: SimEstimate,
    /// Mean offloaded time of session-ending visits whose threshold expired.
    pub rho: SimEstimate,
    pub completed_visits: u64,
    pub ending_visits: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct VisitTally {
    completed: u64,
    completed_expired: u64,
    completed_length: f64,
    completed_offload: f64,
    ending: u64,
    ending_expired: u64,
    ending_age: f64,
    ending_offload: f64,
    start_left: u64,
    start_residual: f64,
}

impl SessionObserver for VisitTally {
    fn femto_visit(&mut self, v: &FemtoVisit) {
        match v.kind {
            VisitKind::SessionStart => {
                if v.left_before_session_end {
                    self.start_left += 1;
                    self.start_residual += v.occupancy;
                }
            }
            VisitKind::Completed => {
                self.completed += 1;
                self.completed_length += v.occupancy;
                if v.threshold_expired {
                    self.completed_expired += 1;
                    self.completed_offload += v.offloaded;
                }
            }
            VisitKind::SessionEnd => {
                self.ending += 1;
                self.ending_age += v.occupancy;
                if v.threshold_expired {
                    self.ending_expired += 1;
                    self.ending_offload += v.offloaded;
                }
            }
        }
    }
}

impl VisitTally {
    fn merge(&mut self, o: &VisitTally) {
        self.completed += o.completed;
        self.completed_expired += o.completed_expired;
        self.completed_length += o.completed_length;
        self.completed_offload += o.completed_offload;
        self.ending += o.ending;
        self.ending_expired += o.ending_expired;
        self.ending_age += o.ending_age;
        self.ending_offload += o.ending_offload;
        self.start_left += o.start_left;
        self.start_residual += o.start_residual;
    }
}

fn ratio(num: f64, den: u64) -> f64 {
    num / den as f64
}

/// Tags every simulated femto visit and returns the conditional empirical
/// means and frequencies.
pub fn visit_level_probe(p: &ScenarioParams, cfg: &SimConfig) -> Result<VisitProbe> {
    cfg.validate()?;
    let sampler = SessionSampler::new(p);
    let batches = run_batches(cfg, |range| {
        let mut tally = VisitTally::default();
        for r in range {
            let mut rs = RandomStream::new(cfg.seed, r);
            sampler.simulate_observed(&mut rs, cfg.counting_mode, &mut tally);
        }
        tally
    });
    let mut total = VisitTally::default();
    for b in &batches {
        total.merge(b);
    }
    let n = cfg.replications;
    let est = |f: &dyn Fn(&VisitTally) -> f64| {
        let values: Vec<f64> = batches.iter().map(f).collect();
        batch_means(f(&total), &values, n)
    };
    Ok(VisitProbe {
        alpha: est(&|t| ratio(t.completed_expired as f64, t.completed)),
        beta: est(&|t| ratio(t.ending_expired as f64, t.ending)),
        tau: est(&|t| ratio(t.start_residual, t.start_left)),
        sigma: est(&|t| ratio(t.ending_age, t.ending)),
        xi: est(&|t| ratio(t.completed_length, t.completed)),
        phi: est(&|t| ratio(t.completed_offload, t.completed_expired)),
        rho: est(&|t| ratio(t.ending_offload, t.ending_expired)),
        completed_visits: total.completed,
        ending_visits: total.ending,
    })
}
