//! Handover traces and offline parameter estimation.
//!
//! A trace is a CSV file with header `ue_id,event,timestamp_seconds` and one
//! row per event: `session_start`, `femto_enter`, `femto_exit` or
//! `session_end`. Rows of different UEs may interleave, but each UE's rows
//! must be time-ordered and form complete sessions in which enters and exits
//! alternate. A session that starts inside a femtocell is written either
//! with a `femto_enter` at the session-start timestamp or by letting its
//! first femto event be a `femto_exit`.
//!
//! Every session observes the stationary alternating renewal process over
//! `[start, end]`, so residence means are estimated as ratios of total time
//! in a cell to the number of residences left (renewal-reward estimators):
//!
//! ```text
//! E[t_f] = Σ femto time / Σ femto exits
//! E[t_m] = Σ macro time / Σ femto entries
//! E[t_s] = mean(session_end - session_start)
//! ```
//!
//! Standard errors come from the delta method over sessions. Means and
//! variances of the residences that are completely observed inside a
//! session are reported alongside as descriptive statistics.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

use crate::analytics::{Cell, ScenarioParams};
use crate::residence::RandomStream;
use crate::scenario::{CellSection, ScenarioFile, SessionSection};
use crate::simulator::{CountingMode, SessionObserver, SessionSampler};
use crate::stats::{t_quantile, SimEstimate};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("trace contains no sessions")]
    Empty,
}

fn row_error(line: u64, message: impl Into<String>) -> TraceError {
    TraceError::Row {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SessionStart,
    FemtoEnter,
    FemtoExit,
    SessionEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub ue_id: String,
    pub event: EventKind,
    pub timestamp_seconds: f64,
}

/// Tallies of one complete session.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub ue_id: String,
    pub start: f64,
    pub end: f64,
    pub femto_time: f64,
    pub macro_time: f64,
    /// Entries into a femtocell from the macrocell.
    pub femto_entries: u64,
    pub femto_exits: u64,
    /// Femto residences whose entry and exit both lie inside the session.
    pub complete_femto: Vec<f64>,
    /// Macro residences between a femto exit and the next femto entry.
    pub complete_macro: Vec<f64>,
}

impl SessionRecord {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Position {
    /// In the macrocell; `at_start` while no femto event has been seen.
    Macro { since: f64, at_start: bool, after_exit: bool },
    Femto { since: f64, entered: bool },
}

#[derive(Debug)]
struct OpenSession {
    line: u64,
    record: SessionRecord,
    position: Position,
}

#[derive(Debug, Default)]
struct UeState {
    last_time: f64,
    open: Option<OpenSession>,
}

/// A validated trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLog {
    pub events: Vec<TraceEvent>,
    pub sessions: Vec<SessionRecord>,
}

impl TraceLog {
    /// Validates `events`; row `i` is reported as line `i + 2` (after the header).
    pub fn from_events(events: Vec<TraceEvent>) -> Result<Self, TraceError> {
        let lines: Vec<u64> = (0..events.len() as u64).map(|i| i + 2).collect();
        Self::validate(events, &lines)
    }

    pub fn read<R: Read>(reader: R) -> Result<Self, TraceError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| row_error(1, e.to_string()))?
            .clone();
        let mut events = Vec::new();
        let mut lines = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                row_error(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let event: TraceEvent = record
                .deserialize(Some(&headers))
                .map_err(|e| row_error(line, e.to_string()))?;
            events.push(event);
            lines.push(line);
        }
        Self::validate(events, &lines)
    }

    pub fn parse_str(text: &str) -> Result<Self, TraceError> {
        Self::read(text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, TraceError> {
        let file = std::fs::File::open(path).map_err(|source| TraceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for e in &self.events {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    fn validate(events: Vec<TraceEvent>, lines: &[u64]) -> Result<Self, TraceError> {
        let mut ues: HashMap<String, UeState> = HashMap::new();
        let mut sessions = Vec::new();

        for (e, &line) in events.iter().zip(lines) {
            let t = e.timestamp_seconds;
            if !t.is_finite() {
                return Err(row_error(line, format!("non-finite timestamp {t}")));
            }
            let ue = ues.entry(e.ue_id.clone()).or_insert(UeState {
                last_time: f64::NEG_INFINITY,
                open: None,
            });
            if t < ue.last_time {
                return Err(row_error(
                    line,
                    format!(
                        "timestamp {t} of UE {} precedes its previous event at {}",
                        e.ue_id, ue.last_time
                    ),
                ));
            }
            ue.last_time = t;

            let Some(open) = ue.open.as_mut() else {
                if e.event != EventKind::SessionStart {
                    return Err(row_error(
                        line,
                        format!("{:?} for UE {} outside a session", e.event, e.ue_id),
                    ));
                }
                ue.open = Some(OpenSession {
                    line,
                    record: SessionRecord {
                        ue_id: e.ue_id.clone(),
                        start: t,
                        ..Default::default()
                    },
                    position: Position::Macro {
                        since: t,
                        at_start: true,
                        after_exit: false,
                    },
                });
                continue;
            };

            let rec = &mut open.record;
            match (e.event, open.position) {
                (EventKind::SessionStart, _) => {
                    return Err(row_error(
                        line,
                        format!(
                            "session_start for UE {} while its session from line {} is open",
                            e.ue_id, open.line
                        ),
                    ))
                }
                (EventKind::FemtoEnter, Position::Femto { .. }) => {
                    return Err(row_error(
                        line,
                        format!("femto_enter for UE {} while already in a femtocell", e.ue_id),
                    ))
                }
                (EventKind::FemtoEnter, Position::Macro { since, at_start, after_exit }) => {
                    let attached = at_start && t == rec.start;
                    if !attached {
                        rec.macro_time += t - since;
                        rec.femto_entries += 1;
                        if after_exit {
                            rec.complete_macro.push(t - since);
                        }
                    }
                    open.position = Position::Femto {
                        since: t,
                        entered: !attached,
                    };
                }
                (EventKind::FemtoExit, Position::Macro { since, at_start: true, .. }) => {
                    // session started inside a femtocell
                    rec.femto_time += t - since;
                    rec.femto_exits += 1;
                    open.position = Position::Macro {
                        since: t,
                        at_start: false,
                        after_exit: true,
                    };
                }
                (EventKind::FemtoExit, Position::Macro { .. }) => {
                    return Err(row_error(
                        line,
                        format!("femto_exit for UE {} without a matching femto_enter", e.ue_id),
                    ))
                }
                (EventKind::FemtoExit, Position::Femto { since, entered }) => {
                    rec.femto_time += t - since;
                    rec.femto_exits += 1;
                    if entered {
                        rec.complete_femto.push(t - since);
                    }
                    open.position = Position::Macro {
                        since: t,
                        at_start: false,
                        after_exit: true,
                    };
                }
                (EventKind::SessionEnd, position) => {
                    match position {
                        Position::Macro { since, .. } => rec.macro_time += t - since,
                        Position::Femto { since, .. } => rec.femto_time += t - since,
                    }
                    rec.end = t;
                    sessions.push(ue.open.take().expect("open session").record);
                }
            }
        }

        let mut unfinished: Vec<&OpenSession> = ues.values().filter_map(|u| u.open.as_ref()).collect();
        unfinished.sort_by_key(|o| o.line);
        if let Some(o) = unfinished.first() {
            return Err(row_error(
                o.line,
                format!("session of UE {} has no session_end", o.record.ue_id),
            ));
        }
        if sessions.is_empty() {
            return Err(TraceError::Empty);
        }
        Ok(TraceLog { events, sessions })
    }
}

/// Count, mean and unbiased variance of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
}

impl SampleSummary {
    fn of<'a>(values: impl Iterator<Item = &'a f64>) -> Option<Self> {
        let v: Vec<f64> = values.copied().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let variance = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            f64::NAN
        };
        Some(SampleSummary {
            count: v.len() as u64,
            mean,
            variance,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub sessions: u64,
    /// `E[t_f]`; `None` when no femto exit was observed.
    pub femto_mean: Option<SimEstimate>,
    /// `E[t_m]`; `None` when no femto entry was observed.
    pub macro_mean: Option<SimEstimate>,
    /// `E[t_s]`.
    pub session_mean: SimEstimate,
    pub session_variance: f64,
    pub complete_femto: Option<SampleSummary>,
    pub complete_macro: Option<SampleSummary>,
}

fn with_interval(mean: f64, std_error: f64, n: u64) -> SimEstimate {
    let ci_halfwidth = if n > 1 {
        t_quantile(n - 1) * std_error
    } else {
        f64::INFINITY
    };
    SimEstimate {
        mean,
        ci_halfwidth,
        std_error,
        n,
    }
}

// Σy/Σx over sessions with its delta-method standard error.
fn ratio_estimate(pairs: &[(f64, f64)]) -> Option<SimEstimate> {
    let n = pairs.len() as u64;
    let sy: f64 = pairs.iter().map(|p| p.0).sum();
    let sx: f64 = pairs.iter().map(|p| p.1).sum();
    if sx == 0.0 {
        return None;
    }
    let r = sy / sx;
    let std_error = if n > 1 {
        let nf = n as f64;
        let ss: f64 = pairs.iter().map(|(y, x)| (y - r * x).powi(2)).sum();
        (ss * nf / (nf - 1.0)).sqrt() / sx
    } else {
        f64::INFINITY
    };
    Some(with_interval(r, std_error, n))
}

/// Renewal-reward estimates of the residence and session means.
pub fn estimate(trace: &TraceLog) -> TraceEstimate {
    let s = &trace.sessions;
    let n = s.len() as u64;
    let femto: Vec<(f64, f64)> = s.iter().map(|r| (r.femto_time, r.femto_exits as f64)).collect();
    let macro_pairs: Vec<(f64, f64)> = s.iter().map(|r| (r.macro_time, r.femto_entries as f64)).collect();
    let lengths = SampleSummary::of(s.iter().map(|r| r.end - r.start).collect::<Vec<_>>().iter())
        .expect("validated traces are non-empty");
    let se = if n > 1 {
        (lengths.variance / n as f64).sqrt()
    } else {
        f64::INFINITY
    };
    TraceEstimate {
        sessions: n,
        femto_mean: ratio_estimate(&femto),
        macro_mean: ratio_estimate(&macro_pairs),
        session_mean: with_interval(lengths.mean, se, n),
        session_variance: lengths.variance,
        complete_femto: SampleSummary::of(s.iter().flat_map(|r| r.complete_femto.iter())),
        complete_macro: SampleSummary::of(s.iter().flat_map(|r| r.complete_macro.iter())),
    }
}

impl TraceEstimate {
    /// Scenario fragment built from the estimates. Residence variances come
    /// from completely observed residences (gamma family) when at least two
    /// exist, otherwise the law is exponential.
    pub fn suggested_scenario(&self) -> Option<ScenarioFile> {
        let cell = |mean: &Option<SimEstimate>, complete: &Option<SampleSummary>| {
            let mean = mean.as_ref()?.mean;
            Some(match complete {
                Some(c) if c.count >= 2 && c.variance > 0.0 => CellSection {
                    family: crate::residence::Family::Gamma,
                    mean_seconds: mean,
                    variance_seconds2: Some(c.variance),
                },
                _ => CellSection {
                    family: crate::residence::Family::Exponential,
                    mean_seconds: mean,
                    variance_seconds2: None,
                },
            })
        };
        Some(ScenarioFile {
            session: SessionSection {
                mean_seconds: self.session_mean.mean,
            },
            macro_cell: cell(&self.macro_mean, &self.complete_macro)?,
            femto_cell: cell(&self.femto_mean, &self.complete_femto)?,
            threshold: None,
            simulation: None,
            optimizer: None,
        })
    }
}

#[derive(Default)]
struct Crossings(Vec<(f64, Cell)>);

impl SessionObserver for Crossings {
    fn crossing(&mut self, at: f64, into: Cell) {
        self.0.push((at, into));
    }
}

/// Trace of `sessions` simulated sessions, one UE per session, each starting
/// at time 0. Session `i` draws from `RandomStream::new(seed, i)`.
pub fn synthesize_trace(p: &ScenarioParams, sessions: u64, seed: u64) -> TraceLog {
    let sampler = SessionSampler::new(p);
    let mut events = Vec::new();
    for i in 0..sessions {
        let mut rs = RandomStream::new(seed, i);
        let mut crossings = Crossings::default();
        let outcome = sampler.simulate_observed(&mut rs, CountingMode::Paper, &mut crossings);
        let ue_id = i.to_string();
        let push = |events: &mut Vec<TraceEvent>, event, t| {
            events.push(TraceEvent {
                ue_id: ue_id.clone(),
                event,
                timestamp_seconds: t,
            })
        };
        push(&mut events, EventKind::SessionStart, 0.0);
        if outcome.start_cell == Cell::Femto {
            push(&mut events, EventKind::FemtoEnter, 0.0);
        }
        for &(at, into) in &crossings.0 {
            let kind = match into {
                Cell::Femto => EventKind::FemtoEnter,
                Cell::Macro => EventKind::FemtoExit,
            };
            push(&mut events, kind, at);
        }
        push(&mut events, EventKind::SessionEnd, outcome.t_session);
    }
    TraceLog::from_events(events).expect("simulated traces are well formed")
}
