//! Threshold offloading (TO) for femtocell/macrocell networks.
//!
//! A UE session alternates between macrocell and femtocell residences. Under
//! threshold offloading the serving eNB defers every macro-to-femto handover
//! until an exponential threshold `t_o` expires, suppressing transient
//! handovers caused by brief femtocell visits at the cost of some offloaded
//! time. This crate provides:
//!
//! - residence-time laws with their transforms and samplers ([`residence`])
//! - closed-form renewal analytics for the handover reduction ratio Θ and the
//!   offloading capability ratio Λ ([`analytics`])
//! - a seeded Monte Carlo session simulator used as an independent oracle
//!   ([`simulator`])
//! - optimal threshold selection maximizing Θ + Λ ([`optimizer`])
//! - scenario files, trace ingestion, result tables and the command-line
//!   surface ([`scenario`], [`trace`], [`report`], [`cli`])

pub mod analytics;
pub mod cli;
pub mod error;
pub mod optimizer;
pub mod report;
pub mod residence;
pub mod scenario;
pub mod simulator;
pub mod stats;
pub mod sweep;
pub mod trace;

pub use analytics::{analyze, AnalyticReport, CaseTerms, OffloadTimes, ScenarioParams, Cell};
pub use error::{ModelError, Result};
pub use optimizer::{find_optimal, BoundaryHit, OptimizerConfig, Optimum};

pub use residence::{DistributionSpec, Family, RandomStream};

pub use simulator::{run_monte_carlo, CountingMode, MonteCarloReport, SessionOutcome, SimConfig};
pub use stats::SimEstimate;
