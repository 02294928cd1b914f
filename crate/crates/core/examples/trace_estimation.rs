//! Estimates residence and session means from a simulated handover trace and
//! prints the scenario file they suggest.
//!
//! ```text
//! cargo run --release --example trace_estimation [sessions] [trace.csv]
//! ```

use femto_offload::trace::{estimate, synthesize_trace};
use femto_offload::{DistributionSpec, ScenarioParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sessions: u64 = args.next().map_or(Ok(10_000), |s| s.parse())?;

    let truth = ScenarioParams::from_means(
        600.0,
        DistributionSpec::gamma(60.0, 60.0)?,
        DistributionSpec::gamma(60.0, 60_000.0)?,
        60.0,
    )?;
    let trace = synthesize_trace(&truth, sessions, 11);
    if let Some(path) = args.next() {
        trace.write_csv(std::fs::File::create(&path)?)?;
        println!("wrote {} events to {path}", trace.events.len());
    }

    let est = estimate(&trace);
    let show = |name: &str, e: Option<femto_offload::SimEstimate>, exact: f64| match e {
        Some(e) => println!(
            "{name:<8} {:>10.3} ± {:>8.3} s  (exact {exact}, {:+.2} standard errors)",
            e.mean,
            e.ci_halfwidth,
            (e.mean - exact) / e.std_error
        ),
        None => println!("{name:<8} not observable"),
    };
    show("E[t_f]", est.femto_mean, truth.femto_law.mean());
    show("E[t_m]", est.macro_mean, truth.macro_law.mean());
    show("E[t_s]", Some(est.session_mean), truth.session_mean());
    if let Some(c) = est.complete_femto {
        println!(
            "completely observed femto residences: {} with mean {:.3} s (biased low by truncation)",
            c.count, c.mean
        );
    }
    if let Some(s) = est.suggested_scenario() {
        println!("\n{}", s.to_toml_string());
    }
    Ok(())
}
