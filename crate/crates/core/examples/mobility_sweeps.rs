//! Sweep data for the mobility and session-length effects, written as CSV.
//!
//! ```text
//! cargo run --example mobility_sweeps > sweeps.csv
//! ```

use femto_offload::report::sweep_table;
use femto_offload::sweep::{run_sweep, SweepAxis, SweepRange};
use femto_offload::{DistributionSpec, ScenarioParams};

fn main() -> femto_offload::Result<()> {
    let session = 600.0;
    let thresholds = [0.01, 0.1, 0.5];

    // femto mean from 0.01 to 10 session lengths, macro mean 0.1 session lengths
    for k in thresholds {
        let base = ScenarioParams::from_means(
            session,
            DistributionSpec::gamma(session / 10.0, session / 10.0)?,
            DistributionSpec::gamma(session / 40.0, 1000.0 * session / 40.0)?,
            k * session,
        )?;
        let range = SweepRange { from: 0.01 * session, to: 10.0 * session, points: 16, log: true };
        let rows = run_sweep(&base, SweepAxis::FemtoMean, &range, None)?;
        println!("# femto_mean sweep, E[t_o] = {} s", k * session);
        print!("{}", sweep_table("femto_mean", "s", &rows).to_csv());
    }

    // femto variance from mean/100 to 1000·mean, femto mean 1/40 session
    let femto_mean = session / 40.0;
    for k in thresholds {
        let base = ScenarioParams::from_means(
            session,
            DistributionSpec::gamma(session / 10.0, session / 10.0)?,
            DistributionSpec::gamma(femto_mean, femto_mean)?,
            k * session,
        )?;
        let range = SweepRange { from: femto_mean / 100.0, to: 1000.0 * femto_mean, points: 16, log: true };
        let rows = run_sweep(&base, SweepAxis::FemtoVariance, &range, None)?;
        println!("# femto_variance sweep, E[t_o] = {} s", k * session);
        print!("{}", sweep_table("femto_variance", "s^2", &rows).to_csv());
    }

    // session mean from 1 to 150 s with 60 s macro and 15 s femto residences
    for threshold in [1.0, 5.0, 15.0] {
        let base = ScenarioParams::from_means(
            150.0,
            DistributionSpec::gamma(60.0, 60.0)?,
            DistributionSpec::gamma(15.0, 15.0)?,
            threshold,
        )?;
        let range = SweepRange { from: 1.0, to: 150.0, points: 16, log: false };
        let rows = run_sweep(&base, SweepAxis::SessionMean, &range, None)?;
        println!("# session_mean sweep, E[t_o] = {threshold} s");
        print!("{}", sweep_table("session_mean", "s", &rows).to_csv());
    }
    Ok(())
}
