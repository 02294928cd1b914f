//! Analytic against simulated metrics for the four validation columns.
//!
//! ```text
//! cargo run --release --example monte_carlo_validation [replications] [seed]
//! ```

use femto_offload::report::validation_table;
use femto_offload::{analyze, run_monte_carlo, CountingMode, DistributionSpec, ScenarioParams, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let replications: u64 = args.next().map_or(Ok(1_000_000), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(20140601), |s| s.parse())?;
    let cfg = SimConfig::with_auto_batches(replications, seed, CountingMode::Paper)?;

    let macro_law = DistributionSpec::gamma(60.0, 60.0)?;
    let femto_law = DistributionSpec::gamma(60.0, 60_000.0)?;
    for threshold_mean in [60.0, 120.0, 180.0, 240.0] {
        let p = ScenarioParams::from_means(600.0, macro_law, femto_law, threshold_mean)?;
        let start = std::time::Instant::now();
        let mc = run_monte_carlo(&p, &cfg)?;
        let elapsed = start.elapsed();
        println!("# E[t_o] = {threshold_mean} s, {replications} sessions in {elapsed:.2?}");
        print!("{}", validation_table(&analyze(&p)?, &mc).to_text());
        println!();
    }
    Ok(())
}
