//! Paper-mode against flow-chart counting of suppressed femto visits.
//!
//! ```text
//! cargo run --release --example counting_modes
//! ```

use femto_offload::analytics::flowchart_theta_limit;
use femto_offload::{analyze, run_monte_carlo, CountingMode, DistributionSpec, ScenarioParams, SimConfig};

fn main() -> femto_offload::Result<()> {
    let base = ScenarioParams::from_means(
        600.0,
        DistributionSpec::gamma(60.0, 60.0)?,
        DistributionSpec::gamma(60.0, 60_000.0)?,
        60.0,
    )?;
    println!("flow-chart limit of Theta as E[t_o] grows: {:.5}", flowchart_theta_limit(&base));
    println!("\n{:>10} {:>12} {:>12} {:>12}", "E[t_o] s", "analytic", "paper", "flowchart");
    for threshold in [1.0, 60.0, 600.0, 6.0e4, 6.0e6] {
        let p = base.with_eta_o(1.0 / threshold)?;
        let a = analyze(&p)?;
        let mut row = format!("{threshold:>10.0} {:>12.5}", a.theta);
        for mode in [CountingMode::Paper, CountingMode::Flowchart] {
            let mc = run_monte_carlo(&p, &SimConfig::new(200_000, 3, mode, 100)?)?;
            row += &format!(" {:>12.5}", mc.theta.mean);
        }
        println!("{row}");
    }
    Ok(())
}
