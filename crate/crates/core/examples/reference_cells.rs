//! Reproduces the analytic rows of the validation table.
//!
//! ```text
//! cargo run --example reference_cells
//! ```

use femto_offload::{analyze, DistributionSpec, ScenarioParams};

fn main() -> femto_offload::Result<()> {
    let macro_law = DistributionSpec::gamma(60.0, 60.0)?;
    let femto_law = DistributionSpec::gamma(60.0, 60_000.0)?;

    println!("{:>10} {:>10} {:>11} {:>10} {:>10}", "E[t_o] s", "N_t", "T_t s", "Theta %", "Lambda %");
    for threshold_mean in [60.0, 120.0, 180.0, 240.0] {
        let p = ScenarioParams::from_means(600.0, macro_law, femto_law, threshold_mean)?;
        let r = analyze(&p)?;
        r.check_closed_forms(1e-9)?;
        println!(
            "{:>10.0} {:>10.5} {:>11.5} {:>10.5} {:>10.5}",
            threshold_mean,
            r.e_nt,
            r.e_tt,
            100.0 * r.theta,
            100.0 * r.lambda
        );
    }
    Ok(())
}
