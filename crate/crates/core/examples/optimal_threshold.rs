//! Optimal mean threshold for a session ten times the mean femto residence.
//!
//! ```text
//! cargo run --example optimal_threshold
//! ```

use femto_offload::optimizer::{find_optimal, objective_profile, OptimizerConfig};
use femto_offload::{DistributionSpec, ScenarioParams};

fn main() -> femto_offload::Result<()> {
    let eta_s = 1.0 / 600.0;
    let eta_f = 10.0 * eta_s;
    let p = ScenarioParams::new(
        eta_s,
        DistributionSpec::exponential(60.0)?,
        DistributionSpec::gamma(1.0 / eta_f, 1000.0 / eta_f)?,
        1.0,
    )?;
    let cfg = OptimizerConfig::with_delta(200.0)?;

    let start = std::time::Instant::now();
    let opt = find_optimal(&p, &cfg)?;
    let elapsed = start.elapsed();
    println!("eta_o*    = {:.5} /s", opt.eta_o_star);
    println!("E[t_o]*   = {:.5} s", opt.expected_threshold_star);
    println!("Theta     = {:.5}", opt.theta_at);
    println!("Lambda    = {:.5}", opt.lambda_at);
    println!("objective = {:.5}", opt.objective_value);
    println!("boundary  = {}", opt.boundary_hit);
    println!("search took {elapsed:.2?}");

    println!("\n{:>12} {:>9} {:>9} {:>9}", "eta_o", "Theta", "Lambda", "sum");
    for pt in objective_profile(&p, &cfg, 25)? {
        println!("{:>12.4e} {:>9.5} {:>9.5} {:>9.5}", pt.eta_o, pt.theta, pt.lambda, pt.objective);
    }
    Ok(())
}
