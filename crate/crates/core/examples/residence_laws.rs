//! Transforms of a heavy-variance Gamma law and their sampling counterparts.
//!
//! ```text
//! cargo run --release --example residence_laws
//! ```

use femto_offload::{DistributionSpec, RandomStream};

fn main() -> femto_offload::Result<()> {
    let law = DistributionSpec::gamma(60.0, 60_000.0)?;
    println!("{law}");
    println!("shape {:.5}  rate {:.5} /s", law.shape(), law.rate());
    println!("residual mean {:.3} s", law.residual_mean());

    println!("\n{:>10} {:>12} {:>14} {:>12} {:>14}", "s 1/s", "laplace", "E[T e^-sT]", "residual", "E[psi e^-spsi]");
    for s in [0.0, 1.0 / 600.0, 1.0 / 60.0, 0.1, 1.0] {
        println!(
            "{:>10.5} {:>12.7} {:>14.5} {:>12.7} {:>14.5}",
            s,
            law.laplace(s)?,
            law.weighted_moment(s)?,
            law.residual_laplace(s)?,
            law.residual_weighted_moment(s)?
        );
    }

    let n = 1_000_000;
    let mut rs = RandomStream::new(1, 0);
    let (mut sum, mut sum2, mut residual, mut transform) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let t = law.sample(&mut rs);
        sum += t;
        sum2 += t * t;
        let r = law.residual_sample(&mut rs);
        residual += r;
        transform += (-r / 600.0).exp();
    }
    let n = n as f64;
    let mean = sum / n;
    println!("\nsampled mean {:.3} s (exact {})", mean, law.mean());
    println!("sampled variance {:.0} s^2 (exact {})", sum2 / n - mean * mean, law.variance());
    println!("sampled residual mean {:.3} s (exact {:.3})", residual / n, law.residual_mean());
    println!(
        "sampled residual transform at 1/600 {:.5} (exact {:.5})",
        transform / n,
        law.residual_laplace(1.0 / 600.0)?
    );
    Ok(())
}
