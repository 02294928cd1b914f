mod common;

use common::*;
use femto_offload::optimizer::{objective, objective_profile};
use femto_offload::{analyze, find_optimal, BoundaryHit, DistributionSpec, OptimizerConfig, ScenarioParams};
use std::time::{Duration, Instant};

const DENSE: usize = 10_000;

fn frequent_visits(femto_variance_factor: f64) -> ScenarioParams {
    let eta_s = 1.0 / 600.0;
    let femto_mean = 0.1 / eta_s;
    ScenarioParams::new(
        eta_s,
        DistributionSpec::gamma(60.0, 60.0).unwrap(),
        DistributionSpec::gamma(femto_mean, femto_variance_factor * femto_mean).unwrap(),
        1.0,
    )
    .unwrap()
}

#[test]
fn matches_dense_grid_argmax() {
    let cfg = OptimizerConfig::default();
    let step = (cfg.delta / cfg.epsilon_rate).ln() / (DENSE - 1) as f64;
    let mut gen = ScenarioGen::new(2024);
    for _ in 0..25 {
        let p = gen.scenario();
        let opt = find_optimal(&p, &cfg).unwrap();
        let grid = objective_profile(&p, &cfg, DENSE).unwrap();
        let best = grid
            .iter()
            .max_by(|a, b| a.objective.total_cmp(&b.objective))
            .unwrap();
        assert!(opt.objective_value >= best.objective - 1e-12, "{p:?}");
        let distance = (opt.eta_o_star.ln() - best.eta_o.ln()).abs();
        assert!(
            distance <= step * (1.0 + 1e-9),
            "{:?}: optimizer {} vs grid {}",
            p,
            opt.eta_o_star,
            best.eta_o
        );
    }
}

#[test]
fn single_call_is_fast() {
    let p = frequent_visits(1000.0);
    let start = Instant::now();
    let _ = find_optimal(&p, &OptimizerConfig::default()).unwrap();
    assert!(start.elapsed() < Duration::from_secs(1));
}

#[test]
fn frequent_visits_has_interior_unimodal_optimum() {
    let cfg = OptimizerConfig::default();
    for factor in [100.0, 1000.0, 10_000.0] {
        let p = frequent_visits(factor);
        let opt = find_optimal(&p, &cfg).unwrap();
        assert_eq!(opt.boundary_hit, BoundaryHit::None, "{factor}");
        assert_eq!(opt.expected_threshold_star, 1.0 / opt.eta_o_star);

        // rises then falls across the profile
        let profile = objective_profile(&p, &cfg, 400).unwrap();
        let peak = profile
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.objective.total_cmp(&b.1.objective))
            .unwrap()
            .0;
        assert!(peak > 0 && peak < profile.len() - 1);
        assert!(profile[..=peak].windows(2).all(|w| w[1].objective >= w[0].objective - 1e-12));
        assert!(profile[peak..].windows(2).all(|w| w[1].objective <= w[0].objective + 1e-12));
    }
    let opt = find_optimal(&frequent_visits(1000.0), &cfg).unwrap();
    assert!(relative_error(opt.expected_threshold_star, 4.60375) < 1e-5);
}

#[test]
fn optimum_recomputes_from_analysis() {
    let p = reference_scenario(60.0);
    let opt = find_optimal(&p, &OptimizerConfig::default()).unwrap();
    let r = analyze(&p.with_eta_o(opt.eta_o_star).unwrap()).unwrap();
    assert_eq!(r.theta, opt.theta_at);
    assert_eq!(r.lambda, opt.lambda_at);
    assert_eq!(opt.objective_value, opt.theta_at + opt.lambda_at);
    assert_eq!(objective(&p, opt.eta_o_star).unwrap(), opt.objective_value);
}

#[test]
fn boundary_branches() {
    // objective still rising at the rate cap
    let cfg = OptimizerConfig::with_delta(0.05).unwrap();
    let opt = find_optimal(&frequent_visits(1000.0), &cfg).unwrap();
    assert_eq!(opt.boundary_hit, BoundaryHit::Upper);
    assert_eq!(opt.eta_o_star, cfg.delta);

    // short sessions with tightly concentrated femto visits: Θ falls off
    // faster than Λ rises near eta_o = 0
    let p = ScenarioParams::from_means(
        14.0,
        DistributionSpec::gamma(3.6, 16.3).unwrap(),
        DistributionSpec::gamma(6.4, 0.92).unwrap(),
        1.0,
    )
    .unwrap();
    let cfg = OptimizerConfig {
        delta: 1e-5,
        epsilon_rate: 1e-6,
        ..OptimizerConfig::default()
    };
    let opt = find_optimal(&p, &cfg).unwrap();
    assert_eq!(opt.boundary_hit, BoundaryHit::Lower);
    assert_eq!(opt.eta_o_star, cfg.epsilon_rate);
}

#[test]
fn profile_theta_is_nonincreasing() {
    let mut gen = ScenarioGen::new(77);
    for _ in 0..10 {
        let p = gen.scenario();
        let cfg = OptimizerConfig::default();
        let profile = objective_profile(&p, &cfg, 300).unwrap();
        assert!(profile.windows(2).all(|w| w[1].theta <= w[0].theta + 1e-12));
        assert_eq!(profile[0].objective, objective(&p, cfg.epsilon_rate).unwrap());
        assert_eq!(profile[299].objective, objective(&p, cfg.delta).unwrap());
    }
}
