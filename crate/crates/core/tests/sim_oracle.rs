use agejam::link::ActiveSet;
use agejam::occupancy::{DetectorErrorProfile, TrafficParams};
use agejam::scenario::{JammerParams, ScenarioConfig};
use agejam::sim::{empirical_jammer_budget_check, run_slotted};

fn scenario(q1: f64, q: f64, slots: u64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        traffic: TrafficParams { q1, q },
        n_slots: slots,
        seed,
        ..Default::default()
    }
}

#[test]
fn set_frequencies_track_the_joint_distribution() {
    let cfg = scenario(0.4, 0.7, 300_000, 21);
    let a = cfg.analyze().unwrap();
    let r = run_slotted(&cfg).unwrap();
    let n = r.n_slots as f64;
    for set in ActiveSet::all() {
        let p = a.distribution.mass(set);
        let sd = (p * (1.0 - p) / n).sqrt();
        assert!((r.set_frequency(set) - p).abs() <= 4.0 * sd + 1e-12, "set {set}");
    }
    assert!((r.set_frequencies().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn mean_age_approaches_one_over_s() {
    let cfg = scenario(0.2, 0.9, 300_000, 22);
    let a = cfg.analyze().unwrap();
    let r = run_slotted(&cfg).unwrap();
    for node in [1, 2] {
        let analytic = [a.aoi1, a.aoi2][node - 1];
        let rel = (r.mean_aoi(node) - analytic).abs() / analytic;
        assert!(rel < 0.03, "node {node}: {} vs {analytic}", r.mean_aoi(node));
    }
}

#[test]
fn jamming_power_is_the_duty_cycle_times_p3() {
    let cfg = scenario(0.5, 0.5, 100_000, 23);
    let r = run_slotted(&cfg).unwrap();
    assert!((r.average_jamming_power - r.p3 * r.q3).abs() < 1e-12);
    let check = empirical_jammer_budget_check(&r, cfg.jammer.pbar_max);
    assert!(check.within_budget);
}

#[test]
fn zero_budget_never_jams_with_power() {
    let mut cfg = scenario(0.5, 0.5, 20_000, 24);
    cfg.jammer = JammerParams { pbar_max: 0.0, p3_cap: None };
    let r = run_slotted(&cfg).unwrap();
    assert_eq!(r.average_jamming_power, 0.0);
}

#[test]
fn unobstructed_channel_keeps_age_at_one() {
    let mut cfg = scenario(0.0, 1.0, 10_000, 25);
    cfg.profile = DetectorErrorProfile::PERFECT;
    cfg.links.noise_power = 0.0;
    cfg.jammer.pbar_max = 0.0;
    let r = run_slotted(&cfg).unwrap();
    assert_eq!(r.mean_aoi(2), 1.0);
}

#[test]
fn runs_are_reproducible() {
    let cfg = scenario(0.3, 0.6, 20_000, 26);
    assert_eq!(run_slotted(&cfg).unwrap(), run_slotted(&cfg).unwrap());
}
