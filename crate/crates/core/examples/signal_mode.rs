//! Sensing with real detectors: train a small pair, measure their error
//! profile, then simulate with packets pushed through the networks and
//! compare with the probabilistic shortcut.
//!
//! $ cargo run --release --example signal_mode

use std::sync::Arc;

use agejam::nn::{build_cnn, build_fnn, extract_error_profile, train, DetectionSnrs, TrainConfig};
use agejam::scenario::{ScenarioConfig, Sensing, SignalDetectors};
use agejam::sim::run_slotted;
use agejam::synth::generate_pooled_dataset;

fn main() -> agejam::Result<()> {
    let n = 32;
    let data = generate_pooled_dataset(1500, n, &[-5.0, 0.0, 5.0], 1)?;
    let mut cnn = build_cnn(n, 2)?;
    let mut fnn = build_fnn(n, 3)?;
    train(&mut cnn, &data, &TrainConfig { epochs: 3, seed: 4, ..Default::default() })?;
    train(&mut fnn, &data, &TrainConfig { epochs: 8, seed: 5, ..Default::default() })?;

    let snrs = DetectionSnrs::default();
    let profile = extract_error_profile(&cnn, &fnn, &snrs, 5000, 6)?;
    println!("measured profile: {profile:?}");

    let prob = ScenarioConfig {
        profile,
        packet_len: n,
        n_slots: 1_000_000,
        seed: 7,
        ..Default::default()
    };
    let signal = ScenarioConfig {
        sensing: Sensing::Signal(SignalDetectors {
            cnn: Arc::new(cnn),
            fnn: Arc::new(fnn),
            snrs,
        }),
        n_slots: 50_000,
        seed: 8,
        ..prob.clone()
    };
    let (rp, rs) = (run_slotted(&prob)?, run_slotted(&signal)?);
    let seen = rs.sensing.profile();
    println!("signal-mode pm {:.3} pf {:.3} (profile {:.3} {:.3})", seen.pm, seen.pf, profile.pm, profile.pf);
    println!(
        "secondary AoI: signal {:.3} ± {:.3}, probabilistic {:.3} ± {:.3}",
        rs.mean_aoi(2),
        rs.aoi_stderr[1],
        rp.mean_aoi(2),
        rp.aoi_stderr[1]
    );
    Ok(())
}
