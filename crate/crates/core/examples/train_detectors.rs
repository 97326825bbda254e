//! Train one FNN and one CNN on 64-sample packets and print accuracy by SNR.
//! A small budget so it finishes in well under a minute.
//!
//! $ cargo run --release --example train_detectors

use agejam::nn::{build_cnn, build_fnn, evaluate, train, TrainConfig};
use agejam::synth::generate_pooled_dataset;

fn main() -> agejam::Result<()> {
    let grid = [-10.0, -5.0, 0.0, 5.0, 10.0];
    let test = generate_pooled_dataset(500, 64, &grid, 99)?;
    for (mut model, n_per_class, epochs) in [(build_fnn(64, 1)?, 2000, 6), (build_cnn(64, 1)?, 300, 3)] {
        let data = generate_pooled_dataset(n_per_class, 64, &grid, 2)?;
        let report = train(&mut model, &data, &TrainConfig { epochs, seed: 3, ..Default::default() })?;
        let eval = evaluate(&model, &test)?;
        println!(
            "{} ({} parameters): loss {:.3} -> {:.3}",
            model.architecture.name(),
            model.param_count(),
            report.loss_history[0],
            report.loss_history.last().unwrap()
        );
        for p in &eval.per_snr {
            println!("    {:>5} dB  accuracy {:.3}  pm {:.3}  pf {:.3}", p.snr_db, p.accuracy, p.pm, p.pf);
        }
    }
    Ok(())
}
