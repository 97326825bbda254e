//! Generate a labelled I/Q dataset, write it to disk and read it back.
//!
//! $ cargo run --release --example iq_dataset [out_dir]

use agejam::synth::{generate_pooled_dataset, linear_to_db, Label, LabeledIqDataset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "iq_dataset".into());
    let data = generate_pooled_dataset(500, 64, &[-10.0, 0.0, 10.0], 7)?;
    for snr in [-10.0, 0.0, 10.0] {
        let packets = data.at_snr(snr);
        let signal: Vec<f64> = packets
            .iter()
            .filter(|p| p.label == Label::Signal)
            .filter_map(|p| p.signal_power())
            .collect();
        let mean = signal.iter().sum::<f64>() / signal.len() as f64;
        println!("{snr:>5} dB: {} packets, mean signal power {:.2} dB", packets.len(), linear_to_db(mean));
    }
    std::fs::create_dir_all(&dir)?;
    let files = data.write(dir.as_ref(), "train")?;
    let back = LabeledIqDataset::read(dir.as_ref(), "train")?;
    println!("wrote {files:?}; read back {} packets of {} samples", back.len(), back.packet_len());
    Ok(())
}
