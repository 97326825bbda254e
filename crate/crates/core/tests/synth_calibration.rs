use agejam::synth::{generate_packet, linear_to_db, superpose, Label};
use statrs::distribution::{ContinuousCDF, Exp};

/// Average over many packets of the noise-free signal power, in dB.
fn mean_signal_power_db(snr_db: f64, packets: u64) -> f64 {
    let total: f64 = (0..packets)
        .map(|s| generate_packet(16, Label::Signal, snr_db, s).unwrap().signal_power().unwrap())
        .sum();
    linear_to_db(total / packets as f64)
}

#[test]
fn signal_energy_matches_requested_snr() {
    // Noise has unit power, so signal power in dB is the SNR.
    for snr in [-10.0, 0.0, 10.0] {
        let got = mean_signal_power_db(snr, 40_000);
        assert!((got - snr).abs() < 0.2, "requested {snr} dB, got {got:.3} dB");
    }
}

#[test]
fn noise_only_packets_have_unit_power() {
    let total: f64 = (0..4000)
        .map(|s| generate_packet(64, Label::NoSignal, 0.0, s).unwrap().mean_power())
        .sum();
    assert!((linear_to_db(total / 4000.0)).abs() < 0.05);
}

#[test]
fn superposing_equal_signals_adds_three_db() {
    let n = 40_000u64;
    let mut single = 0.0;
    let mut combined = 0.0;
    for s in 0..n {
        let a = generate_packet(16, Label::Signal, 0.0, 2 * s).unwrap();
        let b = generate_packet(16, Label::Signal, 0.0, 2 * s + 1).unwrap();
        single += a.signal_power().unwrap();
        let c = superpose(&a, &b).unwrap();
        combined += c.signal_power().unwrap();
        assert!((c.snr_db - 10.0 * 2f64.log10()).abs() < 1e-12);
    }
    let gain = linear_to_db(combined / single);
    assert!((gain - 3.0103).abs() < 0.2, "gain {gain:.3} dB");
}

#[test]
fn fading_power_is_exponential() {
    // Kolmogorov-Smirnov on |h|^2 against Exp(1); 1% critical value 1.628/sqrt(n).
    let n = 5000;
    let mut powers: Vec<f64> = (0..n)
        .map(|s| generate_packet(4, Label::Signal, 0.0, 10_000 + s).unwrap().channel.unwrap().norm_sqr())
        .collect();
    powers.sort_by(f64::total_cmp);
    let exp = Exp::new(1.0).unwrap();
    let d = powers
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = exp.cdf(*x);
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.628 / (n as f64).sqrt(), "KS distance {d}");
}
