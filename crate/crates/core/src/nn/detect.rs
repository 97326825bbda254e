use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::NetworkModel;
use crate::error::{invalid, Error, Result};
use crate::occupancy::DetectorErrorProfile;
use crate::synth::{self, IqPacket, Label, LabeledIqDataset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub accuracy: f64,
    pub pm: f64,
    pub pf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub accuracy: f64,
    /// P(decide NoSignal | Signal).
    pub pm: f64,
    /// P(decide Signal | NoSignal).
    pub pf: f64,
    pub n_signal: usize,
    pub n_nosignal: usize,
    /// One entry per distinct SNR in the dataset, in manifest order.
    pub per_snr: Vec<SnrPoint>,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    signal: usize,
    missed: usize,
    idle: usize,
    false_alarms: usize,
}

impl Tally {
    fn add(&mut self, truth: Label, decision: Label) {
        match truth {
            Label::Signal => {
                self.signal += 1;
                self.missed += (decision == Label::NoSignal) as usize;
            }
            Label::NoSignal => {
                self.idle += 1;
                self.false_alarms += (decision == Label::Signal) as usize;
            }
        }
    }

    fn rate(num: usize, den: usize) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    fn pm(&self) -> f64 {
        Self::rate(self.missed, self.signal)
    }

    fn pf(&self) -> f64 {
        Self::rate(self.false_alarms, self.idle)
    }

    fn accuracy(&self) -> f64 {
        Self::rate(
            self.signal + self.idle - self.missed - self.false_alarms,
            self.signal + self.idle,
        )
    }
}

fn check_shape(model: &NetworkModel, n: usize) -> Result<()> {
    if model.packet_len != n {
        return invalid(format!(
            "{} expects {}-sample packets, data has {n}",
            model.architecture.name(),
            model.packet_len
        ));
    }
    Ok(())
}

/// Argmax decisions with dropout disabled.
pub fn evaluate(model: &NetworkModel, data: &LabeledIqDataset) -> Result<DetectionReport> {
    check_shape(model, data.packet_len())?;
    let mut total = Tally::default();
    let mut per: Vec<Tally> = vec![Tally::default(); data.manifest.snr_db.len()];
    for p in &data.packets {
        if p.len() != model.packet_len {
            return invalid("packet length differs from manifest");
        }
        let d = model.classify(p);
        total.add(p.label, d);
        if let Some(i) = data.manifest.snr_db.iter().position(|s| *s == p.snr_db) {
            per[i].add(p.label, d);
        }
    }
    Ok(DetectionReport {
        accuracy: total.accuracy(),
        pm: total.pm(),
        pf: total.pf(),
        n_signal: total.signal,
        n_nosignal: total.idle,
        per_snr: data
            .manifest
            .snr_db
            .iter()
            .zip(&per)
            .map(|(s, t)| SnrPoint {
                snr_db: *s,
                accuracy: t.accuracy(),
                pm: t.pm(),
                pf: t.pf(),
            })
            .collect(),
    })
}

/// Detection SNRs (dB) on the three sensing links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSnrs {
    /// Incumbent as seen by the secondary's detector.
    pub incumbent_at_secondary: f64,
    pub incumbent_at_jammer: f64,
    pub secondary_at_jammer: f64,
}

impl Default for DetectionSnrs {
    fn default() -> Self {
        Self {
            incumbent_at_secondary: 0.0,
            incumbent_at_jammer: 0.0,
            secondary_at_jammer: 0.0,
        }
    }
}

/// Builds the network-wide error profile: the secondary runs the CNN on the
/// incumbent link, the jammer runs the FNN on each single transmitter, on the
/// superposition of both, and on noise alone.
pub fn extract_error_profile(
    cnn: &NetworkModel,
    fnn: &NetworkModel,
    snrs: &DetectionSnrs,
    n_per_class: usize,
    seed: u64,
) -> Result<DetectorErrorProfile> {
    for m in [cnn, fnn] {
        if !m.trained {
            return Err(Error::Untrained(format!(
                "{} detector for {}-sample packets",
                m.architecture.name(),
                m.packet_len
            )));
        }
    }
    if n_per_class == 0 {
        return invalid("n_per_class must be at least 1");
    }
    let n_cnn = cnn.packet_len;
    let n_fnn = fnn.packet_len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, label: Label, snr: f64| synth::generate_packet_with(&mut rng, n, label, snr);

    let mut secondary = Tally::default();
    for _ in 0..n_per_class {
        let p = draw(n_cnn, Label::Signal, snrs.incumbent_at_secondary);
        secondary.add(Label::Signal, cnn.classify(&p));
        let p = draw(n_cnn, Label::NoSignal, 0.0);
        secondary.add(Label::NoSignal, cnn.classify(&p));
    }

    let (mut only1, mut only2, mut both, mut idle) =
        (Tally::default(), Tally::default(), Tally::default(), Tally::default());
    for _ in 0..n_per_class {
        let a = draw(n_fnn, Label::Signal, snrs.incumbent_at_jammer);
        let b = draw(n_fnn, Label::Signal, snrs.secondary_at_jammer);
        let c = draw(n_fnn, Label::Signal, snrs.incumbent_at_jammer);
        let d = draw(n_fnn, Label::Signal, snrs.secondary_at_jammer);
        let combined: IqPacket = synth::superpose(&c, &d)?;
        only1.add(Label::Signal, fnn.classify(&a));
        only2.add(Label::Signal, fnn.classify(&b));
        both.add(Label::Signal, fnn.classify(&combined));
        let n = draw(n_fnn, Label::NoSignal, 0.0);
        idle.add(Label::NoSignal, fnn.classify(&n));
    }

    Ok(DetectorErrorProfile {
        pm: secondary.pm(),
        pf: secondary.pf(),
        pm1: only1.pm(),
        pm2: only2.pm(),
        pm12: both.pm(),
        pf_j: idle.pf(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::layer::Layer;
    use crate::nn::model::build_fnn;
    use crate::synth::generate_pooled_dataset;

    /// Final-layer bias so large that every input is classified as Signal.
    fn always_signal(n: usize) -> NetworkModel {
        let mut m = build_fnn(n, 0).unwrap();
        let last = m.layers.last_mut().unwrap();
        if let Layer::Dense { params, .. } = last {
            let len = params.len();
            params[len - 1] = 1e6;
        }
        m
    }

    #[test]
    fn constant_signal_model() {
        let data = crate::synth::generate_dataset(50, 16, 0.0, 0.5, 2).unwrap();
        let r = evaluate(&always_signal(16), &data).unwrap();
        assert_eq!(r.pm, 0.0);
        assert_eq!(r.pf, 1.0);
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn balanced_accuracy_identity() {
        let data = generate_pooled_dataset(60, 16, &[-5.0, 5.0], 4).unwrap();
        let r = evaluate(&build_fnn(16, 7).unwrap(), &data).unwrap();
        assert!((r.accuracy - (1.0 - (r.pm + r.pf) / 2.0)).abs() < 1e-12);
        assert_eq!(r.per_snr.len(), 2);
        assert_eq!(r.n_signal, 120);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let data = crate::synth::generate_dataset(5, 32, 0.0, 0.5, 2).unwrap();
        assert!(evaluate(&build_fnn(16, 0).unwrap(), &data).is_err());
    }

    #[test]
    fn untrained_models_are_rejected() {
        let m = build_fnn(16, 0).unwrap();
        let err = extract_error_profile(&m, &m, &DetectionSnrs::default(), 10, 1).unwrap_err();
        assert!(matches!(err, Error::Untrained(_)));
    }

    #[test]
    fn constant_model_profile() {
        let mut m = always_signal(16);
        m.trained = true;
        let p = extract_error_profile(&m, &m, &DetectionSnrs::default(), 20, 1).unwrap();
        assert_eq!((p.pm, p.pm1, p.pm2, p.pm12), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((p.pf, p.pf_j), (1.0, 1.0));
    }
}
