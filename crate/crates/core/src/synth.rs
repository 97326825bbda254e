//! Labeled complex-baseband packets: BPSK through flat Rayleigh block fading
//! plus unit-power circular Gaussian noise, and noise-only negatives.
//!
//! One BPSK symbol per complex sample. The fading coefficient is drawn once
//! per packet with unit mean power, and the signal is scaled so that the
//! average (over fading) SNR equals `10^(snr_db/10)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub const PACKET_SIZES: [usize; 4] = [16, 32, 64, 128];
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    NoSignal,
    Signal,
}

impl Label {
    /// Class index used by the classifiers and the label file: 0 = NoSignal, 1 = Signal.
    pub fn index(self) -> usize {
        match self {
            Label::NoSignal => 0,
            Label::Signal => 1,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Label::NoSignal),
            1 => Ok(Label::Signal),
            _ => invalid(format!("class index {i} is not 0 or 1")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IqPacket {
    pub samples: Vec<Complex64>,
    pub snr_db: f64,
    pub label: Label,
    /// Effective complex channel gain applied to the symbols (includes the SNR
    /// scaling). Zero for noise-only packets; unknown for packets read from disk.
    pub channel: Option<Complex64>,
    /// Noise-free part of `samples`, kept so that packets can be superposed.
    pub signal: Option<Vec<Complex64>>,
}

impl IqPacket {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Classifier input: all in-phase values followed by all quadrature values.
    pub fn features(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.samples.len());
        x.extend(self.samples.iter().map(|s| s.re));
        x.extend(self.samples.iter().map(|s| s.im));
        x
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn signal_power(&self) -> Option<f64> {
        self.signal
            .as_ref()
            .map(|s| s.iter().map(|x| x.norm_sqr()).sum::<f64>() / s.len() as f64)
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, power: f64) -> Complex64 {
    let scale = (power / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub(crate) fn generate_packet_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    label: Label,
    snr_db: f64,
) -> IqPacket {
    let (channel, signal) = match label {
        Label::Signal => {
            let c = complex_normal(rng, 1.0) * db_to_linear(snr_db).sqrt();
            let sig: Vec<Complex64> = (0..n)
                .map(|_| if rng.random::<bool>() { c } else { -c })
                .collect();
            (c, sig)
        }
        Label::NoSignal => (Complex64::new(0.0, 0.0), vec![Complex64::new(0.0, 0.0); n]),
    };
    let samples = signal.iter().map(|s| s + complex_normal(rng, 1.0)).collect();
    IqPacket {
        samples,
        snr_db,
        label,
        channel: Some(channel),
        signal: Some(signal),
    }
}

pub fn generate_packet(n: usize, label: Label, snr_db: f64, seed: u64) -> Result<IqPacket> {
    if n == 0 {
        return invalid("packet length must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(generate_packet_with(&mut rng, n, label, snr_db))
}

/// Sum of both signal parts over the noise realization of `a`.
pub fn superpose(a: &IqPacket, b: &IqPacket) -> Result<IqPacket> {
    if a.len() != b.len() {
        return invalid(format!("packet lengths differ: {} vs {}", a.len(), b.len()));
    }
    let (Some(sa), Some(sb)) = (&a.signal, &b.signal) else {
        return invalid("superposition needs packets with their signal components");
    };
    let signal: Vec<Complex64> = sa.iter().zip(sb).map(|(x, y)| x + y).collect();
    let samples = a
        .samples
        .iter()
        .zip(sa)
        .zip(&signal)
        .map(|((s, x), total)| s - x + total)
        .collect();
    let label = if a.label == Label::Signal || b.label == Label::Signal {
        Label::Signal
    } else {
        Label::NoSignal
    };
    let snr_db = match (a.label, b.label) {
        (Label::Signal, Label::Signal) => linear_to_db(db_to_linear(a.snr_db) + db_to_linear(b.snr_db)),
        (Label::NoSignal, Label::Signal) => b.snr_db,
        _ => a.snr_db,
    };
    // Two independently faded copies carry different symbols, so no single gain describes them.
    let channel = match (a.label, b.label) {
        (Label::Signal, Label::Signal) => None,
        (Label::Signal, Label::NoSignal) => a.channel,
        (Label::NoSignal, _) => b.channel,
    };
    Ok(IqPacket {
        samples,
        snr_db,
        label,
        channel,
        signal: Some(signal),
    })
}

/// Everything needed to regenerate a dataset bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub version: u32,
    pub n: usize,
    pub snr_db: Vec<f64>,
    /// Signal packets per SNR point.
    pub n_signal: usize,
    /// Noise-only packets per SNR point.
    pub n_nosignal: usize,
    pub seed: u64,
}

impl DatasetManifest {
    pub fn balance(&self) -> f64 {
        self.n_signal as f64 / (self.n_signal + self.n_nosignal) as f64
    }

    pub fn total(&self) -> usize {
        self.snr_db.len() * (self.n_signal + self.n_nosignal)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("packet length must be at least 1");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return invalid("SNR grid must be nonempty and finite");
        }
        if self.n_signal + self.n_nosignal == 0 {
            return invalid("dataset must contain at least one packet");
        }
        Ok(())
    }

    /// Packet order: (label, snr) per position after the seeded shuffle.
    fn items(&self) -> Vec<(Label, f64)> {
        let mut items = Vec::with_capacity(self.total());
        for &snr in &self.snr_db {
            items.extend(std::iter::repeat_n((Label::Signal, snr), self.n_signal));
            items.extend(std::iter::repeat_n((Label::NoSignal, snr), self.n_nosignal));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX);
        items.shuffle(&mut rng);
        items
    }

    fn to_text(&self) -> String {
        let snrs: Vec<String> = self.snr_db.iter().map(|s| s.to_string()).collect();
        format!(
            "version={}\nn={}\nsnr_db={}\ncounts={},{}\nseed={}\nbalance={}\n",
            self.version,
            self.n,
            snrs.join(","),
            self.n_signal,
            self.n_nosignal,
            self.seed,
            self.balance()
        )
    }

    fn parse(path: &Path, text: &str) -> Result<Self> {
        let kv = crate::config::parse_pairs(path, text)?;
        let get = |k: &str| {
            kv.iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::parse(path, format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::parse(path, format!("`{k}` is not an integer")))
        };
        let snr_db = get("snr_db")?
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(path, "bad snr_db list"))?;
        let counts: Vec<usize> = get("counts")?
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, "bad counts"))?;
        let [n_signal, n_nosignal] = counts[..] else {
            return Err(Error::parse(path, "counts must be `signal,nosignal`"));
        };
        let m = DatasetManifest {
            version: num("version")? as u32,
            n: num("n")? as usize,
            snr_db,
            n_signal,
            n_nosignal,
            seed: num("seed")?,
        };
        if m.version != DATASET_VERSION {
            return Err(Error::parse(path, format!("unsupported version {}", m.version)));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledIqDataset {
    pub packets: Vec<IqPacket>,
    pub manifest: DatasetManifest,
}

impl LabeledIqDataset {
    pub fn generate(manifest: DatasetManifest) -> Result<Self> {
        manifest.validate()?;
        let packets = manifest
            .items()
            .into_iter()
            .enumerate()
            .map(|(i, (label, snr))| {
                let mut rng = ChaCha8Rng::seed_from_u64(manifest.seed);
                rng.set_stream(i as u64);
                generate_packet_with(&mut rng, manifest.n, label, snr)
            })
            .collect();
        Ok(Self { packets, manifest })
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn packet_len(&self) -> usize {
        self.manifest.n
    }

    pub fn class_balance(&self) -> f64 {
        let signal = self.packets.iter().filter(|p| p.label == Label::Signal).count();
        signal as f64 / self.packets.len() as f64
    }

    /// Packets generated at `snr_db`.
    pub fn at_snr(&self, snr_db: f64) -> Vec<&IqPacket> {
        self.packets.iter().filter(|p| p.snr_db == snr_db).collect()
    }

    /// Writes `<stem>.manifest`, `<stem>.iq` and `<stem>.labels` under `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<DatasetFiles> {
        let files = DatasetFiles::new(dir, stem);
        fs::write(&files.manifest, self.manifest.to_text()).map_err(|e| Error::io(&files.manifest, e))?;

        let mut iq = Vec::with_capacity(self.len() * self.manifest.n * 8);
        for p in &self.packets {
            for s in &p.samples {
                iq.extend_from_slice(&(s.re as f32).to_le_bytes());
                iq.extend_from_slice(&(s.im as f32).to_le_bytes());
            }
        }
        fs::write(&files.iq, iq).map_err(|e| Error::io(&files.iq, e))?;

        let mut labels = fs::File::create(&files.labels).map_err(|e| Error::io(&files.labels, e))?;
        let text: String = self
            .packets
            .iter()
            .map(|p| format!("{}\n", p.label.index()))
            .collect();
        labels
            .write_all(text.as_bytes())
            .map_err(|e| Error::io(&files.labels, e))?;
        Ok(files)
    }

    /// Reads a dataset written by [`LabeledIqDataset::write`]. Samples are
    /// single precision on disk; signal components are not stored.
    pub fn read(dir: &Path, stem: &str) -> Result<Self> {
        let files = DatasetFiles::new(dir, stem);
        let text = fs::read_to_string(&files.manifest).map_err(|e| Error::io(&files.manifest, e))?;
        let manifest = DatasetManifest::parse(&files.manifest, &text)?;
        manifest.validate().map_err(|e| Error::parse(&files.manifest, e.to_string()))?;

        let raw = fs::read(&files.iq).map_err(|e| Error::io(&files.iq, e))?;
        let expected = manifest.total() * manifest.n * 8;
        if raw.len() != expected {
            return Err(Error::parse(
                &files.iq,
                format!("expected {expected} bytes, found {}", raw.len()),
            ));
        }
        let values: Vec<f64> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();

        let label_text = fs::read_to_string(&files.labels).map_err(|e| Error::io(&files.labels, e))?;
        let labels = label_text
            .lines()
            .map(|l| {
                l.trim()
                    .parse::<usize>()
                    .ok()
                    .and_then(|i| Label::from_index(i).ok())
                    .ok_or_else(|| Error::parse(&files.labels, format!("bad label `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.len() != manifest.total() {
            return Err(Error::parse(&files.labels, "label count does not match manifest"));
        }

        let items = manifest.items();
        let packets = values
            .chunks_exact(2 * manifest.n)
            .zip(labels)
            .zip(items)
            .map(|((chunk, label), (_, snr))| IqPacket {
                samples: chunk.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
                snr_db: snr,
                label,
                channel: None,
                signal: None,
            })
            .collect();
        Ok(Self { packets, manifest })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFiles {
    pub manifest: PathBuf,
    pub iq: PathBuf,
    pub labels: PathBuf,
}

impl DatasetFiles {
    fn new(dir: &Path, stem: &str) -> Self {
        Self {
            manifest: dir.join(format!("{stem}.manifest")),
            iq: dir.join(format!("{stem}.iq")),
            labels: dir.join(format!("{stem}.labels")),
        }
    }
}

/// `2 * n_per_class` packets at one SNR, with `balance` of them carrying a signal.
pub fn generate_dataset(
    n_per_class: usize,
    n: usize,
    snr_db: f64,
    balance: f64,
    seed: u64,
) -> Result<LabeledIqDataset> {
    if n_per_class == 0 {
        return invalid("n_per_class must be at least 1");
    }
    if !(0.0..=1.0).contains(&balance) {
        return invalid(format!("balance {balance} must lie in [0, 1]"));
    }
    let total = 2 * n_per_class;
    let n_signal = (balance * total as f64).round() as usize;
    LabeledIqDataset::generate(DatasetManifest {
        version: DATASET_VERSION,
        n,
        snr_db: vec![snr_db],
        n_signal,
        n_nosignal: total - n_signal,
        seed,
    })
}

/// Balanced dataset with `n_per_class` packets of each class at every SNR in `snr_grid`.
pub fn generate_pooled_dataset(
    n_per_class: usize,
    n: usize,
    snr_grid: &[f64],
    seed: u64,
) -> Result<LabeledIqDataset> {
    LabeledIqDataset::generate(DatasetManifest {
        version: DATASET_VERSION,
        n,
        snr_db: snr_grid.to_vec(),
        n_signal: n_per_class,
        n_nosignal: n_per_class,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_only_power_is_unit() {
        let p = generate_packet(128, Label::NoSignal, 5.0, 11).unwrap();
        // mean of 128 unit exponentials: sd = 1/sqrt(128)
        assert!((p.mean_power() - 1.0).abs() < 4.0 / 128f64.sqrt());
        assert_eq!(p.signal_power(), Some(0.0));
    }

    #[test]
    fn high_snr_signal_dominates() {
        let p = generate_packet(64, Label::Signal, 60.0, 5).unwrap();
        let c = p.channel.unwrap().norm_sqr();
        for s in &p.samples {
            assert!((s.norm_sqr() / c - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn packets_are_seeded() {
        let a = generate_packet(32, Label::Signal, 0.0, 42).unwrap();
        let b = generate_packet(32, Label::Signal, 0.0, 42).unwrap();
        assert_eq!(a, b);
        assert!(generate_packet(0, Label::Signal, 0.0, 1).is_err());
    }

    #[test]
    fn bpsk_symbols_are_antipodal() {
        let p = generate_packet(16, Label::Signal, 10.0, 3).unwrap();
        let c = p.channel.unwrap();
        for s in p.signal.unwrap() {
            assert!((s - c).norm() < 1e-12 || (s + c).norm() < 1e-12);
        }
    }

    #[test]
    fn superpose_rejects_mismatch() {
        let a = generate_packet(16, Label::Signal, 0.0, 1).unwrap();
        let b = generate_packet(32, Label::Signal, 0.0, 2).unwrap();
        assert!(superpose(&a, &b).is_err());
    }

    #[test]
    fn superpose_keeps_noise_of_first() {
        let a = generate_packet(16, Label::NoSignal, 0.0, 1).unwrap();
        let b = generate_packet(16, Label::NoSignal, 0.0, 2).unwrap();
        let s = superpose(&a, &b).unwrap();
        assert_eq!(s.samples, a.samples);
        assert_eq!(s.label, Label::NoSignal);

        let x = generate_packet(16, Label::Signal, 0.0, 3).unwrap();
        let s = superpose(&x, &a).unwrap();
        assert_eq!(s.samples, x.samples);
        assert_eq!(s.label, Label::Signal);
    }

    #[test]
    fn dataset_counts_and_balance() {
        let d = generate_dataset(1000, 64, 0.0, 0.5, 8).unwrap();
        assert_eq!(d.len(), 2000);
        assert_eq!(d.packets.iter().filter(|p| p.label == Label::Signal).count(), 1000);
        assert!((d.class_balance() - 0.5).abs() < 1e-3);

        let d = generate_dataset(500, 16, 0.0, 0.3, 8).unwrap();
        assert!((d.class_balance() - 0.3).abs() < 1e-3);
        assert!(generate_dataset(0, 16, 0.0, 0.5, 8).is_err());
    }

    #[test]
    fn dataset_is_a_function_of_its_manifest() {
        let a = generate_dataset(50, 16, -3.0, 0.5, 77).unwrap();
        let b = LabeledIqDataset::generate(a.manifest.clone()).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(50, 16, -3.0, 0.5, 78).unwrap();
        assert_ne!(a.packets, c.packets);
    }

    #[test]
    fn dataset_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = generate_pooled_dataset(20, 16, &[-5.0, 5.0], 4).unwrap();
        d.write(dir.path(), "train").unwrap();
        let back = LabeledIqDataset::read(dir.path(), "train").unwrap();
        assert_eq!(back.manifest, d.manifest);
        for (p, q) in d.packets.iter().zip(&back.packets) {
            assert_eq!(p.label, q.label);
            assert_eq!(p.snr_db, q.snr_db);
            for (x, y) in p.samples.iter().zip(&q.samples) {
                assert_eq!(x.re as f32 as f64, y.re);
                assert_eq!(x.im as f32 as f64, y.im);
            }
        }
    }

    #[test]
    fn iq_file_layout_is_interleaved_little_endian() {
        let dir = tempfile::tempdir().unwrap();
        let d = generate_dataset(1, 16, 0.0, 0.5, 2).unwrap();
        let files = d.write(dir.path(), "x").unwrap();
        let raw = fs::read(files.iq).unwrap();
        assert_eq!(raw.len(), 2 * 16 * 2 * 4);
        let first = &d.packets[0].samples[0];
        assert_eq!(f32::from_le_bytes(raw[0..4].try_into().unwrap()), first.re as f32);
        assert_eq!(f32::from_le_bytes(raw[4..8].try_into().unwrap()), first.im as f32);
        let manifest = fs::read_to_string(files.manifest).unwrap();
        assert!(manifest.starts_with("version=1\nn=16\nsnr_db=0\ncounts=1,1\nseed=2\nbalance=0.5\n"));
    }
}
