//! Detector training across packet sizes and seeds, with per-SNR accuracy
//! curves and the error profiles the analytic model consumes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::settings::{detection_snrs, PROFILE_FIELDS};
use super::{csv_bytes, derive_seed, num, write_file};
use crate::config::{parse_grid, ConfigMap};
use crate::error::{Error, Result};
use crate::nn::{self, evaluate, extract_error_profile, Architecture, DetectionSnrs, NetworkModel, TrainConfig};
use crate::occupancy::DetectorErrorProfile;
use crate::synth::generate_pooled_dataset;

pub const ACCURACY_COLUMNS: [&str; 8] = ["model", "n", "seed", "params", "snr_db", "accuracy", "pm", "pf"];

#[derive(Debug, Clone, PartialEq)]
pub struct TrainDetectorSpec {
    pub sizes: Vec<usize>,
    /// Training pools every SNR; evaluation reports each one separately.
    pub snr_grid: Vec<f64>,
    /// Number of independent seeds per (model, size).
    pub seeds: usize,
    /// Training packets per class per SNR for the FNN.
    pub n_per_class: usize,
    /// Same for the CNN, which needs less data and costs more per packet.
    pub cnn_n_per_class: usize,
    pub test_per_class: usize,
    pub epochs: usize,
    pub cnn_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Packets per class used to measure the deployed error profile.
    pub profile_packets: usize,
    pub snrs: DetectionSnrs,
    pub seed: u64,
}

impl Default for TrainDetectorSpec {
    fn default() -> Self {
        Self {
            sizes: vec![16, 64, 128],
            snr_grid: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            seeds: 3,
            n_per_class: 4000,
            cnn_n_per_class: 1000,
            test_per_class: 1000,
            epochs: 10,
            cnn_epochs: 8,
            batch_size: 64,
            learning_rate: 1e-3,
            profile_packets: 5000,
            snrs: DetectionSnrs::default(),
            seed: 0,
        }
    }
}

impl TrainDetectorSpec {
    pub fn from_config(map: &ConfigMap, seed: Option<u64>) -> Result<Self> {
        let mut s = Self::default();
        if let Some(v) = map.get_list("train.sizes")? {
            s.sizes = v;
        }
        if let Some(raw) = map.raw("train.snr_grid") {
            s.snr_grid = parse_grid(raw)?;
        }
        s.seeds = map.get_or("train.seeds", s.seeds)?;
        s.n_per_class = map.get_or("train.n_per_class", s.n_per_class)?;
        s.cnn_n_per_class = map.get_or("train.cnn_n_per_class", s.cnn_n_per_class)?;
        s.test_per_class = map.get_or("train.test_per_class", s.test_per_class)?;
        s.epochs = map.get_or("train.epochs", s.epochs)?;
        s.cnn_epochs = map.get_or("train.cnn_epochs", s.cnn_epochs)?;
        s.batch_size = map.get_or("train.batch_size", s.batch_size)?;
        s.learning_rate = map.get_or("train.learning_rate", s.learning_rate)?;
        s.profile_packets = map.get_or("train.profile_packets", s.profile_packets)?;
        s.snrs = detection_snrs(map)?;
        s.seed = match seed {
            Some(v) => v,
            None => map.get_or("seed", 0)?,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 3) {
            return bad("train.sizes must list packet sizes of at least 3 samples");
        }
        if self.snr_grid.is_empty() {
            return bad("train.snr_grid is empty");
        }
        if self.seeds == 0 || self.n_per_class == 0 || self.cnn_n_per_class == 0 || self.test_per_class == 0 {
            return bad("seeds and per-class packet counts must be positive");
        }
        if self.profile_packets == 0 {
            return bad("train.profile_packets must be positive");
        }
        self.train_config(Architecture::Fnn, 0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    fn train_config(&self, arch: Architecture, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: match arch {
                Architecture::Fnn => self.epochs,
                Architecture::Cnn => self.cnn_epochs,
            },
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub model: Architecture,
    pub n: usize,
    pub seed: usize,
    pub params: usize,
    pub snr_db: f64,
    pub accuracy: f64,
    pub pm: f64,
    pub pf: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedDetector {
    pub model: NetworkModel,
    pub seed: usize,
}

#[derive(Debug, Clone)]
pub struct TrainDetectorOutput {
    pub rows: Vec<AccuracyRow>,
    pub detectors: Vec<TrainedDetector>,
    /// Error profile per packet size, averaged over seeds.
    pub profiles: BTreeMap<usize, DetectorErrorProfile>,
}

impl TrainDetectorOutput {
    /// Mean test accuracy over seeds for one model, size and SNR.
    pub fn mean_accuracy(&self, model: Architecture, n: usize, snr_db: f64) -> Option<f64> {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.model == model && r.n == n && r.snr_db == snr_db)
            .map(|r| r.accuracy)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn detector(&self, model: Architecture, n: usize, seed: usize) -> Option<&NetworkModel> {
        self.detectors
            .iter()
            .find(|d| d.model.architecture == model && d.model.packet_len == n && d.seed == seed)
            .map(|d| &d.model)
    }
}

// Stream tags so every dataset and model gets its own seed.
const TAG_FNN_DATA: u64 = 0;
const TAG_CNN_DATA: u64 = 1;
const TAG_TEST: u64 = 2;
const TAG_INIT: u64 = 3;
const TAG_ORDER: u64 = 5;
const TAG_PROFILE: u64 = 7;

fn job_seed(spec: &TrainDetectorSpec, n: usize, seed: usize, tag: u64) -> u64 {
    derive_seed(derive_seed(spec.seed, n as u64), seed as u64 * 8 + tag)
}

fn train_one(spec: &TrainDetectorSpec, arch: Architecture, n: usize, seed: usize) -> Result<(TrainedDetector, Vec<AccuracyRow>)> {
    let (count, tag) = match arch {
        Architecture::Fnn => (spec.n_per_class, TAG_FNN_DATA),
        Architecture::Cnn => (spec.cnn_n_per_class, TAG_CNN_DATA),
    };
    let arch_tag = arch as u64;
    let train_set = generate_pooled_dataset(count, n, &spec.snr_grid, job_seed(spec, n, seed, tag))?;
    let test_set = generate_pooled_dataset(spec.test_per_class, n, &spec.snr_grid, job_seed(spec, n, seed, TAG_TEST))?;
    let mut model = arch.build(n, job_seed(spec, n, seed, TAG_INIT + arch_tag))?;
    nn::train(&mut model, &train_set, &spec.train_config(arch, job_seed(spec, n, seed, TAG_ORDER + arch_tag)))?;
    let report = evaluate(&model, &test_set)?;
    let params = model.param_count();
    let rows = report
        .per_snr
        .iter()
        .map(|p| AccuracyRow {
            model: arch,
            n,
            seed,
            params,
            snr_db: p.snr_db,
            accuracy: p.accuracy,
            pm: p.pm,
            pf: p.pf,
        })
        .collect();
    Ok((TrainedDetector { model, seed }, rows))
}

fn mean_profile(ps: &[DetectorErrorProfile]) -> DetectorErrorProfile {
    let k = ps.len() as f64;
    let avg = |f: fn(&DetectorErrorProfile) -> f64| ps.iter().map(f).sum::<f64>() / k;
    DetectorErrorProfile {
        pm: avg(|p| p.pm),
        pf: avg(|p| p.pf),
        pm1: avg(|p| p.pm1),
        pm2: avg(|p| p.pm2),
        pm12: avg(|p| p.pm12),
        pf_j: avg(|p| p.pf_j),
    }
}

/// Trains an FNN and a CNN for every (size, seed), evaluates each per SNR and
/// measures the error profile of each trained pair.
pub fn run_train_detector(spec: &TrainDetectorSpec) -> Result<TrainDetectorOutput> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &n in &spec.sizes {
        for seed in 0..spec.seeds {
            for arch in [Architecture::Fnn, Architecture::Cnn] {
                jobs.push((arch, n, seed));
            }
        }
    }
    let results: Vec<(TrainedDetector, Vec<AccuracyRow>)> = jobs
        .par_iter()
        .map(|&(arch, n, seed)| train_one(spec, arch, n, seed))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut detectors = Vec::new();
    for (d, r) in results {
        rows.extend(r);
        detectors.push(d);
    }
    let mut out = TrainDetectorOutput {
        rows,
        detectors,
        profiles: BTreeMap::new(),
    };
    for &n in &spec.sizes {
        let per_seed: Vec<DetectorErrorProfile> = (0..spec.seeds)
            .into_par_iter()
            .map(|s| {
                let cnn = out.detector(Architecture::Cnn, n, s).expect("trained above");
                let fnn = out.detector(Architecture::Fnn, n, s).expect("trained above");
                extract_error_profile(cnn, fnn, &spec.snrs, spec.profile_packets, job_seed(spec, n, s, TAG_PROFILE))
            })
            .collect::<Result<_>>()?;
        out.profiles.insert(n, mean_profile(&per_seed));
    }
    Ok(out)
}

pub fn accuracy_csv(rows: &[AccuracyRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &ACCURACY_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.model.name().to_string(),
                r.n.to_string(),
                r.seed.to_string(),
                r.params.to_string(),
                num(r.snr_db),
                num(r.accuracy),
                num(r.pm),
                num(r.pf),
            ]
        }),
    )
}

/// `profile.<N>.<field>=value` lines, ready to be included from a scenario config.
pub fn profiles_conf(profiles: &BTreeMap<usize, DetectorErrorProfile>) -> String {
    let mut s = String::from("# Detector error profiles, averaged over training seeds.\n");
    for (n, p) in profiles {
        let values = [p.pm, p.pf, p.pm1, p.pm2, p.pm12, p.pf_j];
        for (f, v) in PROFILE_FIELDS.iter().zip(values) {
            writeln!(s, "profile.{n}.{f}={}", num(v)).unwrap();
        }
    }
    s
}

pub fn weights_file_name(model: &NetworkModel, seed: usize) -> String {
    format!("{}_n{}_seed{seed}.weights", model.architecture.name(), model.packet_len)
}

/// Writes `accuracy.csv`, `profiles.conf` and one weight file per detector into `dir`.
pub fn write_train_outputs(dir: &Path, out: &TrainDetectorOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let csv = dir.join("accuracy.csv");
    write_file(&csv, &accuracy_csv(&out.rows)?)?;
    written.push(csv);
    let conf = dir.join("profiles.conf");
    write_file(&conf, profiles_conf(&out.profiles).as_bytes())?;
    written.push(conf);
    for d in &out.detectors {
        let path = dir.join(weights_file_name(&d.model, d.seed));
        nn::io::save(&d.model, &path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> TrainDetectorSpec {
        TrainDetectorSpec {
            sizes: vec![8],
            snr_grid: vec![0.0, 10.0],
            seeds: 1,
            n_per_class: 40,
            cnn_n_per_class: 20,
            test_per_class: 30,
            epochs: 2,
            cnn_epochs: 1,
            profile_packets: 50,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn outputs_cover_every_combination() {
        let out = run_train_detector(&tiny()).unwrap();
        assert_eq!(out.rows.len(), 2 * 2);
        assert_eq!(out.detectors.len(), 2);
        assert!(out.detectors.iter().all(|d| d.model.trained));
        assert_eq!(out.rows[0].params, nn::expected_param_count(Architecture::Fnn, 8));
        assert!(out.profiles[&8].validate().is_ok());
        assert!(out.mean_accuracy(Architecture::Cnn, 8, 10.0).is_some());
    }

    #[test]
    fn written_files_round_trip() {
        let out = run_train_detector(&tiny()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_train_outputs(dir.path(), &out).unwrap();
        assert_eq!(files.len(), 4);
        let back = nn::io::load(&dir.path().join("cnn_n8_seed0.weights")).unwrap();
        assert_eq!(back.layers, out.detector(Architecture::Cnn, 8, 0).unwrap().layers);
        let conf = ConfigMap::load(&dir.path().join("profiles.conf")).unwrap();
        super::super::check_keys(&conf).unwrap();
        let p = super::super::settings::profile_for(&conf, 8).unwrap();
        assert_eq!(p, out.profiles[&8]);
    }

    #[test]
    fn spec_from_config() {
        let m = ConfigMap::parse_str("train.sizes=16,32\ntrain.snr_grid=-5:5:5\ntrain.seeds=2").unwrap();
        let s = TrainDetectorSpec::from_config(&m, Some(4)).unwrap();
        assert_eq!(s.sizes, vec![16, 32]);
        assert_eq!(s.snr_grid, vec![-5.0, 0.0, 5.0]);
        assert_eq!(s.seed, 4);
        let m = ConfigMap::parse_str("train.sizes=2").unwrap();
        assert!(TrainDetectorSpec::from_config(&m, None).unwrap_err().is_config());
    }
}
