//! Mapping from configuration keys to scenario values.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::config::ConfigMap;
use crate::error::{Error, Result};
use crate::link::InterferenceFactor;
use crate::nn::{self, extract_error_profile, DetectionSnrs};
use crate::occupancy::{DetectorErrorProfile, TrafficParams};
use crate::scenario::{ScenarioConfig, Sensing, SignalDetectors};

const EXACT_KEYS: &[&str] = &[
    "seed",
    "traffic.q1",
    "traffic.q",
    "links.tx_power.1",
    "links.tx_power.2",
    "links.path_gain",
    "links.mean_fading",
    "links.noise_power",
    "links.sinr_threshold",
    "links.interference",
    "detector.pm",
    "detector.pf",
    "detector.pm1",
    "detector.pm2",
    "detector.pm12",
    "detector.pf_j",
    "detector.cnn_weights",
    "detector.fnn_weights",
    "detector.eval_packets",
    "jammer.pbar_max",
    "jammer.p3_cap",
    "sim.n_slots",
    "sim.packet_len",
    "sim.sensing",
    "detection.incumbent_at_secondary_db",
    "detection.incumbent_at_jammer_db",
    "detection.secondary_at_jammer_db",
    "sweep.param",
    "sweep.grid",
    "sweep.series",
    "sweep.series_grid",
    "sweep.mode",
    "sweep.plot_column",
    "train.sizes",
    "train.snr_grid",
    "train.seeds",
    "train.n_per_class",
    "train.cnn_n_per_class",
    "train.test_per_class",
    "train.epochs",
    "train.cnn_epochs",
    "train.batch_size",
    "train.learning_rate",
    "train.profile_packets",
];

pub(crate) const PROFILE_FIELDS: [&str; 6] = ["pm", "pf", "pm1", "pm2", "pm12", "pf_j"];

fn is_known(key: &str) -> bool {
    if EXACT_KEYS.contains(&key) {
        return true;
    }
    let parts: Vec<&str> = key.split('.').collect();
    match parts[..] {
        ["links", "path_gain" | "mean_fading", i, k] => {
            ["1", "2", "3"].contains(&i) && ["1", "2", "3"].contains(&k)
        }
        ["profile", n, field] => n.parse::<usize>().is_ok() && PROFILE_FIELDS.contains(&field),
        _ => false,
    }
}

/// Rejects keys no command understands, so typos do not silently fall back to defaults.
pub fn check_keys(map: &ConfigMap) -> Result<()> {
    let unknown: Vec<&str> = map.keys().filter(|k| !is_known(k)).collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown key(s): {}", unknown.join(", "))))
    }
}

fn set<T: FromStr>(map: &ConfigMap, key: &str, slot: &mut T) -> Result<()> {
    if let Some(v) = map.get(key)? {
        *slot = v;
    }
    Ok(())
}

fn profile_fields(p: &mut DetectorErrorProfile) -> [&mut f64; 6] {
    [&mut p.pm, &mut p.pf, &mut p.pm1, &mut p.pm2, &mut p.pm12, &mut p.pf_j]
}

fn has_profile_override(map: &ConfigMap, prefix: &str) -> bool {
    PROFILE_FIELDS
        .iter()
        .any(|f| map.raw(&format!("{prefix}.{f}")).is_some())
}

fn apply_profile(map: &ConfigMap, prefix: &str, p: &mut DetectorErrorProfile) -> Result<()> {
    for (name, slot) in PROFILE_FIELDS.iter().zip(profile_fields(p)) {
        set(map, &format!("{prefix}.{name}"), slot)?;
    }
    Ok(())
}

/// Profiles stored under `profile.<N>.*`, keyed by packet size.
pub fn packet_size_profiles(map: &ConfigMap) -> Result<BTreeMap<usize, DetectorErrorProfile>> {
    let mut out = BTreeMap::new();
    for key in map.keys() {
        if let ["profile", n, _] = key.split('.').collect::<Vec<_>>()[..] {
            if let Ok(n) = n.parse::<usize>() {
                out.entry(n).or_insert_with(DetectorErrorProfile::default);
            }
        }
    }
    for (n, p) in out.iter_mut() {
        apply_profile(map, &format!("profile.{n}"), p)?;
        p.validate()
            .map_err(|e| Error::Config(format!("profile for {n}-sample packets: {e}")))?;
    }
    Ok(out)
}

/// Error profile for `packet_len`: built-in default, then `profile.<N>.*`,
/// then any explicit `detector.*` values.
pub fn profile_for(map: &ConfigMap, packet_len: usize) -> Result<DetectorErrorProfile> {
    let mut p = DetectorErrorProfile::default();
    apply_profile(map, &format!("profile.{packet_len}"), &mut p)?;
    apply_profile(map, "detector", &mut p)?;
    Ok(p)
}

pub fn detection_snrs(map: &ConfigMap) -> Result<DetectionSnrs> {
    let mut s = DetectionSnrs::default();
    set(map, "detection.incumbent_at_secondary_db", &mut s.incumbent_at_secondary)?;
    set(map, "detection.incumbent_at_jammer_db", &mut s.incumbent_at_jammer)?;
    set(map, "detection.secondary_at_jammer_db", &mut s.secondary_at_jammer)?;
    Ok(s)
}

/// Resolves a path-valued key relative to the directory of the config file.
fn path_value(map: &ConfigMap, key: &str) -> Result<PathBuf> {
    let raw = map
        .raw(key)
        .ok_or_else(|| Error::Config(format!("`{key}` is required for signal sensing")))?;
    Ok(map.resolve(raw))
}

/// Builds the scenario described by `map`. `seed` overrides the `seed` key.
pub fn scenario_from_config(map: &ConfigMap, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let (mut q1, mut q) = (cfg.traffic.q1, cfg.traffic.q);
    set(map, "traffic.q1", &mut q1)?;
    set(map, "traffic.q", &mut q)?;
    cfg.traffic = TrafficParams { q1, q };

    let links = &mut cfg.links;
    set(map, "links.tx_power.1", &mut links.tx_power[0])?;
    set(map, "links.tx_power.2", &mut links.tx_power[1])?;
    for (name, table) in [("path_gain", &mut links.path_gain), ("mean_fading", &mut links.mean_fading)] {
        if let Some(g) = map.get::<f64>(&format!("links.{name}"))? {
            *table = [[g; 3]; 3];
        }
        for i in 0..3 {
            for k in 0..3 {
                set(map, &format!("links.{name}.{}.{}", i + 1, k + 1), &mut table[i][k])?;
            }
        }
    }
    set(map, "links.noise_power", &mut links.noise_power)?;
    set(map, "links.sinr_threshold", &mut links.sinr_threshold)?;
    links.interference = match map.raw("links.interference") {
        None | Some("divide") => InterferenceFactor::Divide,
        Some("multiply") => InterferenceFactor::Multiply,
        Some(other) => {
            return Err(Error::Config(format!(
                "links.interference must be divide or multiply, found `{other}`"
            )))
        }
    };

    set(map, "jammer.pbar_max", &mut cfg.jammer.pbar_max)?;
    cfg.jammer.p3_cap = map.get("jammer.p3_cap")?;
    set(map, "sim.n_slots", &mut cfg.n_slots)?;
    set(map, "sim.packet_len", &mut cfg.packet_len)?;
    cfg.seed = match seed {
        Some(s) => s,
        None => map.get_or("seed", 0)?,
    };
    cfg.profile = profile_for(map, cfg.packet_len)?;

    match map.raw("sim.sensing") {
        None | Some("probabilistic") => {}
        Some("signal") => {
            let load = |key| {
                let path = path_value(map, key)?;
                nn::io::load(&path).map(Arc::new)
            };
            let cnn = load("detector.cnn_weights")?;
            let fnn = load("detector.fnn_weights")?;
            if map.raw("sim.packet_len").is_none() {
                cfg.packet_len = cnn.packet_len;
            }
            let snrs = detection_snrs(map)?;
            let explicit = has_profile_override(map, "detector")
                || has_profile_override(map, &format!("profile.{}", cfg.packet_len));
            let detectors = SignalDetectors { cnn, fnn, snrs };
            cfg.sensing = Sensing::Signal(detectors.clone());
            cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
            if !explicit {
                // The jammer plans its power from the operating point of the deployed detectors.
                let n = map.get_or("detector.eval_packets", 2000usize)?;
                cfg.profile = extract_error_profile(&detectors.cnn, &detectors.fnn, &snrs, n, cfg.seed)?;
            }
        }
        Some(other) => {
            return Err(Error::Config(format!(
                "sim.sensing must be probabilistic or signal, found `{other}`"
            )))
        }
    }
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}
