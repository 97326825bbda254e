//! Slot-by-slot Monte Carlo simulation of incumbent traffic, secondary
//! sensing, jamming, SINR outcomes and the resulting ages.
//!
//! Each slot runs in a fixed order: the incumbent draws its activity, the
//! secondary senses and transmits if it has a packet and believes the
//! channel idle, the jammer senses the resulting composite and fires with the
//! power planned from the analytic duty cycle, then each active link succeeds
//! or fails and both ages are updated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::aoi::{aoi_step, AoiStats};
use crate::error::Result;
use crate::link::{success_prob_given_set, ActiveSet, LinkBudget};
use crate::occupancy::DetectorErrorProfile;
use crate::scenario::{Analysis, ScenarioConfig, Sensing, SignalDetectors};
use crate::synth::{generate_packet_with, superpose, Label};

const STDERR_BATCHES: u64 = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Outcomes {
    trials: u64,
    hits: u64,
}

impl Outcomes {
    fn add(&mut self, hit: bool) {
        self.trials += 1;
        self.hits += hit as u64;
    }

    fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }
}

/// Sensing decisions observed during a run, split by the true channel state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SensingTally {
    secondary_busy: Outcomes,
    secondary_idle: Outcomes,
    jammer: [Outcomes; 4],
}

impl SensingTally {
    /// Empirical error rates, in the same layout as the configured profile.
    pub fn profile(&self) -> DetectorErrorProfile {
        DetectorErrorProfile {
            pm: 1.0 - self.secondary_busy.rate(),
            pf: self.secondary_idle.rate(),
            pm1: 1.0 - self.jammer[1].rate(),
            pm2: 1.0 - self.jammer[2].rate(),
            pm12: 1.0 - self.jammer[3].rate(),
            pf_j: self.jammer[0].rate(),
        }
    }

    /// Slots observed in each jammer sensing state: idle, only 1, only 2, both.
    pub fn jammer_trials(&self) -> [u64; 4] {
        self.jammer.map(|o| o.trials)
    }

    pub fn secondary_trials(&self) -> (u64, u64) {
        (self.secondary_busy.trials, self.secondary_idle.trials)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub n_slots: u64,
    /// Age statistics for nodes 1 and 2.
    pub aoi: [AoiStats; 2],
    /// Batch-means standard error of each mean age.
    pub aoi_stderr: [f64; 2],
    /// Slot counts per active set, indexed by mask.
    pub set_counts: [u64; 8],
    pub q2: f64,
    pub q3: f64,
    /// Jamming power used in every jammed slot.
    pub p3: f64,
    pub average_jamming_power: f64,
    /// Per-attempt success rates of nodes 1 and 2.
    pub attempt_success: [f64; 2],
    pub attempts: [u64; 2],
    pub sensing: SensingTally,
}

impl SimReport {
    pub fn set_frequency(&self, set: ActiveSet) -> f64 {
        self.set_counts[set.mask() as usize] as f64 / self.n_slots as f64
    }

    pub fn set_frequencies(&self) -> [f64; 8] {
        self.set_counts.map(|c| c as f64 / self.n_slots as f64)
    }

    pub fn mean_aoi(&self, node: usize) -> f64 {
        self.aoi[node - 1].mean_age
    }
}

/// Online batch means of a per-slot series.
struct BatchMeans {
    size: u64,
    current: f64,
    filled: u64,
    means: Vec<f64>,
}

impl BatchMeans {
    fn new(n_slots: u64) -> Self {
        Self {
            size: (n_slots / STDERR_BATCHES).max(1),
            current: 0.0,
            filled: 0,
            means: Vec::new(),
        }
    }

    fn push(&mut self, x: f64) {
        self.current += x;
        self.filled += 1;
        if self.filled == self.size {
            self.means.push(self.current / self.size as f64);
            self.current = 0.0;
            self.filled = 0;
        }
    }

    fn stderr(&self) -> f64 {
        let k = self.means.len();
        if k < 2 {
            return f64::NAN;
        }
        let mean = self.means.iter().sum::<f64>() / k as f64;
        let var = self.means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        (var / k as f64).sqrt()
    }
}

enum Engine<'a> {
    Probabilistic {
        profile: DetectorErrorProfile,
        success: [[f64; 8]; 2],
    },
    Signal {
        detectors: &'a SignalDetectors,
        links: &'a LinkBudget,
    },
}

fn success_table(links: &LinkBudget) -> Result<[[f64; 8]; 2]> {
    let mut table = [[0.0; 8]; 2];
    for (row, node) in table.iter_mut().zip([1usize, 2]) {
        for set in ActiveSet::all().filter(|s| s.contains(node)) {
            row[set.mask() as usize] = success_prob_given_set(node, set, links)?;
        }
    }
    Ok(table)
}

/// Fresh exponential fading on every link of the active set.
fn sinr_success<R: Rng + ?Sized>(rng: &mut R, node: usize, set: ActiveSet, links: &LinkBudget) -> Result<bool> {
    let own = links.received(node, node)?;
    let e: f64 = rng.sample(Exp1);
    let signal = own * e;
    let mut denom = links.noise_power;
    for j in set.members().filter(|&j| j != node) {
        let e: f64 = rng.sample(Exp1);
        denom += links.received(j, node)? * e;
    }
    Ok(signal > links.sinr_threshold * denom)
}

pub fn run_slotted(cfg: &ScenarioConfig) -> Result<SimReport> {
    let analysis = cfg.analyze()?;
    run_with_analysis(cfg, &analysis)
}

pub(crate) fn run_with_analysis(cfg: &ScenarioConfig, analysis: &Analysis) -> Result<SimReport> {
    let links = &analysis.links;
    let p3 = analysis.jammer.p3_selected;
    let engine = match &cfg.sensing {
        Sensing::Probabilistic => Engine::Probabilistic {
            profile: cfg.profile,
            success: success_table(links)?,
        },
        Sensing::Signal(detectors) => {
            for m in [&detectors.cnn, &detectors.fnn] {
                if !m.trained {
                    return Err(crate::Error::Config(format!(
                        "{} detector has not been trained",
                        m.architecture.name()
                    )));
                }
            }
            Engine::Signal { detectors, links }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.packet_len;
    let q1 = cfg.traffic.q1;
    let q = cfg.traffic.q;

    let mut ages = [1u64, 1u64];
    let mut stats = [AoiStats::new(), AoiStats::new()];
    let mut batches = [BatchMeans::new(cfg.n_slots), BatchMeans::new(cfg.n_slots)];
    let mut set_counts = [0u64; 8];
    let mut tx2_slots = 0u64;
    let mut jam_slots = 0u64;
    let mut jam_energy = 0.0;
    let mut attempts = [Outcomes::default(); 2];
    let mut sensing = SensingTally::default();

    for _ in 0..cfg.n_slots {
        let incumbent = rng.random_bool(q1);
        let has_packet = rng.random_bool(q);

        let sensed_busy = match &engine {
            Engine::Probabilistic { profile, .. } => {
                if incumbent {
                    !rng.random_bool(profile.pm)
                } else {
                    rng.random_bool(profile.pf)
                }
            }
            Engine::Signal { detectors, .. } => {
                let label = if incumbent { Label::Signal } else { Label::NoSignal };
                let p = generate_packet_with(&mut rng, n, label, detectors.snrs.incumbent_at_secondary);
                detectors.cnn.classify(&p) == Label::Signal
            }
        };
        if incumbent {
            sensing.secondary_busy.add(sensed_busy);
        } else {
            sensing.secondary_idle.add(sensed_busy);
        }
        let secondary = has_packet && !sensed_busy;

        let state = incumbent as usize | (secondary as usize) << 1;
        let detected = match &engine {
            Engine::Probabilistic { profile, .. } => {
                let p_detect = match state {
                    0 => profile.pf_j,
                    1 => 1.0 - profile.pm1,
                    2 => 1.0 - profile.pm2,
                    _ => 1.0 - profile.pm12,
                };
                rng.random_bool(p_detect)
            }
            Engine::Signal { detectors, .. } => {
                let snrs = &detectors.snrs;
                let packet = match (incumbent, secondary) {
                    (false, false) => generate_packet_with(&mut rng, n, Label::NoSignal, 0.0),
                    (true, false) => generate_packet_with(&mut rng, n, Label::Signal, snrs.incumbent_at_jammer),
                    (false, true) => generate_packet_with(&mut rng, n, Label::Signal, snrs.secondary_at_jammer),
                    (true, true) => {
                        let a = generate_packet_with(&mut rng, n, Label::Signal, snrs.incumbent_at_jammer);
                        let b = generate_packet_with(&mut rng, n, Label::Signal, snrs.secondary_at_jammer);
                        superpose(&a, &b)?
                    }
                };
                detectors.fnn.classify(&packet) == Label::Signal
            }
        };
        sensing.jammer[state].add(detected);
        let jam = detected && analysis.jammer.active;

        let set = ActiveSet::from_mask(state as u8 | (jam as u8) << 2)?;
        set_counts[set.mask() as usize] += 1;
        tx2_slots += secondary as u64;
        if jam {
            jam_slots += 1;
            jam_energy += p3;
        }

        for (idx, node) in [1usize, 2].into_iter().enumerate() {
            let delivered = if set.contains(node) {
                let ok = match &engine {
                    Engine::Probabilistic { success, .. } => rng.random_bool(success[idx][set.mask() as usize]),
                    Engine::Signal { links, .. } => sinr_success(&mut rng, node, set, links)?,
                };
                attempts[idx].add(ok);
                ok
            } else {
                false
            };
            ages[idx] = aoi_step(ages[idx], delivered)?;
            stats[idx].record(ages[idx]);
            batches[idx].push(ages[idx] as f64);
        }
    }

    let n_slots = cfg.n_slots;
    Ok(SimReport {
        n_slots,
        aoi: stats,
        aoi_stderr: [batches[0].stderr(), batches[1].stderr()],
        set_counts,
        q2: tx2_slots as f64 / n_slots as f64,
        q3: jam_slots as f64 / n_slots as f64,
        p3,
        average_jamming_power: jam_energy / n_slots as f64,
        attempt_success: [attempts[0].rate(), attempts[1].rate()],
        attempts: [attempts[0].trials, attempts[1].trials],
        sensing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetCheck {
    /// Measured average jamming power does not exceed `pbar_max` by more than 1%.
    pub within_budget: bool,
    pub measured: f64,
}

pub fn empirical_jammer_budget_check(report: &SimReport, pbar_max: f64) -> BudgetCheck {
    let measured = report.average_jamming_power;
    BudgetCheck {
        within_budget: measured <= pbar_max * 1.01,
        measured,
    }
}
