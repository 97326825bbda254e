//! Scenario parameters and the closed-form pipeline that turns them into
//! success probabilities, jammer power and mean ages.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::link::{per_slot_success_prob, LinkBudget};
use crate::nn::{DetectionSnrs, NetworkModel};
use crate::occupancy::{
    jammer_activation_prob, joint_active_set_distribution, secondary_tx_prob,
    select_jamming_power_capped, DetectorErrorProfile, EventDistribution, JammerBudget, TrafficParams,
};

/// Path gain used on every link by default (an attenuation of 2^-4).
pub const DEFAULT_PATH_GAIN: f64 = 0.0625;
/// Noise power giving a 10 dB mean link SNR at unit transmit power.
pub const DEFAULT_NOISE_POWER: f64 = 0.00625;
pub const DEFAULT_PBAR_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerParams {
    /// Average power budget.
    pub pbar_max: f64,
    /// Optional ceiling on the per-slot jamming power.
    pub p3_cap: Option<f64>,
}

impl Default for JammerParams {
    fn default() -> Self {
        Self {
            pbar_max: DEFAULT_PBAR_MAX,
            p3_cap: None,
        }
    }
}

/// Trained detectors used for signal-driven sensing.
#[derive(Debug, Clone)]
pub struct SignalDetectors {
    /// Secondary's detector of the incumbent.
    pub cnn: Arc<NetworkModel>,
    /// Jammer's detector of any transmission.
    pub fnn: Arc<NetworkModel>,
    pub snrs: DetectionSnrs,
}

#[derive(Debug, Clone, Default)]
pub enum Sensing {
    /// Sensing outcomes drawn from the scenario's error profile.
    #[default]
    Probabilistic,
    /// Sensing by running trained detectors on synthesized packets.
    Signal(SignalDetectors),
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub traffic: TrafficParams,
    /// Transmit power of node 3 is ignored; it is set from the jammer budget.
    pub links: LinkBudget,
    /// Detector error rates. Drives sensing in probabilistic mode and the
    /// jammer's power planning in both modes.
    pub profile: DetectorErrorProfile,
    pub sensing: Sensing,
    pub jammer: JammerParams,
    pub packet_len: usize,
    pub n_slots: u64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            traffic: TrafficParams { q1: 0.5, q: 0.5 },
            links: LinkBudget::uniform([1.0, 1.0, 0.0], DEFAULT_PATH_GAIN, 1.0, DEFAULT_NOISE_POWER, 1.0),
            profile: DetectorErrorProfile::default(),
            sensing: Sensing::Probabilistic,
            jammer: JammerParams::default(),
            packet_len: 64,
            n_slots: 1_000_000,
            seed: 0,
        }
    }
}

/// Closed-form results for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub distribution: EventDistribution,
    pub q2: f64,
    pub q3: f64,
    pub jammer: JammerBudget,
    /// Link budget with the selected jamming power filled in.
    pub links: LinkBudget,
    /// Per-slot success probabilities of nodes 1 and 2.
    pub s1: f64,
    pub s2: f64,
    /// Success probability per transmission attempt, `None` when the node never transmits.
    pub s1_attempt: Option<f64>,
    pub s2_attempt: Option<f64>,
    /// Mean ages `1/S`; infinite when the node never delivers.
    pub aoi1: f64,
    pub aoi2: f64,
}

fn mean_age(s: f64) -> f64 {
    if s > 0.0 {
        1.0 / s
    } else {
        f64::INFINITY
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.traffic.validate()?;
        self.links.validate()?;
        self.profile.validate()?;
        if !(self.jammer.pbar_max.is_finite() && self.jammer.pbar_max >= 0.0) {
            return invalid("jammer average power budget must be nonnegative");
        }
        if self.packet_len == 0 {
            return invalid("packet length must be at least 1");
        }
        if self.n_slots == 0 {
            return invalid("simulation needs at least one slot");
        }
        if let Sensing::Signal(d) = &self.sensing {
            for m in [&d.cnn, &d.fnn] {
                if m.packet_len != self.packet_len {
                    return invalid(format!(
                        "{} detector expects {}-sample packets, scenario uses {}",
                        m.architecture.name(),
                        m.packet_len,
                        self.packet_len
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn analyze(&self) -> Result<Analysis> {
        self.validate()?;
        let distribution = joint_active_set_distribution(&self.traffic, &self.profile)?;
        let q2 = secondary_tx_prob(&self.traffic, &self.profile);
        let q3 = jammer_activation_prob(&distribution).clamp(0.0, 1.0);
        let jammer = select_jamming_power_capped(self.jammer.pbar_max, q3, self.jammer.p3_cap)?;
        let links = self.links.clone().with_tx_power(3, jammer.p3_selected)?;
        let s1 = per_slot_success_prob(1, &distribution, &links)?;
        let s2 = per_slot_success_prob(2, &distribution, &links)?;
        let q1_marginal = distribution.marginal(1)?;
        let q2_marginal = distribution.marginal(2)?;
        Ok(Analysis {
            distribution,
            q2,
            q3,
            jammer,
            links,
            s1,
            s2,
            s1_attempt: (q1_marginal > 0.0).then(|| s1 / q1_marginal),
            s2_attempt: (q2_marginal > 0.0).then(|| s2 / q2_marginal),
            aoi1: mean_age(s1),
            aoi2: mean_age(s2),
        })
    }
}
