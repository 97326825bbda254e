//! Joint distribution of active transmitters given traffic and sensing errors,
//! and the jammer's budget-constrained power.

use crate::error::{invalid, Result};
use crate::link::ActiveSet;

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        invalid(format!("{name}={p} is not a probability"))
    }
}

/// Error rates of the two detectors in the network.
///
/// `pm`/`pf` belong to the secondary's incumbent detector. The remaining
/// fields belong to the jammer: misses when only node 1 or only node 2 is on
/// the air, misses on the combined signal, and false alarms on an idle channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorErrorProfile {
    pub pm: f64,
    pub pf: f64,
    pub pm1: f64,
    pub pm2: f64,
    pub pm12: f64,
    pub pf_j: f64,
}

impl DetectorErrorProfile {
    pub const PERFECT: DetectorErrorProfile = DetectorErrorProfile {
        pm: 0.0,
        pf: 0.0,
        pm1: 0.0,
        pm2: 0.0,
        pm12: 0.0,
        pf_j: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        check_prob("pm", self.pm)?;
        check_prob("pf", self.pf)?;
        check_prob("pm1", self.pm1)?;
        check_prob("pm2", self.pm2)?;
        check_prob("pm12", self.pm12)?;
        check_prob("pf_j", self.pf_j)
    }

    /// Combining both transmitters raises the SNR at the jammer, so its miss
    /// rate on the combined signal is expected not to exceed either single rate.
    pub fn consistency_warning(&self) -> Option<String> {
        (self.pm12 > self.pm1.min(self.pm2)).then(|| {
            format!(
                "combined miss rate pm12={} exceeds min(pm1={}, pm2={})",
                self.pm12, self.pm1, self.pm2
            )
        })
    }
}

impl Default for DetectorErrorProfile {
    /// Measured operating point of the default-trained 64-sample detector
    /// pair at 0 dB detection SNR, rounded to two decimals.
    fn default() -> Self {
        Self {
            pm: 0.18,
            pf: 0.12,
            pm1: 0.28,
            pm2: 0.27,
            pm12: 0.07,
            pf_j: 0.12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficParams {
    /// Probability that the incumbent occupies a slot.
    pub q1: f64,
    /// Probability that the secondary has a fresh packet in a slot.
    pub q: f64,
}

impl TrafficParams {
    pub fn new(q1: f64, q: f64) -> Result<Self> {
        let t = Self { q1, q };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("q1", self.q1)?;
        check_prob("q", self.q)
    }
}

/// Probability mass on each of the eight subsets of {1, 2, 3}, indexed by mask.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EventDistribution {
    mass: [f64; 8],
}

impl EventDistribution {
    pub fn from_masses(mass: [f64; 8]) -> Result<Self> {
        if mass.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return invalid("every mass must lie in [0, 1]");
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("masses sum to {total}, not 1"));
        }
        Ok(Self { mass })
    }

    pub fn mass(&self, set: ActiveSet) -> f64 {
        self.mass[set.mask() as usize]
    }

    pub fn masses(&self) -> &[f64; 8] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Probability that `node` is active.
    pub fn marginal(&self, node: usize) -> Result<f64> {
        if !(1..=3).contains(&node) {
            return invalid(format!("node index {node} is not one of 1, 2, 3"));
        }
        Ok(ActiveSet::all()
            .filter(|s| s.contains(node))
            .map(|s| self.mass(s))
            .sum())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ActiveSet, f64)> + '_ {
        ActiveSet::all().map(|s| (s, self.mass(s)))
    }
}

/// Transmit probability of the secondary: it transmits when it has a packet
/// and believes the channel idle.
pub fn secondary_tx_prob(traffic: &TrafficParams, errors: &DetectorErrorProfile) -> f64 {
    let TrafficParams { q1, q } = *traffic;
    ((1.0 - q1) * (1.0 - errors.pf) + q1 * errors.pm) * q
}

pub fn joint_active_set_distribution(
    traffic: &TrafficParams,
    errors: &DetectorErrorProfile,
) -> Result<EventDistribution> {
    traffic.validate()?;
    errors.validate()?;
    let TrafficParams { q1, q } = *traffic;
    let e = errors;

    // Secondary transmits: alongside the incumbent after a miss, alone after a correct idle decision.
    let both = q1 * e.pm * q;
    let only2 = (1.0 - q1) * (1.0 - e.pf) * q;
    // Secondary silent: sensed busy or had no packet.
    let only1 = q1 * ((1.0 - e.pm) + e.pm * (1.0 - q));
    let idle = (1.0 - q1) * (e.pf + (1.0 - e.pf) * (1.0 - q));

    let mut mass = [0.0; 8];
    let mut put = |n1: bool, n2: bool, n3: bool, p: f64| {
        mass[ActiveSet::from_flags(n1, n2, n3).mask() as usize] = p;
    };
    put(true, true, true, both * (1.0 - e.pm12));
    put(true, true, false, both * e.pm12);
    put(false, true, true, only2 * (1.0 - e.pm2));
    put(false, true, false, only2 * e.pm2);
    put(true, false, true, only1 * (1.0 - e.pm1));
    put(true, false, false, only1 * e.pm1);
    put(false, false, true, idle * e.pf_j);
    put(false, false, false, idle * (1.0 - e.pf_j));
    Ok(EventDistribution { mass })
}

/// Probability that the jammer transmits: total mass on sets containing node 3.
pub fn jammer_activation_prob(dist: &EventDistribution) -> f64 {
    ActiveSet::all()
        .filter(|s| s.contains(3))
        .map(|s| dist.mass(s))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerBudget {
    pub pbar_max: f64,
    pub p3_selected: f64,
    pub q3: f64,
    /// False when the jammer never fires (zero activation probability).
    pub active: bool,
}

impl JammerBudget {
    pub fn average_power(&self) -> f64 {
        self.p3_selected * self.q3
    }
}

/// Spends the whole average budget: `P3 = pbar_max / q3`.
pub fn select_jamming_power(pbar_max: f64, q3: f64) -> Result<JammerBudget> {
    select_jamming_power_capped(pbar_max, q3, None)
}

/// As [`select_jamming_power`], optionally limiting the per-slot power to `cap`.
pub fn select_jamming_power_capped(pbar_max: f64, q3: f64, cap: Option<f64>) -> Result<JammerBudget> {
    if !(pbar_max.is_finite() && pbar_max >= 0.0) {
        return invalid(format!("average power budget {pbar_max} must be nonnegative"));
    }
    check_prob("q3", q3)?;
    if let Some(c) = cap {
        if !(c >= 0.0) {
            return invalid(format!("power cap {c} must be nonnegative"));
        }
    }
    if q3 == 0.0 {
        return Ok(JammerBudget {
            pbar_max,
            p3_selected: 0.0,
            q3,
            active: false,
        });
    }
    let mut p3 = pbar_max / q3;
    if let Some(c) = cap {
        p3 = p3.min(c);
    }
    Ok(JammerBudget {
        pbar_max,
        p3_selected: p3,
        q3,
        active: true,
    })
}
