//! Link budget and SINR success probabilities under Rayleigh fading.
//!
//! Node indices are 1 (incumbent), 2 (secondary) and 3 (jammer). Every link
//! carries a constant path gain and a mean small-scale power gain; the
//! instantaneous received power on a link is exponential with mean
//! `tx_power · path_gain · mean_fading`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, Result};
use crate::occupancy::EventDistribution;

pub const NODES: [usize; 3] = [1, 2, 3];

fn check_node(i: usize) -> Result<usize> {
    if (1..=3).contains(&i) {
        Ok(i - 1)
    } else {
        invalid(format!("node index {i} is not one of 1, 2, 3"))
    }
}

/// How each interferer's term enters the success probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceFactor {
    /// `exp(-γσ²/R) · Π 1/(1 + γ R_j/R)`, the exponential-fading outage result.
    #[default]
    Divide,
    /// `exp(-γσ²/R) · Π (1 + γ R_j/R)`. Kept for side-by-side comparison only;
    /// it is not a probability and can exceed one.
    Multiply,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// Transmit power of nodes 1..=3 (watts).
    pub tx_power: [f64; 3],
    /// `path_gain[i][k]`: constant gain from transmitter `i+1` to the receiver of node `k+1`.
    pub path_gain: [[f64; 3]; 3],
    /// `mean_fading[i][k]`: mean of the exponential small-scale power gain on the same link.
    pub mean_fading: [[f64; 3]; 3],
    pub noise_power: f64,
    /// Linear SINR threshold for successful decoding.
    pub sinr_threshold: f64,
    pub interference: InterferenceFactor,
}

impl LinkBudget {
    /// Same path gain and mean fading on every link.
    pub fn uniform(
        tx_power: [f64; 3],
        path_gain: f64,
        mean_fading: f64,
        noise_power: f64,
        sinr_threshold: f64,
    ) -> Self {
        Self {
            tx_power,
            path_gain: [[path_gain; 3]; 3],
            mean_fading: [[mean_fading; 3]; 3],
            noise_power,
            sinr_threshold,
            interference: InterferenceFactor::Divide,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_power.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return invalid("transmit powers must be finite and nonnegative");
        }
        let gains = self.path_gain.iter().chain(self.mean_fading.iter()).flatten();
        if gains.into_iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return invalid("path gains and mean fading gains must be positive");
        }
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return invalid("noise power must be nonnegative");
        }
        if !(self.sinr_threshold.is_finite() && self.sinr_threshold > 0.0) {
            return invalid("SINR threshold must be positive");
        }
        Ok(())
    }

    pub fn with_tx_power(mut self, node: usize, power: f64) -> Result<Self> {
        let i = check_node(node)?;
        self.tx_power[i] = power;
        Ok(self)
    }

    /// Mean received power from transmitter `i` at the receiver of node `k`.
    pub fn received(&self, i: usize, k: usize) -> Result<f64> {
        let (a, b) = (check_node(i)?, check_node(k)?);
        Ok(self.tx_power[a] * self.path_gain[a][b] * self.mean_fading[a][b])
    }
}

/// Subset of {1, 2, 3} stored as a 3-bit mask (bit `i-1` set when node `i` is active).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ActiveSet(u8);

impl ActiveSet {
    pub const EMPTY: ActiveSet = ActiveSet(0);

    pub fn from_mask(mask: u8) -> Result<Self> {
        if mask > 0b111 {
            return invalid(format!("mask {mask:#b} has bits outside {{1,2,3}}"));
        }
        Ok(ActiveSet(mask))
    }

    pub fn from_nodes(nodes: &[usize]) -> Result<Self> {
        let mut mask = 0;
        for &n in nodes {
            mask |= 1 << check_node(n)?;
        }
        Ok(ActiveSet(mask))
    }

    pub(crate) fn from_flags(n1: bool, n2: bool, n3: bool) -> Self {
        ActiveSet(n1 as u8 | (n2 as u8) << 1 | (n3 as u8) << 2)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, node: usize) -> bool {
        (1..=3).contains(&node) && self.0 & (1 << (node - 1)) != 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        NODES.into_iter().filter(move |&n| self.contains(n))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// All eight subsets, ordered by mask.
    pub fn all() -> impl Iterator<Item = ActiveSet> {
        (0u8..8).map(ActiveSet)
    }
}

impl std::fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = self.members().map(|n| n.to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

pub fn mean_received_power(i: usize, k: usize, links: &LinkBudget) -> Result<f64> {
    links.received(i, k)
}

/// Probability that receiver `i` decodes its transmitter while every node in
/// `set` transmits simultaneously.
pub fn success_prob_given_set(i: usize, set: ActiveSet, links: &LinkBudget) -> Result<f64> {
    if !(i == 1 || i == 2) {
        return invalid(format!("node {i} has no receiver"));
    }
    if !set.contains(i) {
        return invalid(format!("node {i} is not in active set {set}"));
    }
    let own = links.received(i, i)?;
    if own == 0.0 {
        return Ok(0.0);
    }
    let gamma = links.sinr_threshold;
    let mut p = (-gamma * links.noise_power / own).exp();
    for j in set.members().filter(|&j| j != i) {
        let factor = 1.0 + gamma * links.received(j, i)? / own;
        match links.interference {
            InterferenceFactor::Divide => p /= factor,
            InterferenceFactor::Multiply => p *= factor,
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Monte Carlo estimate of [`success_prob_given_set`] from independent
/// exponential draws of every received power.
pub fn success_prob_mc_oracle(
    i: usize,
    set: ActiveSet,
    links: &LinkBudget,
    n_draws: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n_draws == 0 {
        return invalid("n_draws must be at least 1");
    }
    if !set.contains(i) {
        return invalid(format!("node {i} is not in active set {set}"));
    }
    let own = links.received(i, i)?;
    let interferers = set
        .members()
        .filter(|&j| j != i)
        .map(|j| links.received(j, i))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..n_draws {
        let e: f64 = Exp1.sample(&mut rng);
        let signal = own * e;
        let mut denom = links.noise_power;
        for &m in &interferers {
            let e: f64 = Exp1.sample(&mut rng);
            denom += m * e;
        }
        if signal > links.sinr_threshold * denom {
            hits += 1;
        }
    }
    let p = hits as f64 / n_draws as f64;
    Ok(McEstimate {
        p,
        stderr: (p * (1.0 - p) / n_draws as f64).sqrt(),
        n: n_draws,
    })
}

/// Success probability of node `i` per transmission attempt: the average of
/// `S_i(A)` over active sets containing `i`, weighted by `P(A | i active)`.
pub fn average_success_prob(i: usize, dist: &EventDistribution, links: &LinkBudget) -> Result<f64> {
    let tx = dist.marginal(i)?;
    if tx <= 0.0 {
        return Err(crate::Error::NeverTransmits(i));
    }
    Ok(per_slot_success_prob(i, dist, links)? / tx)
}

/// Success probability of node `i` per slot: `Σ_A S_i(A) P(A)` with
/// `S_i(A) = 0` whenever `i` is silent. This is the rate that drives the age
/// process, since a silent slot delivers nothing.
pub fn per_slot_success_prob(i: usize, dist: &EventDistribution, links: &LinkBudget) -> Result<f64> {
    check_node(i)?;
    let mut total = 0.0;
    for set in ActiveSet::all().filter(|s| s.contains(i)) {
        let mass = dist.mass(set);
        if mass > 0.0 {
            total += mass * success_prob_given_set(i, set, links)?;
        }
    }
    Ok(total)
}
