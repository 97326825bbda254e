//! Age of Information: the per-slot recursion, its stationary geometric law,
//! and an empirical validator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Age after one slot: reset to 1 on delivery, otherwise grow by one.
pub fn aoi_step(age: u64, success: bool) -> Result<u64> {
    if age < 1 {
        return invalid("age must be at least 1");
    }
    Ok(if success { 1 } else { age + 1 })
}

/// Stationary probability that the age equals `k`: `(1-S)^(k-1) S`.
pub fn steady_state_prob(s: f64, k: u64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::ZeroSuccess("the age chain has no steady state"));
    }
    if !(0.0..=1.0).contains(&s) {
        return invalid(format!("success probability {s} outside (0, 1]"));
    }
    if k < 1 {
        return invalid("age must be at least 1");
    }
    Ok((1.0 - s).powf((k - 1) as f64) * s)
}

/// Mean stationary age, `1/S`.
pub fn average_aoi(s: f64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::ZeroSuccess("average age is infinite"));
    }
    if !(0.0..=1.0).contains(&s) {
        return invalid(format!("success probability {s} outside (0, 1]"));
    }
    Ok(1.0 / s)
}

/// Age process driven by independent Bernoulli(S) deliveries.
#[derive(Debug, Clone)]
pub struct AoiProcess {
    pub current_age: u64,
    pub success_prob: f64,
    rng: ChaCha8Rng,
}

impl AoiProcess {
    /// Starts at age 1, as if an update had just been delivered.
    pub fn new(success_prob: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&success_prob) {
            return invalid(format!("success probability {success_prob} outside [0, 1]"));
        }
        Ok(Self {
            current_age: 1,
            success_prob,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Advances one slot and returns the new age.
    pub fn advance(&mut self) -> u64 {
        let success = self.rng.random_bool(self.success_prob);
        self.current_age = if success { 1 } else { self.current_age + 1 };
        self.current_age
    }
}

/// Per-slot age samples summarized as a mean and a histogram.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AoiStats {
    pub mean_age: f64,
    /// `age_histogram[k]` counts slots that ended with age `k`; index 0 is unused.
    pub age_histogram: Vec<u64>,
    pub n_slots: u64,
    sum: u128,
}

impl AoiStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, age: u64) {
        let k = age as usize;
        if self.age_histogram.len() <= k {
            self.age_histogram.resize(k + 1, 0);
        }
        self.age_histogram[k] += 1;
        self.n_slots += 1;
        self.sum += age as u128;
        self.mean_age = self.sum as f64 / self.n_slots as f64;
    }
}

pub fn simulate_aoi(s: f64, n_slots: u64, seed: u64) -> Result<AoiStats> {
    let mut process = AoiProcess::new(s, seed)?;
    let mut stats = AoiStats::new();
    for _ in 0..n_slots {
        stats.record(process.advance());
    }
    Ok(stats)
}
