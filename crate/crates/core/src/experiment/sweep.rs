//! One- and two-parameter sweeps over a base scenario.
//!
//! The swept parameter sits on the x axis; an optional series parameter adds
//! one curve (or heatmap row) per value. Grid points run in parallel and rows
//! come back in grid order: series-major, then x.

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;

use super::settings::{packet_size_profiles, profile_for, scenario_from_config};
use super::{csv_bytes, derive_seed, num, opt_num, Mode};
use crate::config::ConfigMap;
use crate::error::{Error, Result};
use crate::occupancy::{DetectorErrorProfile, TrafficParams};
use crate::scenario::{ScenarioConfig, Sensing};
use crate::sim::run_with_analysis;

pub const SWEEP_COLUMNS: [&str; 17] = [
    "series_param",
    "series_value",
    "x_param",
    "x_value",
    "s1",
    "s2",
    "s2_attempt",
    "q2",
    "q3",
    "p3",
    "aoi1",
    "aoi2",
    "aoi1_sim",
    "aoi2_sim",
    "aoi1_sim_stderr",
    "aoi2_sim_stderr",
    "sim_agrees",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepParam {
    /// Incumbent activity probability.
    Q1,
    /// Secondary packet probability.
    Q,
    /// Incumbent transmit power.
    P1,
    /// Secondary transmit power.
    P2,
    /// Secondary transmit power in dB relative to the configured value.
    P2Db,
    /// Jammer average power budget.
    PbarMax,
    /// Samples per sensed packet; selects the matching detector profile.
    PacketSize,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::Q1,
        SweepParam::Q,
        SweepParam::P1,
        SweepParam::P2,
        SweepParam::P2Db,
        SweepParam::PbarMax,
        SweepParam::PacketSize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Q1 => "q1",
            SweepParam::Q => "q",
            SweepParam::P1 => "p1",
            SweepParam::P2 => "p2",
            SweepParam::P2Db => "p2_db",
            SweepParam::PbarMax => "pbar_max",
            SweepParam::PacketSize => "packet_size",
        }
    }

    fn touches_p2(self) -> bool {
        matches!(self, SweepParam::P2 | SweepParam::P2Db)
    }

    fn apply(
        self,
        cfg: &mut ScenarioConfig,
        value: f64,
        profiles: &BTreeMap<usize, DetectorErrorProfile>,
    ) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(format!("{}={value}: {why}", self.name())));
        match self {
            SweepParam::Q1 | SweepParam::Q => {
                let TrafficParams { q1, q } = cfg.traffic;
                cfg.traffic = if self == SweepParam::Q1 {
                    TrafficParams { q1: value, q }
                } else {
                    TrafficParams { q1, q: value }
                };
                if !(0.0..=1.0).contains(&value) {
                    return bad("probability outside [0, 1]");
                }
            }
            SweepParam::P1 | SweepParam::P2 | SweepParam::PbarMax => {
                if !(value.is_finite() && value >= 0.0) {
                    return bad("power must be nonnegative");
                }
                match self {
                    SweepParam::P1 => cfg.links.tx_power[0] = value,
                    SweepParam::P2 => cfg.links.tx_power[1] = value,
                    _ => cfg.jammer.pbar_max = value,
                }
            }
            SweepParam::P2Db => cfg.links.tx_power[1] *= 10f64.powf(value / 10.0),
            SweepParam::PacketSize => {
                if value.fract() != 0.0 || value < 1.0 {
                    return bad("packet size must be a positive integer");
                }
                let n = value as usize;
                let Some(p) = profiles.get(&n) else {
                    return bad("no detector profile for this packet size (set profile.<N>.* keys)");
                };
                cfg.packet_len = n;
                cfg.profile = *p;
            }
        }
        Ok(())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|p| p.name()).collect();
            Error::Config(format!("unknown sweep parameter `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: SweepParam,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub x: Axis,
    pub series: Option<Axis>,
    pub mode: Mode,
    /// Profiles used when sweeping the packet size.
    pub profiles: BTreeMap<usize, DetectorErrorProfile>,
}

/// One scenario per grid point, tagged with its coordinates.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub series_value: Option<f64>,
    pub x_value: f64,
    pub scenario: ScenarioConfig,
}

impl SweepSpec {
    pub fn new(base: ScenarioConfig, x: Axis, series: Option<Axis>, mode: Mode) -> Self {
        Self {
            base,
            x,
            series,
            mode,
            profiles: BTreeMap::new(),
        }
    }

    /// Reads `sweep.param`, `sweep.grid`, optional `sweep.series`/`sweep.series_grid`
    /// and `sweep.mode` on top of the scenario keys. `mode` overrides `sweep.mode`.
    pub fn from_config(map: &ConfigMap, seed: Option<u64>, mode: Option<Mode>) -> Result<Self> {
        let base = scenario_from_config(map, seed)?;
        let axis = |param_key: &str, grid_key: &str| -> Result<Option<Axis>> {
            match (map.raw(param_key), map.get_grid(grid_key)?) {
                (None, None) => Ok(None),
                (Some(p), Some(grid)) => Ok(Some(Axis { param: p.parse()?, grid })),
                _ => Err(Error::Config(format!("`{param_key}` and `{grid_key}` must be given together"))),
            }
        };
        let x = axis("sweep.param", "sweep.grid")?
            .ok_or_else(|| Error::Config("sweep.param and sweep.grid are required".into()))?;
        let series = axis("sweep.series", "sweep.series_grid")?;
        let mode = match mode {
            Some(m) => m,
            None => map.raw("sweep.mode").map(str::parse).transpose()?.unwrap_or_default(),
        };
        let mut spec = SweepSpec::new(base, x, series, mode);
        let mut profiles = packet_size_profiles(map)?;
        for n in spec.packet_sizes() {
            if profiles.contains_key(&n) {
                profiles.insert(n, profile_for(map, n)?);
            }
        }
        spec.profiles = profiles;
        spec.grid_points()?;
        Ok(spec)
    }

    fn packet_sizes(&self) -> Vec<usize> {
        [Some(&self.x), self.series.as_ref()]
            .into_iter()
            .flatten()
            .filter(|a| a.param == SweepParam::PacketSize)
            .flat_map(|a| a.grid.iter().map(|v| *v as usize))
            .collect()
    }

    /// Expands and validates the grid without running anything.
    pub fn grid_points(&self) -> Result<Vec<GridPoint>> {
        let axes = [Some(&self.x), self.series.as_ref()];
        for a in axes.iter().flatten() {
            if a.grid.is_empty() {
                return Err(Error::Config(format!("grid for {} is empty", a.param.name())));
            }
        }
        if let Some(s) = &self.series {
            if s.param == self.x.param || (s.param.touches_p2() && self.x.param.touches_p2()) {
                return Err(Error::Config("series and x parameters must differ".into()));
            }
        }
        if matches!(self.base.sensing, Sensing::Signal(_)) && axes.iter().flatten().any(|a| a.param == SweepParam::PacketSize) {
            return Err(Error::Config("packet size cannot be swept with signal sensing".into()));
        }
        let series_values: Vec<Option<f64>> = match &self.series {
            None => vec![None],
            Some(s) => s.grid.iter().copied().map(Some).collect(),
        };
        let mut points = Vec::new();
        for sv in series_values {
            for &xv in &self.x.grid {
                let mut cfg = self.base.clone();
                if let (Some(s), Some(v)) = (&self.series, sv) {
                    s.param.apply(&mut cfg, v, &self.profiles)?;
                }
                self.x.param.apply(&mut cfg, xv, &self.profiles)?;
                cfg.seed = derive_seed(self.base.seed, points.len() as u64);
                cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
                points.push(GridPoint {
                    series_value: sv,
                    x_value: xv,
                    scenario: cfg,
                });
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimColumns {
    pub aoi1: f64,
    pub aoi2: f64,
    pub aoi1_stderr: f64,
    pub aoi2_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub series: Option<(SweepParam, f64)>,
    pub x: (SweepParam, f64),
    pub s1: f64,
    pub s2: f64,
    pub s2_attempt: Option<f64>,
    pub q2: f64,
    pub q3: f64,
    pub p3: f64,
    pub aoi1: f64,
    pub aoi2: f64,
    pub sim: Option<SimColumns>,
    /// Both-mode self-check; `None` when not simulated or the analytic age is unbounded.
    pub sim_agrees: Option<bool>,
}

/// Simulated mean within 1% of the closed form plus three standard errors.
fn agrees(analytic: f64, simulated: f64, stderr: f64) -> Option<bool> {
    if !analytic.is_finite() {
        return None;
    }
    let slack = if stderr.is_finite() { 3.0 * stderr } else { 0.0 };
    Some((simulated - analytic).abs() <= 0.01 * analytic + slack)
}

impl SweepRow {
    pub fn to_record(&self) -> Vec<String> {
        let (sp, sv) = match self.series {
            Some((p, v)) => (p.name().to_string(), num(v)),
            None => (String::new(), String::new()),
        };
        let sim = |f: fn(&SimColumns) -> f64| self.sim.as_ref().map(f);
        vec![
            sp,
            sv,
            self.x.0.name().to_string(),
            num(self.x.1),
            num(self.s1),
            num(self.s2),
            opt_num(self.s2_attempt),
            num(self.q2),
            num(self.q3),
            num(self.p3),
            num(self.aoi1),
            num(self.aoi2),
            opt_num(sim(|s| s.aoi1)),
            opt_num(sim(|s| s.aoi2)),
            opt_num(sim(|s| s.aoi1_stderr)),
            opt_num(sim(|s| s.aoi2_stderr)),
            self.sim_agrees.map(|b| b.to_string()).unwrap_or_default(),
        ]
    }
}

fn run_point(spec: &SweepSpec, point: &GridPoint) -> Result<SweepRow> {
    let cfg = &point.scenario;
    let a = cfg.analyze()?;
    let sim = if spec.mode.simulates() {
        let r = run_with_analysis(cfg, &a)?;
        Some(SimColumns {
            aoi1: r.mean_aoi(1),
            aoi2: r.mean_aoi(2),
            aoi1_stderr: r.aoi_stderr[0],
            aoi2_stderr: r.aoi_stderr[1],
        })
    } else {
        None
    };
    let sim_agrees = match (spec.mode, &sim) {
        (Mode::Both, Some(s)) => {
            let checks = [agrees(a.aoi1, s.aoi1, s.aoi1_stderr), agrees(a.aoi2, s.aoi2, s.aoi2_stderr)];
            checks.into_iter().flatten().reduce(|x, y| x && y)
        }
        _ => None,
    };
    Ok(SweepRow {
        series: spec.series.as_ref().zip(point.series_value).map(|(s, v)| (s.param, v)),
        x: (spec.x.param, point.x_value),
        s1: a.s1,
        s2: a.s2,
        s2_attempt: a.s2_attempt,
        q2: a.q2,
        q3: a.q3,
        p3: a.jammer.p3_selected,
        aoi1: a.aoi1,
        aoi2: a.aoi2,
        sim,
        sim_agrees,
    })
}

/// Evaluates every grid point; rows are returned in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let points = spec.grid_points()?;
    points.par_iter().map(|p| run_point(spec, p)).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    csv_bytes(&SWEEP_COLUMNS, rows.iter().map(SweepRow::to_record))
}

/// Grid points whose simulated ages disagree with the closed form.
pub fn disagreements(rows: &[SweepRow]) -> Vec<&SweepRow> {
    rows.iter().filter(|r| r.sim_agrees == Some(false)).collect()
}
