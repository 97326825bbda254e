//! A single simulation run compared quantity by quantity with the closed form.

use super::{csv_bytes, num, opt_num};
use crate::error::Result;
use crate::link::ActiveSet;
use crate::scenario::ScenarioConfig;
use crate::sim::run_with_analysis;

pub const SIMULATE_COLUMNS: [&str; 3] = ["quantity", "empirical", "analytic"];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRow {
    pub quantity: String,
    pub empirical: f64,
    pub analytic: Option<f64>,
}

fn set_name(set: ActiveSet) -> String {
    if set.is_empty() {
        "freq_none".to_string()
    } else {
        let ids: String = set.members().map(|m| char::from(b'0' + m as u8)).collect();
        format!("freq_{ids}")
    }
}

pub fn run_simulate(cfg: &ScenarioConfig) -> Result<Vec<SimulateRow>> {
    let a = cfg.analyze()?;
    let r = run_with_analysis(cfg, &a)?;
    let mut rows = Vec::new();
    let mut push = |q: &str, e: f64, an: Option<f64>| {
        rows.push(SimulateRow {
            quantity: q.to_string(),
            empirical: e,
            analytic: an,
        })
    };
    for set in ActiveSet::all() {
        push(&set_name(set), r.set_frequency(set), Some(a.distribution.mass(set)));
    }
    push("q2", r.q2, Some(a.q2));
    push("q3", r.q3, Some(a.q3));
    push("p3", r.p3, Some(a.jammer.p3_selected));
    push("avg_jamming_power", r.average_jamming_power, Some(a.jammer.average_power()));
    push("aoi1", r.mean_aoi(1), Some(a.aoi1));
    push("aoi2", r.mean_aoi(2), Some(a.aoi2));
    push("aoi1_stderr", r.aoi_stderr[0], None);
    push("aoi2_stderr", r.aoi_stderr[1], None);
    push("attempt_success1", r.attempt_success[0], a.s1_attempt);
    push("attempt_success2", r.attempt_success[1], a.s2_attempt);
    let measured = r.sensing.profile();
    let p = cfg.profile;
    for (name, e, an) in [
        ("pm", measured.pm, p.pm),
        ("pf", measured.pf, p.pf),
        ("pm1", measured.pm1, p.pm1),
        ("pm2", measured.pm2, p.pm2),
        ("pm12", measured.pm12, p.pm12),
        ("pf_j", measured.pf_j, p.pf_j),
    ] {
        push(name, e, Some(an));
    }
    Ok(rows)
}

pub fn simulate_csv(rows: &[SimulateRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &SIMULATE_COLUMNS,
        rows.iter()
            .map(|r| vec![r.quantity.clone(), num(r.empirical), opt_num(r.analytic)]),
    )
}
