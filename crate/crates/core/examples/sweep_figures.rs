//! Secondary AoI against incumbent occupancy for three transmit
//! probabilities, analytic and simulated, written as CSV and SVG.
//!
//! $ cargo run --release --example sweep_figures [out_dir]

use std::path::PathBuf;

use agejam::experiment::{run_sweep, sweep_csv, write_report, Axis, Mode, PlotKind, SweepParam, SweepSpec};
use agejam::scenario::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep_figures".into()));
    let base = ScenarioConfig {
        n_slots: 200_000,
        seed: 5,
        ..Default::default()
    };
    let x = Axis {
        param: SweepParam::Q1,
        grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
    };
    let series = Axis {
        param: SweepParam::Q,
        grid: vec![0.2, 0.5, 0.9],
    };
    let rows = run_sweep(&SweepSpec::new(base, x, Some(series), Mode::Both))?;
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("aoi_vs_q1.csv");
    std::fs::write(&csv, sweep_csv(&rows)?)?;
    write_report(&csv, &csv.with_extension("svg"), "aoi2", PlotKind::Line)?;
    let agree = rows.iter().filter(|r| r.sim_agrees == Some(true)).count();
    println!("{} points, {agree} simulated means agree; wrote {}", rows.len(), dir.display());
    Ok(())
}
