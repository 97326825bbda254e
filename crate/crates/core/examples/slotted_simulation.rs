//! One slotted run with probabilistic sensing, next to the closed form.
//!
//! $ cargo run --release --example slotted_simulation

use agejam::scenario::ScenarioConfig;
use agejam::sim::{empirical_jammer_budget_check, run_slotted};

fn main() -> agejam::Result<()> {
    let cfg = ScenarioConfig {
        n_slots: 1_000_000,
        seed: 11,
        ..Default::default()
    };
    let a = cfg.analyze()?;
    let r = run_slotted(&cfg)?;
    println!("{:<22} {:>10} {:>10}", "", "simulated", "analytic");
    let rows = [
        ("q2", r.q2, a.q2),
        ("q3", r.q3, a.q3),
        ("P3", r.p3, a.jammer.p3_selected),
        ("mean AoI, incumbent", r.mean_aoi(1), a.aoi1),
        ("mean AoI, secondary", r.mean_aoi(2), a.aoi2),
    ];
    for (name, sim, ana) in rows {
        println!("{name:<22} {sim:>10.4} {ana:>10.4}");
    }
    let budget = empirical_jammer_budget_check(&r, cfg.jammer.pbar_max);
    println!("average jamming power {:.4} (budget {})", budget.measured, cfg.jammer.pbar_max);
    Ok(())
}
