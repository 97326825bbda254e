//! Success probabilities of the secondary link for every transmitter set,
//! with the jammer at the power it would select in the default scenario,
//! checked against a Monte Carlo draw of the fading gains.
//!
//! $ cargo run --release --example link_budget

use agejam::link::{success_prob_given_set, success_prob_mc_oracle, ActiveSet};
use agejam::scenario::ScenarioConfig;

fn main() -> agejam::Result<()> {
    let a = ScenarioConfig::default().analyze()?;
    let links = a.links;
    println!("jamming power {:.4}", a.jammer.p3_selected);
    println!("{:<10} {:>10} {:>10} {:>9}", "set", "closed", "monte", "stderr");
    for set in ActiveSet::all().filter(|s| s.contains(2)) {
        let exact = success_prob_given_set(2, set, &links)?;
        let mc = success_prob_mc_oracle(2, set, &links, 200_000, 1)?;
        println!("{:<10} {exact:>10.5} {:>10.5} {:>9.5}", set.to_string(), mc.p, mc.stderr);
    }
    Ok(())
}
