//! Who is on the air: the distribution of active sets implied by traffic and
//! sensing errors, and the jamming power that spends the budget exactly.
//!
//! $ cargo run --release --example occupancy

use agejam::occupancy::{
    jammer_activation_prob, joint_active_set_distribution, secondary_tx_prob, select_jamming_power,
    DetectorErrorProfile, TrafficParams,
};

fn main() -> agejam::Result<()> {
    let errors = DetectorErrorProfile::default();
    for (q1, q) in [(0.2, 0.5), (0.5, 0.5), (0.8, 0.9)] {
        let traffic = TrafficParams::new(q1, q)?;
        let dist = joint_active_set_distribution(&traffic, &errors)?;
        let q3 = jammer_activation_prob(&dist);
        let budget = select_jamming_power(0.5, q3)?;
        println!(
            "q1={q1} q={q}: q2={:.3} q3={q3:.3} P3={:.3}",
            secondary_tx_prob(&traffic, &errors),
            budget.p3_selected
        );
        for (set, p) in dist.iter() {
            println!("    {:<9} {p:.4}", set.to_string());
        }
    }
    Ok(())
}
