//! The age chain on its own: stationary law and mean age against a long run.
//!
//! $ cargo run --release --example aoi_dtmc

use agejam::aoi::{average_aoi, simulate_aoi, steady_state_prob};

fn main() -> agejam::Result<()> {
    for s in [0.1, 0.3, 0.7] {
        let run = simulate_aoi(s, 1_000_000, 3)?;
        println!("S={s}: mean age {:.4} (closed form {:.4})", run.mean_age, average_aoi(s)?);
        for k in 1..=4u64 {
            let emp = run.age_histogram.get(k as usize).copied().unwrap_or(0) as f64 / run.n_slots as f64;
            println!("    P(age={k}) {emp:.4} vs {:.4}", steady_state_prob(s, k)?);
        }
    }
    Ok(())
}
