//! The erasure machine is not distinct-path generating in the computation
//! basis, yet it has a path of product states that ends at a wall.

use qtm::machines::{self, ErasurePathState};
use qtm::paths::{classify_shift_type, follow_verified, PathOptions};

fn main() -> qtm::Result<()> {
    let op = machines::erasure()?;
    let decision = op.check_dpg_computation_basis();
    println!("computation basis DPG: {}", decision.distinct);
    if let Some(w) = &decision.witness {
        println!("witness: {}", serde_json::to_string(w).unwrap());
    }

    let seed = ErasurePathState::new(0, 5).with_left_wall(-3).build()?;
    let path = follow_verified(&op, &seed, 20, 20, PathOptions::default())?;
    let p = path.path();
    println!(
        "\nm in [{}, {}], {:?}",
        p.m_min(),
        p.m_max(),
        p.classification
    );
    println!("shift type: {:?}", classify_shift_type(&path));
    println!("weights: {:?}", p.weights);
    for (k, s) in p.states.iter().enumerate() {
        println!("  m={:>2}: {} components", k as i64 + p.m_min(), s.len());
    }
    Ok(())
}
