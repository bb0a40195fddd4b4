//! Decide from the single-site transition table whether every basis vector
//! lies on its own path.

use std::time::Instant;

use qtm::machines::all_builtins;

fn main() {
    for op in all_builtins() {
        let t = Instant::now();
        let d = op.check_dpg_computation_basis();
        let locality = op.check_homogeneity_locality(200, 0);
        println!(
            "{:<15} distinct={:<5} local={:<5} ({:?})",
            op.name(),
            d.distinct,
            locality.passed,
            t.elapsed()
        );
        if let Some(w) = d.witness {
            println!("    {}", serde_json::to_string(&w).unwrap());
        }
    }
}
