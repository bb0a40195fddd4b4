//! The add-1 machine writes every binary string of length n in
//! superposition; its computation-basis graph is a tree.

use qtm::graphs::{build_graph, classify_structure, NODE_EPS};
use qtm::machines;

fn main() -> qtm::Result<()> {
    let v = machines::hadamard_like();
    let op = machines::add_one(&v)?;
    for n in 1..=4usize {
        let seed = machines::add1_initial_state(&[0, n as i64 + 1], 0)?;
        let g = build_graph(&op, &seed, 3 * n + 4, NODE_EPS)?;
        let s = classify_structure(&g);
        let last = op.apply_power(&seed, 3 * n + 4, false)?;
        let closed = machines::add1_final_state(n, &v)?;
        println!(
            "n={n}: {} leaves, stages at {:?}, matches closed form: {}",
            s.leaves,
            s.stage_positions,
            last.distance(&closed)? < 1e-10
        );
    }

    let seed = machines::add1_initial_state(&[0, 3], 0)?;
    for (b, a) in op.apply_power(&seed, 10, false)?.iter() {
        println!("  {b}  {:+.4}", a.re);
    }
    Ok(())
}
