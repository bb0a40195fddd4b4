//! exp(-iHt) two ways: spectral decomposition on a closed subspace, and the
//! truncated series over powers of H.

use qtm::dynamics::{energy, pathsum_state, Closure, EvolveOptions, Propagator};
use qtm::machines::{self, ErasurePathState};

fn main() -> qtm::Result<()> {
    let op = machines::erasure()?;
    let k = 1.0;
    let psi0 = ErasurePathState::new(0, 4).with_left_wall(-2).build()?;
    let opts = EvolveOptions {
        closure: Closure::StateOrbit,
        ..Default::default()
    };
    let prop = Propagator::new(&op, k, &psi0, 4.0, opts)?;
    println!("subspace dimension {}", prop.dimension());
    println!(
        "{:>5} {:>10} {:>10} {:>12}",
        "t", "norm", "energy", "series err"
    );
    for step in 0..=8 {
        let t = 0.5 * step as f64;
        let ev = prop.evolve(&psi0, t)?;
        let err = if k * t <= 1.0 {
            format!(
                "{:.2e}",
                ev.state.distance(&pathsum_state(&op, k, &psi0, t, 30)?)?
            )
        } else {
            "-".into()
        };
        println!(
            "{t:>5.1} {:>10.6} {:>10.6} {err:>12}",
            ev.state.norm(),
            energy(&op, k, &ev.state)?
        );
    }
    Ok(())
}
