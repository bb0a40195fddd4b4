//! H restricted to a path is a tridiagonal chain; compare its spectrum with
//! the standing-wave formulas.

use qtm::dynamics::{eigensystem, path_hamiltonian, Boundary, PathHamiltonian};
use qtm::machines::{self, ErasurePathState};
use qtm::paths::{follow_verified, PathOptions};

fn main() -> qtm::Result<()> {
    let h = PathHamiltonian::from_weights(&[1.0, 1.0], 1.0, Boundary::Open)?;
    report("three states", &h);

    let op = machines::erasure()?;
    let seed = ErasurePathState::new(0, 4).with_left_wall(-1).build()?;
    let path = follow_verified(&op, &seed, 20, 20, PathOptions::default())?;
    report("erasure, walls at -1 and 4", &path_hamiltonian(&path, 1.0)?);

    let ring = machines::cycle(5)?;
    let seed = qtm::WaveState::basis(
        ring.dims(),
        qtm::BasisVector::new(0, 0, qtm::QuditLattice::new(2)?),
    )?;
    let path = follow_verified(&ring, &seed, 10, 10, PathOptions::default())?;
    report("five-cycle", &path_hamiltonian(&path, 1.0)?);
    Ok(())
}

fn report(title: &str, h: &PathHamiltonian) {
    let s = eigensystem(h);
    println!("{title}: N={}", h.n);
    println!(
        "  numeric  {:?}",
        s.eigenvalues
            .iter()
            .map(|e| format!("{e:.6}"))
            .collect::<Vec<_>>()
    );
    for cf in &s.closed_forms {
        let mark = if cf.agrees { "agrees" } else { "DISAGREES" };
        println!("  {:<13} {mark}: {}", cf.name, cf.note);
    }
}
