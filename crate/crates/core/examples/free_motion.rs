//! A head moving one site per step: every basis vector is its own path.

use qtm::dynamics::{evolve, EvolveOptions};
use qtm::machines;
use qtm::paths::{follow_verified, PathOptions};
use qtm::{BasisVector, QuditLattice, WaveState};

fn main() -> qtm::Result<()> {
    let op = machines::free_motion()?;
    let start = BasisVector::new(0, 0, QuditLattice::from_entries(2, [(3, 1)])?);
    let psi = WaveState::basis(op.dims(), start)?;

    let path = follow_verified(&op, &psi, 4, 4, PathOptions::default())?;
    for (k, s) in path.path().states.iter().enumerate() {
        let m = k as i64 + path.path().m_min();
        for (b, a) in s.iter() {
            println!("m={m:>2}  {b}  {:.3}", a.re);
        }
    }

    // the wave packet spreads ballistically; amplitudes are Bessel functions
    let ev = evolve(&op, 1.0, &psi, 2.0, EvolveOptions::default())?;
    println!("\nt=2, K=1:");
    for (b, a) in ev.state.iter().filter(|(_, a)| a.norm() > 1e-3) {
        println!("  head at {:>3}  |amp|^2 = {:.4}", b.head_pos, a.norm_sqr());
    }
    Ok(())
}
