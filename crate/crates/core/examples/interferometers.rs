//! Split, run two arms, merge: the graph closes into a loop and the merged
//! amplitude has modulus one.

use qtm::graphs::{build_graph, classify_structure, NODE_EPS};
use qtm::machines::{self, InterferometerSeed};
use qtm::paths::{generate_path, verify_distinct_path, PathOptions, EPS_ORTH};

fn main() -> qtm::Result<()> {
    let one = machines::interferometer_one()?;
    for gap in 0..4 {
        let seed = machines::interferometer_seed(InterferometerSeed::One { gap })?;
        let s = classify_structure(&build_graph(&one, &seed, gap + 8, NODE_EPS)?);
        let l = &s.loops[0];
        println!(
            "interf1 gap={gap}: arms {:?}, merge {:?}",
            l.arm_lengths, l.merge_amplitude
        );
    }

    let v = machines::hadamard_like();
    let two = machines::interferometer_two(&v)?;
    let seed = machines::interferometer_seed(InterferometerSeed::Two)?;
    let s = classify_structure(&build_graph(&two, &seed, 9, NODE_EPS)?);
    for l in &s.loops {
        println!(
            "interf2 loop depth {}: steps {}..{}, arms {:?}",
            l.depth, l.open_step, l.close_step, l.arm_lengths
        );
        for d in &l.arm_differences {
            println!(
                "    step {}: sites {:?}, head levels {:?}",
                d.step, d.sites, d.head_levels
            );
        }
    }

    let chain = machines::interferometer_seed(InterferometerSeed::TwoChain { count: 3 })?;
    let s = classify_structure(&build_graph(&two, &chain, 30, NODE_EPS)?);
    println!(
        "chain of three: {} outer loops",
        s.top_level_loops().count()
    );

    // reversing two shifts desynchronizes the arms
    let broken = machines::interferometer_two_broken(&v)?;
    let p = generate_path(
        &broken,
        &machines::single_one_seed(1)?,
        12,
        3,
        PathOptions::default(),
    )?;
    let report = verify_distinct_path(&broken, &p, EPS_ORTH)?;
    println!(
        "broken variant passes: {}, witness {:?}",
        report.passed(),
        report.witness
    );
    Ok(())
}
