//! Machines and states round-trip through JSON files, so custom machines
//! can be fed to the library or the `qtm` binary.

use qtm::io::{load_machine, load_state, machine_to_json, save_machine, save_state};
use qtm::machines;
use qtm::paths::{follow_verified, PathOptions};

fn main() -> qtm::Result<()> {
    let dir = std::env::temp_dir().join("qtm-machine-files");
    std::fs::create_dir_all(&dir)?;

    let op = machines::interferometer_one()?;
    let machine_path = dir.join("interf1.json");
    save_machine(&op, &machine_path)?;
    let loaded = load_machine(&machine_path)?;
    println!("machine round trip equal: {}", loaded == op);

    let seed = machines::interferometer_seed(machines::InterferometerSeed::One { gap: 1 })?;
    let state_path = dir.join("seed.json");
    save_state(&seed, &state_path)?;
    let seed = load_state(&state_path, Some(loaded.dims()))?;

    let path = follow_verified(&loaded, &seed, 10, 3, PathOptions::default())?;
    println!(
        "path of {} states, weights {:?}",
        path.path().len(),
        path.path().weights
    );
    println!(
        "{} terms, {} bytes of JSON",
        op.terms().len(),
        machine_to_json(&op).len()
    );
    println!(
        "try: qtm path --machine {} --state {}",
        machine_path.display(),
        state_path.display()
    );
    Ok(())
}
