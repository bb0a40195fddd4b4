//! Write the computation graph of a run as Graphviz DOT and JSON.
//!
//! `cargo run --example graph_export -- out_dir`

use std::path::PathBuf;

use qtm::graphs::{build_graph, export_graph, GraphFormat, NODE_EPS};
use qtm::machines;

fn main() -> qtm::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let op = machines::add_one(&machines::hadamard_like())?;
    let seed = machines::add1_initial_state(&[0, 4], 0)?;
    let g = build_graph(&op, &seed, 13, NODE_EPS)?;
    for (format, ext) in [(GraphFormat::Dot, "dot"), (GraphFormat::Json, "json")] {
        let path = dir.join(format!("add1_tree.{ext}"));
        std::fs::write(&path, export_graph(&g, format))?;
        println!("wrote {}", path.display());
    }
    println!("{} nodes, {} edges", g.nodes.len(), g.edges.len());
    Ok(())
}
