//! Time-unrolled computation-basis graphs of a forward path: trees,
//! interferometer loops, and DOT/JSON export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QtmError, Result};
use crate::operators::StepOperator;
use crate::state::{BasisVector, WaveState};

/// Components at or below this modulus are not graph nodes.
pub const NODE_EPS: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphNode {
    pub step: usize,
    pub basis: BasisVector,
    /// Amplitude in the normalized `Ψ_step`.
    pub amplitude: Complex64,
    /// Indices of the terms acting on `basis`.
    pub active_terms: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    /// Step of the source node.
    pub step: usize,
    /// `⟨to|T|from⟩`.
    pub amplitude: Complex64,
}

/// Nodes are sorted by step, then basis vector; node identity is the pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ComputationGraph {
    pub machine: String,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub seed: WaveState,
    /// `‖TΨ_m‖` for each completed step.
    pub step_weights: Vec<f64>,
    /// The run stopped at a state annihilated by `T`.
    pub terminated: bool,
    term_labels: Vec<String>,
}

impl ComputationGraph {
    pub fn steps(&self) -> usize {
        self.nodes.last().map_or(0, |n| n.step)
    }

    pub fn nodes_at(&self, step: usize) -> impl Iterator<Item = (usize, &GraphNode)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.step == step)
    }

    /// Number of components of `Ψ_m` for `m = 0..=steps`.
    pub fn component_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.steps() + 1];
        for n in &self.nodes {
            counts[n.step] += 1;
        }
        counts
    }

    pub fn out_degree(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for e in &self.edges {
            d[e.from] += 1;
        }
        d
    }

    pub fn in_degree(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for e in &self.edges {
            d[e.to] += 1;
        }
        d
    }

    fn parents(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            p[e.to].push(e.from);
        }
        p
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            c[e.from].push(e.to);
        }
        c
    }

    pub fn term_label(&self, index: usize) -> &str {
        &self.term_labels[index]
    }
}

/// Iterates `Ψ_{m+1} = TΨ_m/‖TΨ_m‖` and records every component above
/// `eps` together with the nonzero `⟨b'|T|b⟩` between consecutive steps.
pub fn build_graph(
    op: &StepOperator,
    seed: &WaveState,
    steps: usize,
    eps: f64,
) -> Result<ComputationGraph> {
    op.dims().ensure_same(seed.dims())?;
    let dims = op.dims();
    let mut psi = seed.normalized()?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut step_weights = Vec::new();
    let mut terminated = false;

    let push_layer = |nodes: &mut Vec<GraphNode>,
                      psi: &WaveState,
                      step: usize|
     -> BTreeMap<BasisVector, usize> {
        let mut index = BTreeMap::new();
        for (b, a) in psi.iter() {
            if a.norm() > eps {
                index.insert(b.clone(), nodes.len());
                nodes.push(GraphNode {
                    step,
                    basis: b.clone(),
                    amplitude: *a,
                    active_terms: op.active_terms(b),
                });
            }
        }
        index
    };

    let mut current = push_layer(&mut nodes, &psi, 0);
    for step in 0..steps {
        let next = op.apply(&psi)?;
        let w = next.norm();
        if w < crate::paths::EPS_TERMINAL {
            terminated = true;
            break;
        }
        step_weights.push(w);
        psi = next.scaled(Complex64::new(1.0 / w, 0.0));
        let following = push_layer(&mut nodes, &psi, step + 1);
        for (b, &from) in &current {
            let image = op.apply(&WaveState::basis(dims, b.clone())?)?;
            for (b2, a) in image.iter() {
                if let Some(&to) = following.get(b2) {
                    edges.push(GraphEdge {
                        from,
                        to,
                        step,
                        amplitude: *a,
                    });
                }
            }
        }
        current = following;
    }
    edges.sort_by_key(|e| (e.from, e.to));
    Ok(ComputationGraph {
        machine: op.name().to_string(),
        nodes,
        edges,
        seed: seed.clone(),
        step_weights,
        terminated,
        term_labels: (0..op.terms().len()).map(|i| op.term_name(i)).collect(),
    })
}

/// Sites where two lattices differ.
fn lattice_diff(a: &BasisVector, b: &BasisVector) -> BTreeSet<i64> {
    let sites: BTreeSet<i64> = a
        .lattice
        .entries()
        .chain(b.lattice.entries())
        .map(|(s, _)| s)
        .collect();
    sites
        .into_iter()
        .filter(|&s| a.lattice.get(s) != b.lattice.get(s))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArmDifference {
    pub step: usize,
    /// Sites whose qudits differ between some pair of same-step arm nodes.
    pub sites: Vec<i64>,
    /// Head levels present in each arm at this step.
    pub head_levels: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopReport {
    pub branch_node: usize,
    pub merge_node: usize,
    pub open_step: usize,
    pub close_step: usize,
    /// Head position of the branch node.
    pub open_site: i64,
    /// Head position of the merge node's parents, if they agree.
    pub close_site: Option<i64>,
    /// Steps strictly inside the loop along each arm.
    pub arm_lengths: Vec<usize>,
    /// Computation-basis nodes on each arm.
    pub arm_node_counts: Vec<usize>,
    /// Number of enclosing loops.
    pub depth: usize,
    pub arm_differences: Vec<ArmDifference>,
    /// Amplitude of the merge node.
    pub merge_amplitude: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafActivity {
    pub leaf: usize,
    /// Steps along the leaf's history where the watched term becomes active
    /// again after being inactive.
    pub reactivation_steps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub nodes: usize,
    pub edges: usize,
    pub branch_nodes: usize,
    pub merge_nodes: usize,
    pub leaves: usize,
    pub max_depth: usize,
    /// Steps holding at least one branch node.
    pub stage_positions: Vec<usize>,
    pub is_tree: bool,
    /// Ordered by open step, then by branch node.
    pub loops: Vec<LoopReport>,
    pub component_counts: Vec<usize>,
    /// Reactivation of the first term along each leaf history (trees only).
    pub term_reactivation: Vec<LeafActivity>,
}

impl StructureReport {
    pub fn branch_stages(&self) -> usize {
        self.stage_positions.len()
    }

    pub fn top_level_loops(&self) -> impl Iterator<Item = &LoopReport> {
        self.loops.iter().filter(|l| l.depth == 0)
    }
}

fn ancestors(parents: &[Vec<usize>], start: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            stack.extend(parents[n].iter().copied());
        }
    }
    seen
}

/// Degrees, tree test, branch/merge pairing into loops.
pub fn classify_structure(g: &ComputationGraph) -> StructureReport {
    let out = g.out_degree();
    let inn = g.in_degree();
    let parents = g.parents();
    let children = g.children();
    let n = g.nodes.len();

    let branch: Vec<usize> = (0..n).filter(|&i| out[i] >= 2).collect();
    let merge: Vec<usize> = (0..n).filter(|&i| inn[i] >= 2).collect();
    let leaves: Vec<usize> = (0..n).filter(|&i| out[i] == 0).collect();
    let stage_positions: Vec<usize> = branch
        .iter()
        .map(|&i| g.nodes[i].step)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let roots = (0..n).filter(|&i| inn[i] == 0).count();
    let is_tree = merge.is_empty() && roots <= 1;

    let mut loops = Vec::new();
    let mut interiors: Vec<BTreeSet<usize>> = Vec::new();
    for &m in &merge {
        let ps = &parents[m];
        let anc: Vec<BTreeSet<usize>> = ps.iter().map(|&p| ancestors(&parents, p)).collect();
        let mut common = anc[0].clone();
        for a in &anc[1..] {
            common = common.intersection(a).copied().collect();
        }
        // nearest common ancestor: the latest one
        let Some(&b) = common.iter().max_by_key(|&&i| (g.nodes[i].step, i)) else {
            continue;
        };
        let below_b = {
            let mut seen = BTreeSet::new();
            let mut stack = vec![b];
            while let Some(x) = stack.pop() {
                if seen.insert(x) && g.nodes[x].step < g.nodes[m].step {
                    stack.extend(children[x].iter().copied());
                }
            }
            seen
        };
        let arms: Vec<BTreeSet<usize>> = anc
            .iter()
            .map(|a| {
                a.intersection(&below_b)
                    .copied()
                    .filter(|&x| x != b)
                    .collect()
            })
            .collect();
        let open_step = g.nodes[b].step;
        let close_step = g.nodes[m].step;
        let arm_lengths = arms
            .iter()
            .map(|a| {
                a.iter()
                    .map(|&x| g.nodes[x].step)
                    .collect::<BTreeSet<_>>()
                    .len()
            })
            .collect();
        let parent_sites: BTreeSet<i64> = ps.iter().map(|&p| g.nodes[p].basis.head_pos).collect();
        let close_site = (parent_sites.len() == 1).then(|| *parent_sites.iter().next().unwrap());

        let mut arm_differences = Vec::new();
        if arms.len() >= 2 {
            for step in open_step + 1..close_step {
                let per_arm: Vec<Vec<usize>> = arms
                    .iter()
                    .map(|a| {
                        a.iter()
                            .copied()
                            .filter(|&x| g.nodes[x].step == step)
                            .collect()
                    })
                    .collect();
                if per_arm.iter().any(|v| v.is_empty()) {
                    continue;
                }
                let mut sites = BTreeSet::new();
                for i in 0..per_arm.len() {
                    for j in i + 1..per_arm.len() {
                        for &x in &per_arm[i] {
                            for &y in &per_arm[j] {
                                sites.extend(lattice_diff(&g.nodes[x].basis, &g.nodes[y].basis));
                            }
                        }
                    }
                }
                let head_levels = per_arm
                    .iter()
                    .map(|v| {
                        v.iter()
                            .map(|&x| g.nodes[x].basis.head_level)
                            .collect::<BTreeSet<_>>()
                            .into_iter()
                            .collect()
                    })
                    .collect();
                arm_differences.push(ArmDifference {
                    step,
                    sites: sites.into_iter().collect(),
                    head_levels,
                });
            }
        }
        interiors.push(arms.iter().flatten().copied().collect());
        let amp = g.nodes[m].amplitude;
        loops.push(LoopReport {
            branch_node: b,
            merge_node: m,
            open_step,
            close_step,
            open_site: g.nodes[b].basis.head_pos,
            close_site,
            arm_node_counts: arms.iter().map(|a| a.len()).collect(),
            arm_lengths,
            depth: 0,
            arm_differences,
            merge_amplitude: [amp.re, amp.im],
        });
    }
    let depths: Vec<usize> = loops
        .iter()
        .map(|l| {
            interiors
                .iter()
                .filter(|set| set.contains(&l.branch_node) && set.contains(&l.merge_node))
                .count()
        })
        .collect();
    for (l, d) in loops.iter_mut().zip(depths) {
        l.depth = d;
    }
    loops.sort_by_key(|l| (l.open_step, l.branch_node, l.merge_node));

    let term_reactivation = if is_tree {
        leaves
            .iter()
            .map(|&leaf| {
                let mut history = vec![leaf];
                while let Some(&p) = parents[*history.last().unwrap()].first() {
                    history.push(p);
                }
                history.reverse();
                let mut steps = Vec::new();
                let mut was_active = true;
                for &x in &history {
                    let active = g.nodes[x].active_terms.contains(&0);
                    if active && !was_active {
                        steps.push(g.nodes[x].step);
                    }
                    was_active = active;
                }
                LeafActivity {
                    leaf,
                    reactivation_steps: steps,
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    StructureReport {
        nodes: n,
        edges: g.edges.len(),
        branch_nodes: branch.len(),
        merge_nodes: merge.len(),
        leaves: leaves.len(),
        max_depth: g.steps(),
        stage_positions,
        is_tree,
        loops,
        component_counts: g.component_counts(),
        term_reactivation,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = QtmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            other => Err(QtmError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Serialize)]
struct JsonNode {
    id: usize,
    step: usize,
    head_level: usize,
    head_pos: i64,
    lattice: Vec<(i64, usize)>,
    amplitude: [f64; 2],
    active_terms: Vec<String>,
    leaf: bool,
}

#[derive(Serialize)]
struct JsonEdge {
    from: usize,
    to: usize,
    step: usize,
    amplitude: [f64; 2],
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    schema: &'static str,
    machine: &'a str,
    steps: usize,
    terminated: bool,
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
}

fn lattice_label(b: &BasisVector) -> String {
    b.lattice.to_string()
}

pub fn export_graph(g: &ComputationGraph, format: GraphFormat) -> String {
    let out = g.out_degree();
    match format {
        GraphFormat::Dot => {
            let mut s = String::new();
            let _ = writeln!(s, "digraph \"{}\" {{", g.machine);
            let _ = writeln!(s, "  rankdir=LR;");
            let _ = writeln!(s, "  node [shape=box, fontname=\"monospace\"];");
            for (i, node) in g.nodes.iter().enumerate() {
                let b = &node.basis;
                let shape = if out[i] == 0 { ", peripheries=2" } else { "" };
                let _ = writeln!(
                    s,
                    "  n{i} [label=\"m={} | l={} j={} | {}\"{shape}];",
                    node.step,
                    b.head_level,
                    b.head_pos,
                    lattice_label(b)
                );
            }
            for e in &g.edges {
                let _ = writeln!(
                    s,
                    "  n{} -> n{} [label=\"{:.6}\", weight={:.6}];",
                    e.from,
                    e.to,
                    e.amplitude.norm(),
                    e.amplitude.norm()
                );
            }
            s.push_str("}\n");
            s
        }
        GraphFormat::Json => {
            let doc = JsonGraph {
                schema: "qtm/graph/v1",
                machine: &g.machine,
                steps: g.steps(),
                terminated: g.terminated,
                nodes: g
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(i, node)| JsonNode {
                        id: i,
                        step: node.step,
                        head_level: node.basis.head_level,
                        head_pos: node.basis.head_pos,
                        lattice: node.basis.lattice.entries().collect(),
                        amplitude: [node.amplitude.re, node.amplitude.im],
                        active_terms: node
                            .active_terms
                            .iter()
                            .map(|&t| g.term_label(t).to_string())
                            .collect(),
                        leaf: out[i] == 0,
                    })
                    .collect(),
                edges: g
                    .edges
                    .iter()
                    .map(|e| JsonEdge {
                        from: e.from,
                        to: e.to,
                        step: e.step,
                        amplitude: [e.amplitude.re, e.amplitude.im],
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::free_motion;
    use crate::state::QuditLattice;

    fn chain(steps: usize) -> ComputationGraph {
        let op = free_motion().unwrap();
        let seed = WaveState::basis(
            op.dims(),
            BasisVector::new(0, 0, QuditLattice::new(2).unwrap()),
        )
        .unwrap();
        build_graph(&op, &seed, steps, NODE_EPS).unwrap()
    }

    #[test]
    fn free_motion_is_a_chain() {
        let g = chain(5);
        assert_eq!(g.nodes.len(), 6);
        assert_eq!(g.edges.len(), 5);
        let r = classify_structure(&g);
        assert!(r.is_tree);
        assert_eq!((r.branch_nodes, r.merge_nodes, r.leaves), (0, 0, 1));
        assert!(r.loops.is_empty());
    }

    #[test]
    fn dot_for_three_nodes() {
        let dot = export_graph(&chain(2), GraphFormat::Dot);
        assert_eq!(dot.matches(" [label=\"m=").count(), 3);
        assert_eq!(dot.matches(" -> ").count(), 2);
    }

    #[test]
    fn export_is_repeatable() {
        let g = chain(4);
        for f in [GraphFormat::Dot, GraphFormat::Json] {
            assert_eq!(export_graph(&g, f), export_graph(&chain(4), f));
        }
    }

    #[test]
    fn unknown_format() {
        assert!(matches!(
            "svg".parse::<GraphFormat>(),
            Err(QtmError::UnsupportedFormat(_))
        ));
    }
}
