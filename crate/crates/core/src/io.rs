//! JSON files for machines and states.
//!
//! Machine:
//! `{"name", "head_dim", "qudit_dim", "terms": [{"gamma", "delta", "head", "qubit", "label"?}]}`
//! with row-major matrices of `[re, im]` pairs; entry `[out][in]`.
//!
//! State:
//! `{"head_dim"?, "qudit_dim"?, "components": [{"head_level", "head_pos", "lattice": {"site": level}, "amplitude": [re, im]}]}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QtmError, Result};
use crate::operators::{CMatrix, StepOperator, StepTerm};
use crate::state::{BasisVector, Dims, QuditLattice, WaveState};

type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    gamma: f64,
    delta: i8,
    head: JsonMatrix,
    qubit: JsonMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    name: String,
    head_dim: usize,
    qudit_dim: usize,
    terms: Vec<TermFile>,
}

fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

fn matrix_from_json(rows: &JsonMatrix, which: &'static str, expected: usize) -> Result<CMatrix> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.len() != expected || rows.iter().any(|r| r.len() != expected) {
        return Err(QtmError::MatrixShape {
            which,
            rows: rows.len(),
            cols: if rows.iter().all(|r| r.len() == ncols) {
                ncols
            } else {
                0
            },
            expected,
        });
    }
    Ok(CMatrix::from_fn(expected, expected, |r, c| {
        let [re, im] = rows[r][c];
        Complex64::new(re, im)
    }))
}

pub fn machine_to_json(op: &StepOperator) -> String {
    let file = MachineFile {
        name: op.name().to_string(),
        head_dim: op.dims().head,
        qudit_dim: op.dims().qudit,
        terms: op
            .terms()
            .iter()
            .map(|t| TermFile {
                gamma: t.gamma(),
                delta: t.delta(),
                head: matrix_to_json(t.head()),
                qubit: matrix_to_json(t.qubit()),
                label: t.label().map(str::to_string),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("machine serializes");
    s.push('\n');
    s
}

pub fn machine_from_json(text: &str) -> Result<StepOperator> {
    let file: MachineFile = serde_json::from_str(text)?;
    let dims = Dims::new(file.head_dim, file.qudit_dim)?;
    let terms = file
        .terms
        .iter()
        .map(|t| {
            let head = matrix_from_json(&t.head, "head", dims.head)?;
            let qubit = matrix_from_json(&t.qubit, "qubit", dims.qudit)?;
            let term = StepTerm::new(t.gamma, t.delta, head, qubit)?;
            Ok(match &t.label {
                Some(l) => term.labeled(l.clone()),
                None => term,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    StepOperator::new(file.name, dims, terms)
}

pub fn load_machine(path: impl AsRef<Path>) -> Result<StepOperator> {
    machine_from_json(&fs::read_to_string(path)?)
}

pub fn save_machine(op: &StepOperator, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, machine_to_json(op))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentFile {
    head_level: usize,
    head_pos: i64,
    #[serde(default)]
    lattice: BTreeMap<i64, usize>,
    amplitude: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qudit_dim: Option<usize>,
    components: Vec<ComponentFile>,
}

/// Components in canonical order; lattice keys in increasing site order.
pub fn state_to_json(psi: &WaveState) -> String {
    let file = StateFile {
        head_dim: Some(psi.dims().head),
        qudit_dim: Some(psi.dims().qudit),
        components: psi
            .iter()
            .map(|(b, a)| ComponentFile {
                head_level: b.head_level,
                head_pos: b.head_pos,
                lattice: b.lattice.entries().collect(),
                amplitude: [a.re, a.im],
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("state serializes");
    s.push('\n');
    s
}

/// Parses a state. Dimensions come from `dims` or from the file; when both
/// are present they must agree. Level-0 lattice entries are dropped.
pub fn state_from_json(text: &str, dims: Option<Dims>) -> Result<WaveState> {
    let file: StateFile = serde_json::from_str(text)?;
    let from_file = match (file.head_dim, file.qudit_dim) {
        (Some(h), Some(q)) => Some(Dims::new(h, q)?),
        (None, None) => None,
        _ => {
            return Err(QtmError::InvalidArgument(
                "state file must give both head_dim and qudit_dim or neither".into(),
            ))
        }
    };
    let dims = match (dims, from_file) {
        (Some(d), Some(f)) => {
            d.ensure_same(f)?;
            d
        }
        (Some(d), None) | (None, Some(d)) => d,
        (None, None) => {
            return Err(QtmError::InvalidArgument(
                "state dimensions unknown: pass a machine or add head_dim/qudit_dim".into(),
            ))
        }
    };
    let components = file
        .components
        .into_iter()
        .map(|c| {
            let lattice = QuditLattice::from_entries(dims.qudit, c.lattice)?;
            Ok((
                BasisVector::new(c.head_level, c.head_pos, lattice),
                Complex64::new(c.amplitude[0], c.amplitude[1]),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    WaveState::from_components(dims, components)
}

pub fn load_state(path: impl AsRef<Path>, dims: Option<Dims>) -> Result<WaveState> {
    state_from_json(&fs::read_to_string(path)?, dims)
}

pub fn save_state(psi: &WaveState, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, state_to_json(psi))?;
    Ok(())
}
