//! Builders for the reference machines and their special states.
//!
//! Term lists are transcribed one elementary step per [`StepTerm`], labeled
//! with their conventional numbering so activity reports read naturally.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{QtmError, Result};
use crate::operators::{CMatrix, StepOperator, StepTerm};
use crate::state::{BasisVector, Dims, QuditLattice, WaveState};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `|out⟩⟨input|` in dimension `dim`.
pub fn ket_bra(dim: usize, out: usize, input: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(out, input)] = c(1.0);
    m
}

/// Projector onto level `level`.
pub fn projector(dim: usize, level: usize) -> CMatrix {
    ket_bra(dim, level, level)
}

/// Cyclic level shift `|h⟩ → |h + k mod dim⟩`.
pub fn level_shift(dim: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for h in 0..dim {
        m[((h + k) % dim, h)] = c(1.0);
    }
    m
}

/// `(σ_z + σ_x)/√2`; maps `|0⟩` to `(|0⟩ + |1⟩)/√2`.
pub fn hadamard_like() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)])
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

/// Rejects anything that is not a 2×2 unitary to within `1e-12`.
pub fn check_unitary_2x2(v: &CMatrix) -> Result<()> {
    if v.shape() != (2, 2) {
        return Err(QtmError::MatrixShape {
            which: "v",
            rows: v.nrows(),
            cols: v.ncols(),
            expected: 2,
        });
    }
    let defect = (v.adjoint() * v - CMatrix::identity(2, 2))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect < 1e-12 {
        Ok(())
    } else {
        Err(QtmError::NonUnitary(defect))
    }
}

/// `P₂ ⊕ v`: acts as `v` on levels 0, 1 and as the identity on level 2.
fn expand_to_qutrit(v: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m.view_mut((0, 0), (2, 2)).copy_from(v);
    m[(2, 2)] = c(1.0);
    m
}

/// A head unitary whose column 0 is `(|a⟩ + |b⟩)/√2`.
fn splitter(dim: usize, a: usize, b: usize) -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(dim, dim);
    m[(a, 0)] = c(h);
    m[(b, 0)] = c(h);
    m[(a, a)] = c(h);
    m[(b, a)] = c(-h);
    m[(0, b)] = c(1.0);
    for l in 1..dim {
        if l != a && l != b {
            m[(l, l)] = c(1.0);
        }
    }
    m
}

/// The reference machines.
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinId {
    Free,
    Erasure,
    Add1 { v: CMatrix },
    Interf1,
    Interf2 { v: CMatrix },
    Interf2Broken { v: CMatrix },
    Cycle { len: usize },
}

impl BuiltinId {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinId::Free => "free",
            BuiltinId::Erasure => "erasure",
            BuiltinId::Add1 { .. } => "add1",
            BuiltinId::Interf1 => "interf1",
            BuiltinId::Interf2 { .. } => "interf2",
            BuiltinId::Interf2Broken { .. } => "interf2_broken",
            BuiltinId::Cycle { .. } => "cycle",
        }
    }
}

impl fmt::Display for BuiltinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinId::Cycle { len } if *len != 3 => write!(f, "builtin:cycle:{len}"),
            other => write!(f, "builtin:{}", other.name()),
        }
    }
}

impl FromStr for BuiltinId {
    type Err = QtmError;

    /// Accepts `builtin:<name>` or a bare name; `cycle:<L>` picks the period.
    fn from_str(s: &str) -> Result<Self> {
        let name = s.strip_prefix("builtin:").unwrap_or(s);
        let (name, arg) = match name.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (name, None),
        };
        let id = match name {
            "free" => BuiltinId::Free,
            "erasure" => BuiltinId::Erasure,
            "add1" => BuiltinId::Add1 { v: hadamard_like() },
            "interf1" => BuiltinId::Interf1,
            "interf2" => BuiltinId::Interf2 { v: hadamard_like() },
            "interf2_broken" => BuiltinId::Interf2Broken { v: hadamard_like() },
            "cycle" => {
                let len = match arg {
                    Some(a) => a.parse().map_err(|_| {
                        QtmError::InvalidArgument(format!("bad cycle length `{a}`"))
                    })?,
                    None => 3,
                };
                BuiltinId::Cycle { len }
            }
            other => {
                return Err(QtmError::InvalidArgument(format!(
                    "unknown builtin `{other}`"
                )))
            }
        };
        if arg.is_some() && !matches!(id, BuiltinId::Cycle { .. }) {
            return Err(QtmError::InvalidArgument(format!(
                "builtin `{name}` takes no argument"
            )));
        }
        Ok(id)
    }
}

pub fn builtin(id: &BuiltinId) -> Result<StepOperator> {
    match id {
        BuiltinId::Free => free_motion(),
        BuiltinId::Erasure => erasure(),
        BuiltinId::Add1 { v } => add_one(v),
        BuiltinId::Interf1 => interferometer_one(),
        BuiltinId::Interf2 { v } => interferometer_two(v),
        BuiltinId::Interf2Broken { v } => interferometer_two_broken(v),
        BuiltinId::Cycle { len } => cycle(*len),
    }
}

/// Every builtin with default parameters.
pub fn all_builtins() -> Vec<StepOperator> {
    [
        BuiltinId::Free,
        BuiltinId::Erasure,
        BuiltinId::Add1 { v: hadamard_like() },
        BuiltinId::Interf1,
        BuiltinId::Interf2 { v: hadamard_like() },
        BuiltinId::Interf2Broken { v: hadamard_like() },
        BuiltinId::Cycle { len: 3 },
    ]
    .iter()
    .map(|id| builtin(id).expect("builtin parameters are valid"))
    .collect()
}

/// Free head motion `Y|l, j, s⟩ = |l, j+1, s⟩` (single head level, qubits).
pub fn free_motion() -> Result<StepOperator> {
    let dims = Dims::new(1, 2)?;
    let term = StepTerm::new(1.0, 1, CMatrix::identity(1, 1), CMatrix::identity(2, 2))?;
    StepOperator::new("free", dims, vec![term])
}

/// The erasure-looking machine `Σ_j (σ_x P_{1,j} + P_{0,j})/√2 · u P_j`.
pub fn erasure() -> Result<StepOperator> {
    let dims = Dims::new(1, 2)?;
    let id = CMatrix::identity(1, 1);
    let terms = vec![
        StepTerm::new(FRAC_1_SQRT_2, 1, id.clone(), pauli_x() * projector(2, 1))?.labeled("1"),
        StepTerm::new(FRAC_1_SQRT_2, 1, id, projector(2, 0))?.labeled("2"),
    ];
    StepOperator::new("erasure", dims, terms)
}

/// The same machine written as `Σ_j √2 P_{0,j} P_{+,j} u P_j`.
pub fn erasure_projector_form() -> Result<StepOperator> {
    let dims = Dims::new(1, 2)?;
    let plus = CMatrix::from_element(2, 2, c(0.5));
    let qubit = projector(2, 0) * plus * c(std::f64::consts::SQRT_2);
    let term = StepTerm::new(1.0, 1, CMatrix::identity(1, 1), qubit)?;
    StepOperator::new("erasure_projector_form", dims, vec![term])
}

/// Product transformation `v` on the qudits between two markers, then
/// "add 1" on the resulting register. Head levels 0..4, qudit levels 0..3
/// (level 2 marks region boundaries).
pub fn add_one(v: &CMatrix) -> Result<StepOperator> {
    check_unitary_2x2(v)?;
    let dims = Dims::new(4, 3)?;
    let vx = expand_to_qutrit(v);
    let sx = expand_to_qutrit(&pauli_x());
    let w = level_shift(4, 1);
    let q = |l| projector(4, l);
    let p = |s| projector(3, s);
    let terms = vec![
        StepTerm::new(1.0, 1, q(0), p(0))?.labeled("1"),
        StepTerm::new(1.0, 1, &w * q(0), p(2))?.labeled("2"),
        StepTerm::new(1.0, 1, q(1), &vx * p(0))?.labeled("3"),
        StepTerm::new(1.0, -1, &w * q(1), p(2))?.labeled("4"),
        StepTerm::new(1.0, -1, q(2), &sx * p(1))?.labeled("5"),
        StepTerm::new(1.0, 1, &w * q(2), &sx * p(0))?.labeled("6"),
        StepTerm::new(1.0, 1, &w * q(2), p(2))?.labeled("7"),
        StepTerm::new(1.0, 1, q(3), p(0))?.labeled("8"),
        StepTerm::new(1.0, 1, &w * q(3), p(2))?.labeled("9"),
    ];
    StepOperator::new("add1", dims, terms)
}

/// Interferometer whose arms differ only in head level.
pub fn interferometer_one() -> Result<StepOperator> {
    let dims = Dims::new(3, 2)?;
    let w = splitter(3, 1, 2);
    let q = |l| projector(3, l);
    let p = |s| projector(2, s);
    let terms = vec![
        StepTerm::new(1.0, 1, q(0), p(0))?.labeled("1"),
        StepTerm::new(1.0, 1, &w * q(0), p(1))?.labeled("2"),
        StepTerm::new(1.0, 1, q(1) + q(2), p(0))?.labeled("3"),
        StepTerm::new(1.0, 1, q(0) * w.adjoint(), p(1))?.labeled("4"),
    ];
    StepOperator::new("interf1", dims, terms)
}

/// Interferometer with different activity in its two arms.
///
/// The closing splitter maps `|0⟩` to `(|7⟩ + |8⟩)/√2`, the pair of head
/// levels the two arms actually end in.
pub fn interferometer_two(v: &CMatrix) -> Result<StepOperator> {
    interferometer_two_with_shifts(v, [-1, -1, 1, 1, 1, 1], "interf2")
}

/// [`interferometer_two`] with the head shifts of terms 4 and 6 reversed,
/// which desynchronizes the arms.
pub fn interferometer_two_broken(v: &CMatrix) -> Result<StepOperator> {
    interferometer_two_with_shifts(v, [-1, 1, 1, -1, 1, 1], "interf2_broken")
}

/// `shifts` holds the head shifts of terms 3 through 8.
fn interferometer_two_with_shifts(
    v: &CMatrix,
    shifts: [i8; 6],
    name: &str,
) -> Result<StepOperator> {
    check_unitary_2x2(v)?;
    let dims = Dims::new(9, 2)?;
    let w2 = level_shift(9, 2);
    let open = splitter(9, 1, 2);
    let close = splitter(9, 7, 8);
    let q = |l| projector(9, l);
    let p = |s| projector(2, s);
    let terms = vec![
        StepTerm::new(1.0, 1, q(0), p(0))?.labeled("1"),
        StepTerm::new(1.0, 1, &open * q(0), p(1))?.labeled("2"),
        StepTerm::new(1.0, shifts[0], &w2 * q(1), v * p(0))?.labeled("3"),
        StepTerm::new(1.0, shifts[1], &w2 * q(2), p(0))?.labeled("4"),
        StepTerm::new(1.0, shifts[2], &w2 * q(3), p(1))?.labeled("5"),
        StepTerm::new(1.0, shifts[3], &w2 * q(4), p(1))?.labeled("6"),
        StepTerm::new(1.0, shifts[4], &w2 * q(5), p(0) * v.adjoint())?.labeled("7"),
        StepTerm::new(1.0, shifts[5], &w2 * q(6), p(0))?.labeled("8"),
        StepTerm::new(1.0, 1, q(0) * close.adjoint(), p(1))?.labeled("9"),
    ];
    StepOperator::new(name, dims, terms)
}

/// Stationary head cycling through `len` levels; every path is a cycle of
/// period `len`.
pub fn cycle(len: usize) -> Result<StepOperator> {
    if len == 0 {
        return Err(QtmError::InvalidArgument(
            "cycle length must be >= 1".into(),
        ));
    }
    let dims = Dims::new(len, 2)?;
    let term = StepTerm::new(1.0, 0, level_shift(len, 1), CMatrix::identity(2, 2))?;
    StepOperator::new("cycle", dims, vec![term])
}

/// Which site carries the first `|+⟩` of an erasure path state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BtConvention {
    /// Zeros strictly left of the head; the head site holds `|+⟩`.
    #[default]
    HeadSitePlus,
    /// Zeros up to and including the head site.
    HeadSiteZero,
}

/// Path state of the erasure machine: head at `head`, zeros behind it,
/// `|+⟩` factors up to `wall − 1`, `|−⟩` at `wall`, and an arbitrary
/// computation-basis tail beyond the wall.
///
/// With a left wall `a`, site `a − 1` holds level 1, which stops backward
/// motion at `head = a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasurePathState {
    pub head: i64,
    pub wall: i64,
    pub left_wall: Option<i64>,
    pub tail: Vec<(i64, usize)>,
    pub convention: BtConvention,
}

impl ErasurePathState {
    pub fn new(head: i64, wall: i64) -> Self {
        ErasurePathState {
            head,
            wall,
            left_wall: None,
            tail: Vec::new(),
            convention: BtConvention::default(),
        }
    }

    pub fn with_left_wall(mut self, left_wall: i64) -> Self {
        self.left_wall = Some(left_wall);
        self
    }

    pub fn with_tail(mut self, tail: Vec<(i64, usize)>) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_convention(mut self, convention: BtConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn build(&self) -> Result<WaveState> {
        if self.head > self.wall {
            return Err(QtmError::InvalidArgument(format!(
                "head {} lies right of the wall {}",
                self.head, self.wall
            )));
        }
        if let Some(&(site, _)) = self.tail.iter().find(|&&(s, _)| s <= self.wall) {
            return Err(QtmError::InvalidArgument(format!(
                "tail site {site} must lie right of the wall {}",
                self.wall
            )));
        }
        let mut base = QuditLattice::from_entries(2, self.tail.iter().copied())?;
        if let Some(a) = self.left_wall {
            if a > self.head {
                return Err(QtmError::InvalidArgument(format!(
                    "left wall {a} lies right of the head {}",
                    self.head
                )));
            }
            base.set(a - 1, 1)?;
        }
        let first_plus = match self.convention {
            BtConvention::HeadSitePlus => self.head,
            BtConvention::HeadSiteZero => (self.head + 1).min(self.wall),
        };
        let mut factors: Vec<(i64, [f64; 2])> = (first_plus..self.wall)
            .map(|site| (site, [FRAC_1_SQRT_2, FRAC_1_SQRT_2]))
            .collect();
        factors.push((self.wall, [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]));
        product_state(Dims::new(1, 2)?, 0, self.head, &base, &factors)
    }
}

/// Shorthand for [`ErasurePathState`] without a left wall.
pub fn erasure_bt_state(
    head: i64,
    wall: i64,
    tail: Vec<(i64, usize)>,
    convention: BtConvention,
) -> Result<WaveState> {
    ErasurePathState::new(head, wall)
        .with_tail(tail)
        .with_convention(convention)
        .build()
}

/// Expands `head ⊗ base ⊗ (per-site qubit factors)` into the computation
/// basis. Factors are `[⟨0|φ⟩, ⟨1|φ⟩]` and override `base` at their site.
fn product_state(
    dims: Dims,
    head_level: usize,
    head_pos: i64,
    base: &QuditLattice,
    factors: &[(i64, [f64; 2])],
) -> Result<WaveState> {
    let mut parts: Vec<(QuditLattice, f64)> = vec![(base.clone(), 1.0)];
    for &(site, amps) in factors {
        let mut next = Vec::with_capacity(parts.len() * 2);
        for (lat, a) in &parts {
            for (level, f) in amps.iter().enumerate() {
                if *f != 0.0 {
                    next.push((lat.with(site, level as u8), a * f));
                }
            }
        }
        parts = next;
    }
    WaveState::from_components(
        dims,
        parts
            .into_iter()
            .map(|(lat, a)| (BasisVector::new(head_level, head_pos, lat), c(a))),
    )
}

/// Add-1 start state: level-2 markers at `markers`, head level 0 at
/// `head_pos`. Two markers give a single tree, even counts concatenated
/// trees, odd counts a trailing unbounded tree.
pub fn add1_initial_state(markers: &[i64], head_pos: i64) -> Result<WaveState> {
    let first = *markers
        .first()
        .ok_or_else(|| QtmError::InvalidArgument("at least one marker is required".into()))?;
    if markers.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QtmError::InvalidArgument(
            "markers must be strictly increasing".into(),
        ));
    }
    if head_pos > first {
        return Err(QtmError::InvalidArgument(format!(
            "head at {head_pos} lies right of the first marker {first}"
        )));
    }
    let lattice = QuditLattice::from_entries(3, markers.iter().map(|&m| (m, 2)))?;
    WaveState::basis(Dims::new(4, 3)?, BasisVector::new(0, head_pos, lattice))
}

/// Closed form of the add-1 state `3n + 4` steps after `|0, 0⟩` with
/// markers at sites 0 and `n + 1`.
pub fn add1_final_state(n: usize, v: &CMatrix) -> Result<WaveState> {
    if n == 0 {
        return Err(QtmError::InvalidArgument(
            "register length must be >= 1".into(),
        ));
    }
    check_unitary_2x2(v)?;
    let dims = Dims::new(4, 3)?;
    let n_i = n as i64;
    let v00 = v[(0, 0)];
    let v10 = v[(1, 0)];
    let markers = QuditLattice::from_entries(3, [(0, 2), (n_i + 1, 2)])?;
    let mut components = Vec::new();
    for j in 0..=n {
        let coef = if j < n {
            v00 * v10.powu(j as u32)
        } else {
            v10.powu(n as u32)
        };
        let mut base = markers.clone();
        if j < n {
            base.put(n_i - j as i64, 1);
        }
        let mut parts: Vec<(QuditLattice, Complex64)> = vec![(base, coef)];
        for site in 1..(n_i - j as i64) {
            let mut next = Vec::new();
            for (lat, a) in &parts {
                next.push((lat.clone(), a * v00));
                next.push((lat.with(site, 1), a * v10));
            }
            parts = next;
        }
        let pos = 3 * n_i + 2 - 2 * j as i64;
        components.extend(
            parts
                .into_iter()
                .map(|(lat, a)| (BasisVector::new(0, pos, lat), a)),
        );
    }
    WaveState::from_components(dims, components)
}

/// Seeds for the interferometer machines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterferometerSeed {
    /// Level-1 qubits at sites 1 and `2 + gap`, head level 0 at site 0.
    One { gap: usize },
    /// Head level 0 at site 0, level-1 qubits at sites 1 and 3.
    Two,
    /// `count` copies of the 1, 0, 1 pattern separated by single zeros.
    TwoChain { count: usize },
}

pub fn interferometer_seed(kind: InterferometerSeed) -> Result<WaveState> {
    let (dims, ones): (Dims, Vec<i64>) = match kind {
        InterferometerSeed::One { gap } => (Dims::new(3, 2)?, vec![1, 2 + gap as i64]),
        InterferometerSeed::Two => (Dims::new(9, 2)?, vec![1, 3]),
        InterferometerSeed::TwoChain { count } => (
            Dims::new(9, 2)?,
            (0..count as i64)
                .flat_map(|k| [1 + 4 * k, 3 + 4 * k])
                .collect(),
        ),
    };
    let lattice = QuditLattice::from_entries(2, ones.into_iter().map(|s| (s, 1)))?;
    WaveState::basis(dims, BasisVector::new(0, 0, lattice))
}

/// `|0, 0⟩ ⊗ |1⟩_site ⊗ |0⟩_else` for the nine-level interferometer machines.
pub fn single_one_seed(site: i64) -> Result<WaveState> {
    let lattice = QuditLattice::from_entries(2, [(site, 1)])?;
    WaveState::basis(Dims::new(9, 2)?, BasisVector::new(0, 0, lattice))
}
