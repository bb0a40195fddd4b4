//! Step operators built from elementary terms.
//!
//! A term `(γ, Δ, W, V)` acts on a basis vector `|l, j, s⟩` whose scanned
//! qudit is `s = s(j)` as
//!
//! ```text
//! γ Σ_{l', s'} W[l'][l] V[s'][s] |l', j + Δ, s with site j set to s'⟩
//! ```
//!
//! The qudit matrix always acts on the site the head occupied *before* the
//! shift. The adjoint therefore acts on the site `j' − Δ` of its input.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QtmError, Result};
use crate::state::{BasisVector, Dims, QuditLattice, WaveState};

/// Threshold below which a matrix element counts as zero in structural
/// decisions.
pub const EPS_ZERO: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

/// One elementary step `γ · W ⊗ V ⊗ u^Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTerm {
    gamma: f64,
    delta: i8,
    head: CMatrix,
    qubit: CMatrix,
    label: Option<String>,
}

impl StepTerm {
    pub fn new(gamma: f64, delta: i8, head: CMatrix, qubit: CMatrix) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(QtmError::InvalidTerm(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        if !(-1..=1).contains(&delta) {
            return Err(QtmError::InvalidTerm(format!(
                "delta must be -1, 0 or +1, got {delta}"
            )));
        }
        Ok(StepTerm {
            gamma,
            delta,
            head,
            qubit,
            label: None,
        })
    }

    /// Attaches a display label (e.g. the term's number in a published table).
    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> i8 {
        self.delta
    }

    /// Head matrix, entry `[(l', l)]` maps input level `l` to `l'`.
    pub fn head(&self) -> &CMatrix {
        &self.head
    }

    /// Qudit matrix, entry `[(s', s)]` maps scanned level `s` to `s'`.
    pub fn qubit(&self) -> &CMatrix {
        &self.qubit
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// Nonzero matrix entries grouped for sparse application.
#[derive(Clone, Debug)]
struct CompiledTerm {
    gamma: f64,
    delta: i64,
    head_cols: Vec<Vec<(usize, Complex64)>>,
    qubit_cols: Vec<Vec<(u8, Complex64)>>,
    head_rows: Vec<Vec<(usize, Complex64)>>,
    qubit_rows: Vec<Vec<(u8, Complex64)>>,
}

impl CompiledTerm {
    fn new(term: &StepTerm) -> Self {
        let cols = |m: &CMatrix| -> Vec<Vec<(usize, Complex64)>> {
            (0..m.ncols())
                .map(|c| {
                    (0..m.nrows())
                        .filter(|&r| m[(r, c)] != Complex64::default())
                        .map(|r| (r, m[(r, c)]))
                        .collect()
                })
                .collect()
        };
        let rows = |m: &CMatrix| -> Vec<Vec<(usize, Complex64)>> {
            (0..m.nrows())
                .map(|r| {
                    (0..m.ncols())
                        .filter(|&c| m[(r, c)] != Complex64::default())
                        .map(|c| (c, m[(r, c)].conj()))
                        .collect()
                })
                .collect()
        };
        let narrow = |v: Vec<Vec<(usize, Complex64)>>| -> Vec<Vec<(u8, Complex64)>> {
            v.into_iter()
                .map(|col| col.into_iter().map(|(i, a)| (i as u8, a)).collect())
                .collect()
        };
        CompiledTerm {
            gamma: term.gamma,
            delta: term.delta as i64,
            head_cols: cols(&term.head),
            qubit_cols: narrow(cols(&term.qubit)),
            head_rows: rows(&term.head),
            qubit_rows: narrow(rows(&term.qubit)),
        }
    }
}

/// A machine: a finite sum of [`StepTerm`]s over head dimension `L` and
/// qudit dimension `d`.
///
/// Terms carry no site dependence, so spatial homogeneity and one-site
/// locality hold by construction.
#[derive(Clone, Debug)]
pub struct StepOperator {
    name: String,
    dims: Dims,
    terms: Vec<StepTerm>,
    compiled: Vec<CompiledTerm>,
}

impl PartialEq for StepOperator {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.dims == other.dims && self.terms == other.terms
    }
}

impl StepOperator {
    pub fn new(name: impl Into<String>, dims: Dims, terms: Vec<StepTerm>) -> Result<Self> {
        for term in &terms {
            let (r, c) = term.head.shape();
            if r != dims.head || c != dims.head {
                return Err(QtmError::MatrixShape {
                    which: "head",
                    rows: r,
                    cols: c,
                    expected: dims.head,
                });
            }
            let (r, c) = term.qubit.shape();
            if r != dims.qudit || c != dims.qudit {
                return Err(QtmError::MatrixShape {
                    which: "qubit",
                    rows: r,
                    cols: c,
                    expected: dims.qudit,
                });
            }
        }
        let compiled = terms.iter().map(CompiledTerm::new).collect();
        Ok(StepOperator {
            name: name.into(),
            dims,
            terms,
            compiled,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn terms(&self) -> &[StepTerm] {
        &self.terms
    }

    /// Display name of term `index`: its label, or its 1-based position.
    pub fn term_name(&self, index: usize) -> String {
        match self.terms.get(index).and_then(|t| t.label()) {
            Some(label) => label.to_string(),
            None => (index + 1).to_string(),
        }
    }

    /// `T ψ`.
    pub fn apply(&self, psi: &WaveState) -> Result<WaveState> {
        self.dims.ensure_same(psi.dims())?;
        let mut out = BTreeMap::new();
        for (b, amp) in psi.iter() {
            self.accumulate_forward(b, *amp, &mut out);
        }
        Ok(WaveState::from_map(self.dims, out, psi.prune_eps()))
    }

    /// `T† φ`.
    pub fn apply_adjoint(&self, phi: &WaveState) -> Result<WaveState> {
        self.dims.ensure_same(phi.dims())?;
        let mut out = BTreeMap::new();
        for (b, amp) in phi.iter() {
            self.accumulate_adjoint(b, *amp, &mut out);
        }
        Ok(WaveState::from_map(self.dims, out, phi.prune_eps()))
    }

    /// `Tⁿ ψ`, or `(T†)ⁿ ψ` when `adjoint` is set.
    pub fn apply_power(&self, psi: &WaveState, n: usize, adjoint: bool) -> Result<WaveState> {
        let mut cur = psi.clone();
        for _ in 0..n {
            cur = if adjoint {
                self.apply_adjoint(&cur)?
            } else {
                self.apply(&cur)?
            };
        }
        Ok(cur)
    }

    fn accumulate_forward(
        &self,
        b: &BasisVector,
        amp: Complex64,
        out: &mut BTreeMap<BasisVector, Complex64>,
    ) {
        let j = b.head_pos;
        let s = b.scanned();
        for term in &self.compiled {
            let heads = &term.head_cols[b.head_level];
            let qudits = &term.qubit_cols[s];
            if heads.is_empty() || qudits.is_empty() {
                continue;
            }
            for &(s_out, qv) in qudits {
                let lattice = b.lattice.with(j, s_out);
                for &(l_out, hv) in heads {
                    let key = BasisVector::new(l_out, j + term.delta, lattice.clone());
                    *out.entry(key).or_default() += amp * term.gamma * hv * qv;
                }
            }
        }
    }

    fn accumulate_adjoint(
        &self,
        b: &BasisVector,
        amp: Complex64,
        out: &mut BTreeMap<BasisVector, Complex64>,
    ) {
        for term in &self.compiled {
            let heads = &term.head_rows[b.head_level];
            if heads.is_empty() {
                continue;
            }
            let j = b.head_pos - term.delta;
            let qudits = &term.qubit_rows[b.lattice.get(j)];
            for &(s_in, qv) in qudits {
                let lattice = b.lattice.with(j, s_in);
                for &(l_in, hv) in heads {
                    let key = BasisVector::new(l_in, j, lattice.clone());
                    *out.entry(key).or_default() += amp * term.gamma * hv * qv;
                }
            }
        }
    }

    /// `K (2ψ − Tψ − T†ψ)`.
    pub fn hamiltonian_apply(&self, k: f64, psi: &WaveState) -> Result<WaveState> {
        if k.is_nan() || k <= 0.0 {
            return Err(QtmError::InvalidArgument(format!(
                "K must be positive, got {k}"
            )));
        }
        let t = self.apply(psi)?;
        let td = self.apply_adjoint(psi)?;
        let kc = Complex64::new(k, 0.0);
        WaveState::superpose(&[(2.0 * kc, psi), (-kc, &t), (-kc, &td)])
    }

    /// The single-site transition table at `j = 0`.
    pub fn reduced_matrix(&self) -> ReducedMatrix {
        let mut m = ReducedMatrix::zeros(self.dims);
        for term in &self.terms {
            for l in 0..self.dims.head {
                for s in 0..self.dims.qudit {
                    for lp in 0..self.dims.head {
                        let h = term.head[(lp, l)];
                        if h == Complex64::default() {
                            continue;
                        }
                        for sp in 0..self.dims.qudit {
                            let q = term.qubit[(sp, s)];
                            if q == Complex64::default() {
                                continue;
                            }
                            let out = OutIndex {
                                head: lp,
                                delta: term.delta,
                                qudit: sp,
                            };
                            let idx = m.offset(out, InIndex { head: l, qudit: s });
                            m.data[idx] += term.gamma * h * q;
                        }
                    }
                }
            }
        }
        m
    }

    /// Decides whether the computation basis itself is a distinct path
    /// generating basis: every row and column of `T` in that basis has at
    /// most one nonzero entry.
    pub fn check_dpg_computation_basis(&self) -> BcDpgDecision {
        let m = self.reduced_matrix();
        let dims = self.dims;
        let nz = |out: OutIndex, input: InIndex| {
            let v = m.get(out, input);
            (v.norm() > EPS_ZERO).then_some(v)
        };

        for l in 0..dims.head {
            for s in 0..dims.qudit {
                let input = InIndex { head: l, qudit: s };
                let entries: Vec<_> = m
                    .out_indices()
                    .filter_map(|out| {
                        nz(out, input).map(|v| MatrixEntry {
                            output: out,
                            input,
                            value: [v.re, v.im],
                        })
                    })
                    .collect();
                if entries.len() > 1 {
                    return BcDpgDecision::rejected(BcDpgWitness::Column { entries });
                }
            }
        }

        // A computation-basis row is fixed by the output head level and the
        // qudits at the three sites a predecessor could have scanned.
        for lp in 0..dims.head {
            for delta in -1i8..=1 {
                for sp in 0..dims.qudit {
                    let out = OutIndex {
                        head: lp,
                        delta,
                        qudit: sp,
                    };
                    let entries = m.row_entries(out);
                    if entries.len() > 1 {
                        return BcDpgDecision::rejected(BcDpgWitness::Row { entries });
                    }
                }
            }
            for left in 0..dims.qudit {
                for here in 0..dims.qudit {
                    for right in 0..dims.qudit {
                        // delta = +1 scanned site j'-1, delta = 0 site j', delta = -1 site j'+1
                        let entries: Vec<MatrixEntry> = [(1i8, left), (0, here), (-1, right)]
                            .into_iter()
                            .flat_map(|(delta, sp)| {
                                m.row_entries(OutIndex {
                                    head: lp,
                                    delta,
                                    qudit: sp,
                                })
                            })
                            .collect();
                        if entries.len() > 1 {
                            return BcDpgDecision::rejected(BcDpgWitness::Row { entries });
                        }
                    }
                }
            }
        }
        BcDpgDecision {
            distinct: true,
            witness: None,
        }
    }

    /// Probes random basis vectors for one-site locality, bounded head
    /// motion and translation invariance of [`StepOperator::apply`].
    pub fn check_homogeneity_locality(&self, samples: usize, seed: u64) -> LocalityReport {
        self.check_homogeneity_locality_with(samples, seed, |t, psi| t.apply(psi))
    }

    /// Same probe against an arbitrary application routine.
    pub fn check_homogeneity_locality_with<F>(
        &self,
        samples: usize,
        seed: u64,
        apply: F,
    ) -> LocalityReport
    where
        F: Fn(&StepOperator, &WaveState) -> Result<WaveState>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples.max(1) {
            let b = random_basis_vector(&mut rng, self.dims, 8, 3);
            let shift = loop {
                let k = rng.gen_range(-40i64..=40);
                if k != 0 {
                    break k;
                }
            };
            let input = WaveState::basis(self.dims, b.clone()).expect("sampled within dims");
            let image = match apply(self, &input) {
                Ok(s) => s,
                Err(e) => {
                    return LocalityReport::failed(
                        samples,
                        &b,
                        LocalityFault::ApplyError(e.to_string()),
                    )
                }
            };
            for (out, _) in image.iter() {
                if (out.head_pos - b.head_pos).abs() > 1 {
                    return LocalityReport::failed(
                        samples,
                        &b,
                        LocalityFault::HeadJump {
                            from: b.head_pos,
                            to: out.head_pos,
                        },
                    );
                }
                if let Some(site) = differing_site(&b.lattice, &out.lattice, b.head_pos) {
                    return LocalityReport::failed(
                        samples,
                        &b,
                        LocalityFault::OffHeadChange { site },
                    );
                }
            }
            let moved =
                WaveState::basis(self.dims, b.translated(shift)).expect("sampled within dims");
            let moved_image = match apply(self, &moved) {
                Ok(s) => s,
                Err(e) => {
                    return LocalityReport::failed(
                        samples,
                        &b,
                        LocalityFault::ApplyError(e.to_string()),
                    )
                }
            };
            let defect = moved_image
                .distance(&image.translated(shift))
                .unwrap_or(f64::INFINITY);
            if defect > 1e-14 {
                return LocalityReport::failed(
                    samples,
                    &b,
                    LocalityFault::NotHomogeneous { shift, defect },
                );
            }
        }
        LocalityReport {
            samples,
            passed: true,
            violation: None,
        }
    }

    /// Indices of terms giving a nonzero contribution on `b`.
    pub fn active_terms(&self, b: &BasisVector) -> Vec<usize> {
        let s = b.scanned();
        self.compiled
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                let h = t.head_cols[b.head_level]
                    .iter()
                    .map(|(_, v)| v.norm())
                    .fold(0.0, f64::max);
                let q = t.qubit_cols[s]
                    .iter()
                    .map(|(_, v)| v.norm())
                    .fold(0.0, f64::max);
                t.gamma * h * q > EPS_ZERO
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Which terms act on each component of `psi`.
    pub fn term_activity(&self, psi: &WaveState) -> Result<ActivityReport> {
        self.dims.ensure_same(psi.dims())?;
        let components: Vec<ComponentActivity> = psi
            .basis_vectors()
            .map(|b| ComponentActivity {
                basis: b.to_string(),
                active_terms: self.active_terms(b),
            })
            .collect();
        let max_active = components
            .iter()
            .map(|c| c.active_terms.len())
            .max()
            .unwrap_or(0);
        Ok(ActivityReport {
            components,
            max_active,
        })
    }
}

fn differing_site(a: &QuditLattice, b: &QuditLattice, allowed: i64) -> Option<i64> {
    let sites = a.entries().chain(b.entries()).map(|(s, _)| s);
    let mut bad: Vec<i64> = sites
        .filter(|&s| s != allowed && a.get(s) != b.get(s))
        .collect();
    bad.sort_unstable();
    bad.first().copied()
}

/// Uniform sample: head level, head position in `[-half, half]`, and up to
/// `max_sites` nonzero qudits in the same window.
pub fn random_basis_vector<R: Rng>(
    rng: &mut R,
    dims: Dims,
    half: i64,
    max_sites: usize,
) -> BasisVector {
    let mut lattice = QuditLattice::new(dims.qudit).expect("valid qudit dimension");
    let count = rng.gen_range(0..=max_sites);
    for _ in 0..count {
        let site = rng.gen_range(-half..=half);
        let level = rng.gen_range(1..dims.qudit);
        lattice.put(site, level as u8);
    }
    BasisVector::new(
        rng.gen_range(0..dims.head),
        rng.gen_range(-half..=half),
        lattice,
    )
}

/// Row label `(l', Δ, s')` of the single-site transition table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutIndex {
    pub head: usize,
    pub delta: i8,
    pub qudit: usize,
}

/// Column label `(l, s)` of the single-site transition table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct InIndex {
    pub head: usize,
    pub qudit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MatrixEntry {
    pub output: OutIndex,
    pub input: InIndex,
    pub value: [f64; 2],
}

/// Transition table indexed `(l', Δ, s') × (l, s)`, of size `(3·L·d) × (L·d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedMatrix {
    dims: Dims,
    data: Vec<Complex64>,
}

impl ReducedMatrix {
    fn zeros(dims: Dims) -> Self {
        let rows = dims.head * 3 * dims.qudit;
        let cols = dims.head * dims.qudit;
        ReducedMatrix {
            dims,
            data: vec![Complex64::default(); rows * cols],
        }
    }

    fn offset(&self, out: OutIndex, input: InIndex) -> usize {
        let d = self.dims.qudit;
        let row = (out.head * 3 + (out.delta + 1) as usize) * d + out.qudit;
        let col = input.head * d + input.qudit;
        row * self.cols() + col
    }

    pub fn rows(&self) -> usize {
        self.dims.head * 3 * self.dims.qudit
    }

    pub fn cols(&self) -> usize {
        self.dims.head * self.dims.qudit
    }

    pub fn get(&self, out: OutIndex, input: InIndex) -> Complex64 {
        self.data[self.offset(out, input)]
    }

    pub fn out_indices(&self) -> impl Iterator<Item = OutIndex> + '_ {
        let dims = self.dims;
        (0..dims.head).flat_map(move |head| {
            (-1i8..=1).flat_map(move |delta| {
                (0..dims.qudit).map(move |qudit| OutIndex { head, delta, qudit })
            })
        })
    }

    pub fn in_indices(&self) -> impl Iterator<Item = InIndex> + '_ {
        let dims = self.dims;
        (0..dims.head)
            .flat_map(move |head| (0..dims.qudit).map(move |qudit| InIndex { head, qudit }))
    }

    fn row_entries(&self, out: OutIndex) -> Vec<MatrixEntry> {
        self.in_indices()
            .filter_map(|input| {
                let v = self.get(out, input);
                (v.norm() > EPS_ZERO).then_some(MatrixEntry {
                    output: out,
                    input,
                    value: [v.re, v.im],
                })
            })
            .collect()
    }

    /// Entries with modulus above `eps`, in row-major order.
    pub fn nonzeros(&self, eps: f64) -> Vec<MatrixEntry> {
        self.out_indices()
            .flat_map(|out| {
                self.in_indices().filter_map(move |input| {
                    let v = self.get(out, input);
                    (v.norm() > eps).then_some(MatrixEntry {
                        output: out,
                        input,
                        value: [v.re, v.im],
                    })
                })
            })
            .collect()
    }

    /// Largest entrywise modulus difference.
    pub fn max_difference(&self, other: &ReducedMatrix) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Outcome of [`StepOperator::check_dpg_computation_basis`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BcDpgDecision {
    pub distinct: bool,
    pub witness: Option<BcDpgWitness>,
}

impl BcDpgDecision {
    fn rejected(witness: BcDpgWitness) -> Self {
        BcDpgDecision {
            distinct: false,
            witness: Some(witness),
        }
    }
}

/// The offending column or row, with its nonzero entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcDpgWitness {
    Column { entries: Vec<MatrixEntry> },
    Row { entries: Vec<MatrixEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityReport {
    pub samples: usize,
    pub passed: bool,
    pub violation: Option<LocalityViolation>,
}

impl LocalityReport {
    fn failed(samples: usize, input: &BasisVector, fault: LocalityFault) -> Self {
        LocalityReport {
            samples,
            passed: false,
            violation: Some(LocalityViolation {
                input: input.to_string(),
                fault,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityViolation {
    pub input: String,
    pub fault: LocalityFault,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalityFault {
    OffHeadChange { site: i64 },
    HeadJump { from: i64, to: i64 },
    NotHomogeneous { shift: i64, defect: f64 },
    ApplyError(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentActivity {
    pub basis: String,
    pub active_terms: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActivityReport {
    pub components: Vec<ComponentActivity>,
    pub max_active: usize,
}
