//! Computation-basis states and their sparse superpositions.
//!
//! A basis vector `|l, j, s⟩` records the head level `l`, the head position
//! `j` and a qudit configuration `s` that differs from level 0 on finitely
//! many sites. Site indices are `i64`; nothing here guards against overflow
//! at the extremes of that range.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QtmError, Result};

/// Amplitudes with modulus at or below this are dropped from a [`WaveState`].
pub const PRUNE_EPS: f64 = 1e-12;

/// Largest supported qudit dimension (levels are stored as `u8`).
pub const MAX_QUDIT_DIM: usize = 256;

/// Head and qudit dimensions `(L, d)` of a machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub head: usize,
    pub qudit: usize,
}

impl Dims {
    pub fn new(head: usize, qudit: usize) -> Result<Self> {
        if head == 0 {
            return Err(QtmError::InvalidArgument(
                "head dimension must be >= 1".into(),
            ));
        }
        if !(2..=MAX_QUDIT_DIM).contains(&qudit) {
            return Err(QtmError::InvalidArgument(format!(
                "qudit dimension must be in 2..={MAX_QUDIT_DIM}, got {qudit}"
            )));
        }
        Ok(Dims { head, qudit })
    }

    pub(crate) fn ensure_same(self, other: Dims) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(QtmError::DimensionMismatch {
                expected: self,
                found: other,
            })
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L={}, d={}", self.head, self.qudit)
    }
}

/// Qudit configuration obeying the 0-tail condition.
///
/// Entries are kept sorted by site and never store level 0, so structural
/// equality coincides with equality of configurations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuditLattice {
    dim: usize,
    entries: Vec<(i64, u8)>,
}

impl QuditLattice {
    /// All-zero lattice of qudit dimension `dim`.
    pub fn new(dim: usize) -> Result<Self> {
        if !(2..=MAX_QUDIT_DIM).contains(&dim) {
            return Err(QtmError::InvalidArgument(format!(
                "qudit dimension must be in 2..={MAX_QUDIT_DIM}, got {dim}"
            )));
        }
        Ok(QuditLattice {
            dim,
            entries: Vec::new(),
        })
    }

    /// Builds a lattice from `(site, level)` pairs. Level-0 entries are
    /// dropped; a repeated site keeps its last level.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, usize)>,
    {
        let mut lattice = QuditLattice::new(dim)?;
        for (site, level) in entries {
            lattice.set(site, level)?;
        }
        Ok(lattice)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, site: i64) -> usize {
        match self.entries.binary_search_by_key(&site, |&(s, _)| s) {
            Ok(idx) => self.entries[idx].1 as usize,
            Err(_) => 0,
        }
    }

    pub fn set(&mut self, site: i64, level: usize) -> Result<()> {
        if level >= self.dim {
            return Err(QtmError::LevelOutOfRange {
                level,
                dim: self.dim,
            });
        }
        self.put(site, level as u8);
        Ok(())
    }

    /// Unchecked store; callers guarantee `level < dim`.
    pub(crate) fn put(&mut self, site: i64, level: u8) {
        match self.entries.binary_search_by_key(&site, |&(s, _)| s) {
            Ok(idx) if level == 0 => {
                self.entries.remove(idx);
            }
            Ok(idx) => self.entries[idx].1 = level,
            Err(_) if level == 0 => {}
            Err(idx) => self.entries.insert(idx, (site, level)),
        }
    }

    pub(crate) fn with(&self, site: i64, level: u8) -> Self {
        let mut out = self.clone();
        out.put(site, level);
        out
    }

    /// Nonzero entries in increasing site order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        self.entries.iter().map(|&(s, l)| (s, l as usize))
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    /// Smallest and largest nonzero site, if any.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((self.entries.first()?.0, self.entries.last()?.0))
    }

    pub fn translated(&self, shift: i64) -> Self {
        QuditLattice {
            dim: self.dim,
            entries: self.entries.iter().map(|&(s, l)| (s + shift, l)).collect(),
        }
    }
}

impl fmt::Display for QuditLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (site, level)) in self.entries().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{site}:{level}")?;
        }
        f.write_str("}")
    }
}

/// One computation-basis element `|l, j, s⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisVector {
    pub head_level: usize,
    pub head_pos: i64,
    pub lattice: QuditLattice,
}

impl BasisVector {
    pub fn new(head_level: usize, head_pos: i64, lattice: QuditLattice) -> Self {
        BasisVector {
            head_level,
            head_pos,
            lattice,
        }
    }

    /// Level of the qudit under the head.
    pub fn scanned(&self) -> usize {
        self.lattice.get(self.head_pos)
    }

    pub fn translated(&self, shift: i64) -> Self {
        BasisVector {
            head_level: self.head_level,
            head_pos: self.head_pos + shift,
            lattice: self.lattice.translated(shift),
        }
    }

    pub(crate) fn check(&self, dims: Dims) -> Result<()> {
        if self.head_level >= dims.head {
            return Err(QtmError::LevelOutOfRange {
                level: self.head_level,
                dim: dims.head,
            });
        }
        if self.lattice.dim() != dims.qudit {
            return Err(QtmError::DimensionMismatch {
                expected: dims,
                found: Dims {
                    head: dims.head,
                    qudit: self.lattice.dim(),
                },
            });
        }
        Ok(())
    }
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|{}, {}, {}>",
            self.head_level, self.head_pos, self.lattice
        )
    }
}

/// Sparse superposition of computation-basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    dims: Dims,
    terms: BTreeMap<BasisVector, Complex64>,
    prune_eps: f64,
}

impl WaveState {
    pub fn zero(dims: Dims) -> Self {
        WaveState {
            dims,
            terms: BTreeMap::new(),
            prune_eps: PRUNE_EPS,
        }
    }

    /// The unit vector on a single basis element.
    pub fn basis(dims: Dims, basis: BasisVector) -> Result<Self> {
        Self::from_components(dims, [(basis, Complex64::new(1.0, 0.0))])
    }

    /// Sums the given components (repeats add up) and prunes.
    pub fn from_components<I>(dims: Dims, components: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisVector, Complex64)>,
    {
        let mut terms = BTreeMap::new();
        for (b, amp) in components {
            b.check(dims)?;
            *terms.entry(b).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self::from_map(dims, terms, PRUNE_EPS))
    }

    pub(crate) fn from_map(
        dims: Dims,
        mut terms: BTreeMap<BasisVector, Complex64>,
        prune_eps: f64,
    ) -> Self {
        terms.retain(|_, amp| amp.norm() > prune_eps);
        WaveState {
            dims,
            terms,
            prune_eps,
        }
    }

    pub fn with_prune_eps(self, prune_eps: f64) -> Self {
        Self::from_map(self.dims, self.terms, prune_eps.max(0.0))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn prune_eps(&self) -> f64 {
        self.prune_eps
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Components in canonical basis order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn basis_vectors(&self) -> impl Iterator<Item = &BasisVector> {
        self.terms.keys()
    }

    pub fn amplitude(&self, basis: &BasisVector) -> Complex64 {
        self.terms.get(basis).copied().unwrap_or_default()
    }

    pub fn contains(&self, basis: &BasisVector) -> bool {
        self.terms.contains_key(basis)
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &WaveState) -> Result<Complex64> {
        self.dims.ensure_same(other.dims)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &WaveState) -> Complex64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in &small.terms {
            if let Some(c) = large.terms.get(b) {
                acc += if flip { c.conj() * a } else { a.conj() * c };
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<WaveState> {
        let n = self.norm();
        if n == 0.0 {
            return Err(QtmError::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> WaveState {
        let terms = self
            .terms
            .iter()
            .map(|(b, a)| (b.clone(), a * factor))
            .collect();
        Self::from_map(self.dims, terms, self.prune_eps)
    }

    /// Componentwise linear combination `Σ cᵢ ψᵢ`, pruned with the first
    /// part's threshold.
    pub fn superpose(parts: &[(Complex64, &WaveState)]) -> Result<WaveState> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| QtmError::InvalidArgument("superpose needs at least one part".into()))?;
        let mut terms: BTreeMap<BasisVector, Complex64> = BTreeMap::new();
        for (c, psi) in parts {
            first.dims.ensure_same(psi.dims)?;
            for (b, a) in &psi.terms {
                *terms.entry(b.clone()).or_default() += c * a;
            }
        }
        Ok(Self::from_map(first.dims, terms, first.prune_eps))
    }

    /// `self - other`.
    pub fn sub(&self, other: &WaveState) -> Result<WaveState> {
        Self::superpose(&[
            (Complex64::new(1.0, 0.0), self),
            (Complex64::new(-1.0, 0.0), other),
        ])
    }

    /// `‖self − other‖` without pruning the difference.
    pub fn distance(&self, other: &WaveState) -> Result<f64> {
        self.dims.ensure_same(other.dims)?;
        let mut acc = 0.0;
        for (b, a) in &self.terms {
            acc += (a - other.amplitude(b)).norm_sqr();
        }
        for (b, a) in &other.terms {
            if !self.terms.contains_key(b) {
                acc += a.norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// Shifts the head and every lattice site by `shift`.
    pub fn translated(&self, shift: i64) -> WaveState {
        let terms = self
            .terms
            .iter()
            .map(|(b, a)| (b.translated(shift), *a))
            .collect();
        WaveState {
            dims: self.dims,
            terms,
            prune_eps: self.prune_eps,
        }
    }

    /// Smallest interval of sites containing every head position and every
    /// nonzero qudit.
    pub fn extent(&self) -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for b in self.terms.keys() {
            lo = lo.min(b.head_pos);
            hi = hi.max(b.head_pos);
            if let Some((a, z)) = b.lattice.support() {
                lo = lo.min(a);
                hi = hi.max(z);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}
