//! Spectra of `H = K(2 − T − T†)` on verified paths, time evolution under
//! `e^{−iHt}` and the truncated sum over paths.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QtmError, Result};
use crate::operators::{CMatrix, StepOperator};
use crate::paths::{VerifiedPath, Window};
use crate::state::{BasisVector, WaveState};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Weights within this of 1 count as unit weights for the closed forms.
const UNIT_WEIGHT_TOL: f64 = 1e-12;
/// Closed-form and numeric energies agree within this.
const AGREEMENT_TOL: f64 = 1e-9;

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(QtmError::InvalidArgument(format!(
            "K must be positive, got {k}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// Terminal or truncated ends; no coupling past them.
    Open,
    /// Last state couples back to the first with `⟨first|T|last⟩ = weight·e^{iφ}`.
    Cyclic { weight: f64, phase: f64 },
}

/// `H` restricted to a path, in the basis of normalized path states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathHamiltonian {
    pub n: usize,
    pub k: f64,
    pub diag: Vec<f64>,
    /// `−K·d_i` between states `i` and `i+1`.
    pub offdiag: Vec<f64>,
    pub boundary: Boundary,
}

impl PathHamiltonian {
    /// Chain of `weights.len() + 1` states.
    pub fn from_weights(weights: &[f64], k: f64, boundary: Boundary) -> Result<Self> {
        check_k(k)?;
        let n = weights.len() + 1;
        Ok(PathHamiltonian {
            n,
            k,
            diag: vec![2.0 * k; n],
            offdiag: weights.iter().map(|d| -k * d).collect(),
            boundary,
        })
    }

    /// Bond weights `d_i = −offdiag_i / K`.
    pub fn weights(&self) -> Vec<f64> {
        self.offdiag.iter().map(|o| -o / self.k).collect()
    }

    pub fn matrix(&self) -> CMatrix {
        let n = self.n;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(self.diag[i], 0.0);
        }
        for (i, &o) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] += Complex64::new(o, 0.0);
            m[(i + 1, i)] += Complex64::new(o, 0.0);
        }
        if let Boundary::Cyclic { weight, phase } = self.boundary {
            // ⟨0|H|n−1⟩ = −K⟨0|T|n−1⟩
            let c = Complex64::from_polar(-self.k * weight, phase);
            m[(0, n - 1)] += c;
            m[(n - 1, 0)] += c.conj();
        }
        m
    }

    fn unit_weights(&self) -> bool {
        let bonds_unit = self
            .weights()
            .iter()
            .all(|d| (d - 1.0).abs() < UNIT_WEIGHT_TOL);
        let wrap_unit = match self.boundary {
            Boundary::Open => true,
            Boundary::Cyclic { weight, .. } => (weight - 1.0).abs() < UNIT_WEIGHT_TOL,
        };
        bonds_unit && wrap_unit
    }
}

/// Restricts `H` to a verified path.
pub fn path_hamiltonian(path: &VerifiedPath, k: f64) -> Result<PathHamiltonian> {
    let p = path.path();
    let boundary = match p.cycle {
        Some(c) if c.period == p.len() => Boundary::Cyclic {
            weight: c.weight,
            phase: c.phase,
        },
        _ => Boundary::Open,
    };
    PathHamiltonian::from_weights(&p.weights, k, boundary)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub name: String,
    pub wavenumbers: Vec<f64>,
    pub energies: Vec<f64>,
    /// Same number of levels as the numeric spectrum and each level within tolerance.
    pub agrees: bool,
    pub max_deviation: Option<f64>,
    /// `max ‖Hψ − Eψ‖/‖ψ‖` over the standing-wave profiles, when they exist.
    pub profile_residual: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`, in path-state coordinates.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub closed_forms: Vec<ClosedForm>,
}

fn hermitian_eigen(m: CMatrix) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

fn band_energy(k: f64, wavenumber: f64) -> f64 {
    2.0 * k * (1.0 - wavenumber.cos())
}

fn compare(name: &str, wavenumbers: Vec<f64>, k: f64, numeric: &[f64], note: &str) -> ClosedForm {
    let mut energies: Vec<f64> = wavenumbers.iter().map(|&q| band_energy(k, q)).collect();
    energies.sort_by(f64::total_cmp);
    let max_deviation = (energies.len() == numeric.len()).then(|| {
        energies
            .iter()
            .zip(numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let agrees = max_deviation.is_some_and(|d| d < AGREEMENT_TOL);
    let note = if agrees {
        note.to_string()
    } else if max_deviation.is_none() {
        format!(
            "{note}; gives {} levels but the path has {}",
            energies.len(),
            numeric.len()
        )
    } else {
        format!("{note}; levels differ from the numeric spectrum")
    };
    ClosedForm {
        name: name.to_string(),
        wavenumbers,
        energies,
        agrees,
        max_deviation,
        profile_residual: None,
        note,
    }
}

/// Residual of the open-chain standing waves `ψ_j = sin(q(j+1))`.
fn standing_wave_residual(h: &CMatrix, wavenumbers: &[f64], k: f64) -> f64 {
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for &q in wavenumbers {
        let psi = CMatrix::from_fn(n, 1, |j, _| Complex64::new((q * (j + 1) as f64).sin(), 0.0));
        let norm = psi.norm();
        if norm < 1e-12 {
            continue;
        }
        let r = (h * &psi - &psi * Complex64::new(band_energy(k, q), 0.0)).norm() / norm;
        worst = worst.max(r);
    }
    worst
}

/// Numeric eigenpairs (ground truth) plus closed-form candidates for
/// unit-weight paths, each marked as agreeing or not.
pub fn eigensystem(h: &PathHamiltonian) -> Spectrum {
    let m = h.matrix();
    let (eigenvalues, eigenvectors) = hermitian_eigen(m.clone());
    let mut closed_forms = Vec::new();
    if h.unit_weights() {
        let n = h.n;
        let nf = n as f64;
        match h.boundary {
            Boundary::Open => {
                let dirichlet: Vec<f64> = (1..=n).map(|m| PI * m as f64 / (nf + 1.0)).collect();
                let mut cf = compare(
                    "dirichlet",
                    dirichlet.clone(),
                    h.k,
                    &eigenvalues,
                    "k = pi m/(N+1), m = 1..N, walls next to the end states",
                );
                cf.profile_residual = Some(standing_wave_residual(&m, &dirichlet, h.k));
                closed_forms.push(cf);
                // end states at a and b, N = b - a + 1
                let span = n as i64 - 1;
                let periodic: Vec<f64> = if span >= 1 {
                    (1..span)
                        .map(|m| 2.0 * PI * m as f64 / span as f64)
                        .collect()
                } else {
                    Vec::new()
                };
                let mut cf = compare(
                    "span_periodic",
                    periodic.clone(),
                    h.k,
                    &eigenvalues,
                    "k = 2 pi m/(b-a), m = 1..b-a-1",
                );
                cf.profile_residual = Some(standing_wave_residual(&m, &periodic, h.k));
                closed_forms.push(cf);
            }
            Boundary::Cyclic { phase, .. } => {
                let ring: Vec<f64> = (0..n).map(|m| (2.0 * PI * m as f64 + phase) / nf).collect();
                closed_forms.push(compare(
                    "ring",
                    ring,
                    h.k,
                    &eigenvalues,
                    "k = (2 pi m + phase)/N, m = 0..N-1",
                ));
            }
        }
    }
    Spectrum {
        eigenvalues,
        eigenvectors,
        closed_forms,
    }
}

/// How the evolution subspace is grown from the initial state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// Breadth-first over computation-basis vectors reached by `T` and `T†`.
    #[default]
    ComputationBasis,
    /// Orthonormalized `T`/`T†` images of whole states; stays on the path
    /// of a path state, where basis closure can grow exponentially.
    StateOrbit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvolveOptions {
    pub closure: Closure,
    /// Number of `T`/`T†` layers; default `2⌈K|t|⌉ + 20`.
    pub depth: Option<usize>,
    /// Basis vectors outside the window are left out of the subspace.
    pub window: Option<Window>,
}

pub fn default_depth(k: f64, t: f64) -> usize {
    2 * (k * t.abs()).ceil() as usize + 20
}

/// Orthonormal subspace with the layer at which each vector was found.
struct Subspace {
    vectors: Vec<WaveState>,
    layers: Vec<usize>,
    index: Option<BTreeMap<BasisVector, usize>>,
}

const ORBIT_EPS: f64 = 1e-10;

fn basis_closure(
    op: &StepOperator,
    psi0: &WaveState,
    depth: usize,
    window: Option<Window>,
) -> Result<Subspace> {
    let dims = op.dims();
    let inside = |b: &BasisVector| match window {
        None => true,
        Some(w) => {
            let h = w.half_width;
            b.head_pos.abs() <= h
                && b.lattice
                    .support()
                    .is_none_or(|(lo, hi)| lo >= -h && hi <= h)
        }
    };
    let mut seen: BTreeSet<BasisVector> = BTreeSet::new();
    let mut order: Vec<(BasisVector, usize)> = Vec::new();
    let mut frontier: Vec<BasisVector> = psi0.basis_vectors().cloned().collect();
    for b in &frontier {
        seen.insert(b.clone());
        order.push((b.clone(), 0));
    }
    for layer in 1..=depth {
        let mut next = Vec::new();
        for b in &frontier {
            let s = WaveState::basis(dims, b.clone())?;
            for image in [op.apply(&s)?, op.apply_adjoint(&s)?] {
                for nb in image.basis_vectors() {
                    if inside(nb) && seen.insert(nb.clone()) {
                        order.push((nb.clone(), layer));
                        next.push(nb.clone());
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let index = order
        .iter()
        .enumerate()
        .map(|(i, (b, _))| (b.clone(), i))
        .collect();
    let (vectors, layers) = order
        .into_iter()
        .map(|(b, l)| WaveState::basis(dims, b).map(|s| (s, l)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(Subspace {
        vectors,
        layers,
        index: Some(index),
    })
}

fn orbit_closure(
    op: &StepOperator,
    psi0: &WaveState,
    depth: usize,
    window: Option<Window>,
) -> Result<Subspace> {
    let mut vectors = vec![psi0.normalized()?];
    let mut layers = vec![0];
    let mut frontier = vec![0usize];
    for layer in 1..=depth {
        let mut next = Vec::new();
        for &i in &frontier {
            let images = [op.apply(&vectors[i])?, op.apply_adjoint(&vectors[i])?];
            for mut v in images {
                if let Some(w) = window {
                    if !w.contains(&v) {
                        return Err(QtmError::WindowOverflow {
                            half_width: w.half_width,
                        });
                    }
                }
                // two Gram-Schmidt passes
                for _ in 0..2 {
                    let mut all = vec![(ONE, &v)];
                    for e in &vectors {
                        all.push((-e.inner(&v)?, e));
                    }
                    v = WaveState::superpose(&all)?;
                }
                if v.norm() > ORBIT_EPS {
                    vectors.push(v.normalized()?);
                    layers.push(layer);
                    next.push(vectors.len() - 1);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(Subspace {
        vectors,
        layers,
        index: None,
    })
}

/// `e^{−iHt}` on a truncated subspace grown from an initial state.
pub struct Propagator {
    k: f64,
    subspace: Subspace,
    depth: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub state: WaveState,
    pub time: f64,
    pub dimension: usize,
    pub depth: usize,
    /// Probability on the outermost layer; large values mean the subspace is too small.
    pub boundary_mass: f64,
}

impl Propagator {
    /// Builds the subspace for `psi0` and diagonalizes `H` on it. The
    /// default depth is chosen for `|t| ≤ t_max`.
    pub fn new(
        op: &StepOperator,
        k: f64,
        psi0: &WaveState,
        t_max: f64,
        opts: EvolveOptions,
    ) -> Result<Self> {
        check_k(k)?;
        op.dims().ensure_same(psi0.dims())?;
        let depth = opts.depth.unwrap_or_else(|| default_depth(k, t_max));
        let subspace = match opts.closure {
            Closure::ComputationBasis => basis_closure(op, psi0, depth, opts.window)?,
            Closure::StateOrbit => orbit_closure(op, psi0, depth, opts.window)?,
        };
        let n = subspace.vectors.len();
        let mut h = CMatrix::zeros(n, n);
        for (j, e) in subspace.vectors.iter().enumerate() {
            let he = op.hamiltonian_apply(k, e)?;
            match &subspace.index {
                Some(index) => {
                    for (b, a) in he.iter() {
                        if let Some(&i) = index.get(b) {
                            h[(i, j)] = *a;
                        }
                    }
                }
                None => {
                    for (i, f) in subspace.vectors.iter().enumerate() {
                        h[(i, j)] = f.inner(&he)?;
                    }
                }
            }
        }
        // symmetrize away rounding so the eigensolver sees an exact Hermitian matrix
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        Ok(Propagator {
            k,
            subspace,
            depth,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.subspace.vectors.len()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn coordinates(&self, psi: &WaveState) -> Result<CMatrix> {
        let n = self.dimension();
        let mut c = CMatrix::zeros(n, 1);
        for (i, e) in self.subspace.vectors.iter().enumerate() {
            c[(i, 0)] = e.inner(psi)?;
        }
        Ok(c)
    }

    pub fn evolve(&self, psi: &WaveState, t: f64) -> Result<Evolution> {
        let c0 = self.coordinates(psi)?;
        let v = &self.eigenvectors;
        let mut spectral = v.adjoint() * c0;
        for (i, e) in self.eigenvalues.iter().enumerate() {
            spectral[(i, 0)] *= Complex64::from_polar(1.0, -e * t);
        }
        let ct = v * spectral;
        let dims = psi.dims();
        let parts: Vec<(Complex64, &WaveState)> = (0..self.dimension())
            .map(|i| (ct[(i, 0)], &self.subspace.vectors[i]))
            .collect();
        let state = if parts.is_empty() {
            WaveState::zero(dims)
        } else {
            WaveState::superpose(&parts)?
        };
        let outer = self.subspace.layers.iter().copied().max().unwrap_or(0);
        let boundary_mass = if outer < self.depth {
            // closure finished early: the subspace is invariant
            0.0
        } else {
            self.subspace
                .layers
                .iter()
                .enumerate()
                .filter(|&(_, &l)| l == outer)
                .map(|(i, _)| ct[(i, 0)].norm_sqr())
                .sum()
        };
        Ok(Evolution {
            state,
            time: t,
            dimension: self.dimension(),
            depth: self.depth,
            boundary_mass,
        })
    }
}

/// `e^{−iHt}ψ₀` by spectral decomposition on the closure of `ψ₀`.
pub fn evolve(
    op: &StepOperator,
    k: f64,
    psi0: &WaveState,
    t: f64,
    opts: EvolveOptions,
) -> Result<Evolution> {
    Propagator::new(op, k, psi0, t, opts)?.evolve(psi0, t)
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy(op: &StepOperator, k: f64, psi: &WaveState) -> Result<f64> {
    Ok(psi.inner(&op.hamiltonian_apply(k, psi)?)?.re)
}

/// `⟨φ|Hⁿ|ψ⟩` for `n = 0..=n_max`.
pub fn hamiltonian_moments(
    op: &StepOperator,
    k: f64,
    phi: &WaveState,
    psi: &WaveState,
    n_max: usize,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = psi.clone();
    out.push(phi.inner(&cur)?);
    for _ in 0..n_max {
        cur = op.hamiltonian_apply(k, &cur)?;
        out.push(phi.inner(&cur)?);
    }
    Ok(out)
}

fn series_weights(t: f64, n_max: usize) -> Vec<Complex64> {
    let mut w = Vec::with_capacity(n_max + 1);
    let mut c = ONE;
    w.push(c);
    for n in 1..=n_max {
        c *= Complex64::new(0.0, -t) / n as f64;
        w.push(c);
    }
    w
}

/// `Σ_{n ≤ n_max} (−it)ⁿ/n! ⟨φ|Hⁿ|ψ⟩`.
pub fn pathsum_amplitude_states(
    op: &StepOperator,
    k: f64,
    phi: &WaveState,
    psi: &WaveState,
    t: f64,
    n_max: usize,
) -> Result<Complex64> {
    check_k(k)?;
    let moments = hamiltonian_moments(op, k, phi, psi, n_max)?;
    Ok(moments
        .iter()
        .zip(series_weights(t, n_max))
        .map(|(m, w)| m * w)
        .sum())
}

/// Truncated series amplitude `⟨b'|e^{−iHt}|b⟩` between basis vectors.
pub fn pathsum_amplitude(
    op: &StepOperator,
    k: f64,
    b: &BasisVector,
    b_prime: &BasisVector,
    t: f64,
    n_max: usize,
) -> Result<Complex64> {
    let dims = op.dims();
    pathsum_amplitude_states(
        op,
        k,
        &WaveState::basis(dims, b_prime.clone())?,
        &WaveState::basis(dims, b.clone())?,
        t,
        n_max,
    )
}

/// Truncated series `Σ_{n ≤ n_max} (−it)ⁿ/n! Hⁿψ`.
pub fn pathsum_state(
    op: &StepOperator,
    k: f64,
    psi: &WaveState,
    t: f64,
    n_max: usize,
) -> Result<WaveState> {
    check_k(k)?;
    let weights = series_weights(t, n_max);
    let mut acc = psi.clone();
    let mut cur = psi.clone();
    for w in weights.iter().skip(1) {
        cur = op.hamiltonian_apply(k, &cur)?;
        acc = WaveState::superpose(&[(ONE, &acc), (*w, &cur)])?;
    }
    Ok(acc)
}
