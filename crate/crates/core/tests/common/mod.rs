//! Shared test helpers: an independent matrix-element oracle for `T` and
//! small state generators.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use qtm::operators::random_basis_vector;
use qtm::{BasisVector, CMatrix, Dims, QuditLattice, StepOperator, WaveState};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const W: i64 = 8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `⟨out|T|input⟩` straight from the definition: a term contributes
/// `γ · head[l'][l] · qubit[s'_j][s_j]` when `j' = j + Δ` and the lattices
/// agree away from `j`.
pub fn element(op: &StepOperator, out: &BasisVector, input: &BasisVector) -> Complex64 {
    let j = input.head_pos;
    let mut sites: Vec<i64> = out
        .lattice
        .entries()
        .chain(input.lattice.entries())
        .map(|(s, _)| s)
        .collect();
    sites.sort_unstable();
    sites.dedup();
    if sites
        .iter()
        .any(|&s| s != j && out.lattice.get(s) != input.lattice.get(s))
    {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for t in op.terms() {
        if out.head_pos != j + t.delta() as i64 {
            continue;
        }
        let h = t.head()[(out.head_level, input.head_level)];
        let q = t.qubit()[(out.lattice.get(j), input.lattice.get(j))];
        acc += h * q * t.gamma();
    }
    acc
}

/// Every basis vector with head anywhere in `[-w, w]` whose lattice equals
/// `b`'s except for at most one site in `[-w, w]`.
pub fn neighbourhood(dims: Dims, b: &BasisVector, w: i64) -> Vec<BasisVector> {
    let mut lattices = vec![b.lattice.clone()];
    for site in -w..=w {
        for level in 0..dims.qudit {
            if level != b.lattice.get(site) {
                let mut l = b.lattice.clone();
                l.set(site, level).unwrap();
                lattices.push(l);
            }
        }
    }
    let mut out = Vec::new();
    for l in &lattices {
        for head_level in 0..dims.head {
            for head_pos in -w..=w {
                out.push(BasisVector::new(head_level, head_pos, l.clone()));
            }
        }
    }
    out
}

/// Largest entrywise deviation between the sparse `T·b` (or `T†·b`) and the
/// oracle column over the window neighbourhood of `b`. Also fails if the
/// sparse image has support the neighbourhood does not cover.
pub fn column_deviation(op: &StepOperator, b: &BasisVector, adjoint: bool, w: i64) -> f64 {
    let dims = op.dims();
    let psi = WaveState::basis(dims, b.clone()).unwrap();
    let image = if adjoint {
        op.apply_adjoint(&psi).unwrap()
    } else {
        op.apply(&psi).unwrap()
    };
    let rows = neighbourhood(dims, b, w + 1);
    let mut seen = 0usize;
    let mut worst: f64 = 0.0;
    for r in &rows {
        let want = if adjoint {
            element(op, b, r).conj()
        } else {
            element(op, r, b)
        };
        let got = image.amplitude(r);
        if got != Complex64::new(0.0, 0.0) {
            seen += 1;
        }
        worst = worst.max((want - got).norm());
    }
    if seen != image.len() {
        return f64::INFINITY;
    }
    worst
}

/// Random basis vector with head and support in `[-w, w]` and at most
/// three nonzero sites.
pub fn window_basis(rng: &mut ChaCha8Rng, dims: Dims, w: i64) -> BasisVector {
    random_basis_vector(rng, dims, w, 3)
}

/// Random normalized state with a few window components.
pub fn random_state(rng: &mut ChaCha8Rng, dims: Dims, w: i64, components: usize) -> WaveState {
    let parts: Vec<(BasisVector, Complex64)> = (0..components)
        .map(|_| {
            (
                window_basis(rng, dims, w),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    WaveState::from_components(dims, parts)
        .unwrap()
        .normalized()
        .unwrap()
}

/// Random 2×2 unitary.
pub fn random_unitary(rng: &mut ChaCha8Rng) -> CMatrix {
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let b: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let g: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (s, co) = theta.sin_cos();
    let e = |x: f64| Complex64::from_polar(1.0, x);
    CMatrix::from_row_slice(2, 2, &[e(a) * co, -e(b) * s, e(-b + g) * s, e(-a + g) * co])
}

pub fn basis_state(dims: Dims, level: usize, pos: i64, entries: &[(i64, usize)]) -> WaveState {
    let lat = QuditLattice::from_entries(dims.qudit, entries.iter().copied()).unwrap();
    WaveState::basis(dims, BasisVector::new(level, pos, lat)).unwrap()
}

/// Componentwise maximum deviation.
pub fn max_component_diff(a: &WaveState, b: &WaveState) -> f64 {
    let mut keys: BTreeMap<&BasisVector, ()> = BTreeMap::new();
    for k in a.basis_vectors().chain(b.basis_vectors()) {
        keys.insert(k, ());
    }
    keys.keys()
        .map(|k| (a.amplitude(k) - b.amplitude(k)).norm())
        .fold(0.0, f64::max)
}

/// `Π_{k<n} P_{+,j+k}` on a basis vector of the erasure machine.
pub fn erasure_a(b: &BasisVector, n: usize) -> WaveState {
    let dims = Dims::new(1, 2).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // ⟨+|s⟩|+⟩ on each site j..j+n-1
    let mut parts = vec![(b.lattice.clone(), Complex64::new(1.0, 0.0))];
    for k in 0..n as i64 {
        let site = b.head_pos + k;
        let mut next = Vec::new();
        for (lat, a) in &parts {
            for level in 0..2 {
                let mut l = lat.clone();
                l.set(site, level).unwrap();
                next.push((l, a * h * h));
            }
        }
        parts = next;
    }
    WaveState::from_components(
        dims,
        parts
            .into_iter()
            .map(|(l, a)| (BasisVector::new(0, b.head_pos, l), a)),
    )
    .unwrap()
}

/// `Π_{1≤k≤n} P_{0,j-k}` on a basis vector of the erasure machine.
pub fn erasure_b(b: &BasisVector, n: usize) -> WaveState {
    let dims = Dims::new(1, 2).unwrap();
    let keep = (1..=n as i64).all(|k| b.lattice.get(b.head_pos - k) == 0);
    if keep {
        WaveState::basis(dims, b.clone()).unwrap()
    } else {
        WaveState::zero(dims)
    }
}
