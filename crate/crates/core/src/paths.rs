//! Paths generated by iterating `T` and `T†`, distinct-path verification,
//! power-partial-isometry checks and shift-type classification.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QtmError, Result};
use crate::operators::StepOperator;
use crate::state::{BasisVector, WaveState};

pub const EPS_ORTH: f64 = 1e-9;
pub const EPS_TERMINAL: f64 = 1e-12;
/// Bonds lighter than this only raise a warning.
pub const WEIGHT_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathOptions {
    pub eps_orth: f64,
    pub eps_terminal: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            eps_orth: EPS_ORTH,
            eps_terminal: EPS_TERMINAL,
        }
    }
}

/// Outcome of iterating a path, before any verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathClass {
    Finite,
    /// Stopped by the bound going forward; terminal backward.
    RightTruncated,
    /// Terminal forward; stopped by the bound going backward.
    LeftTruncated,
    TwoWayTruncated,
    Cyclic,
}

/// Return of the path onto an earlier state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CycleInfo {
    pub period: usize,
    /// Phase of `⟨first|T·last⟩` after normalization.
    pub phase: f64,
    /// `‖T·last‖`.
    pub weight: f64,
}

/// Normalized states `ψ_k` for `k = -origin .. len - origin`, with the seed
/// at index `origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub states: Vec<WaveState>,
    pub origin: usize,
    /// `weights[i] = ‖T·states[i]‖`, one per bond.
    pub weights: Vec<f64>,
    pub forward_terminal: bool,
    pub backward_terminal: bool,
    pub cycle: Option<CycleInfo>,
    pub classification: PathClass,
}

impl PathRecord {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Lowest path index `m_min ≤ 0`.
    pub fn m_min(&self) -> i64 {
        -(self.origin as i64)
    }

    /// Highest path index `m_max ≥ 0`.
    pub fn m_max(&self) -> i64 {
        (self.states.len() - self.origin) as i64 - 1
    }

    /// State at path index `k` (seed at 0).
    pub fn state(&self, k: i64) -> Option<&WaveState> {
        let i = k + self.origin as i64;
        usize::try_from(i).ok().and_then(|i| self.states.get(i))
    }

    pub fn seed(&self) -> &WaveState {
        &self.states[self.origin]
    }
}

fn matches_earlier(
    states: &[WaveState],
    candidate: &WaveState,
    eps_orth: f64,
) -> Result<Option<(usize, Complex64)>> {
    for (i, s) in states.iter().enumerate() {
        let ov = s.inner(candidate)?;
        if ov.norm() > 1.0 - eps_orth {
            return Ok(Some((i, ov)));
        }
    }
    Ok(None)
}

/// Iterates `T` up to `fwd` times and `T†` up to `bwd` times from `seed`.
///
/// Stops early at terminal states (norm below `eps_terminal`) or when a
/// state returns onto an earlier one up to phase.
pub fn generate_path(
    op: &StepOperator,
    seed: &WaveState,
    fwd: usize,
    bwd: usize,
    opts: PathOptions,
) -> Result<PathRecord> {
    op.dims().ensure_same(seed.dims())?;
    let seed = seed.normalized()?;
    let mut forward = vec![seed.clone()];
    let mut fwd_weights = Vec::new();
    let mut forward_terminal = false;
    // period counted in states, if the path closed on itself
    let mut period = None;

    for _ in 0..fwd {
        let next = op.apply(forward.last().unwrap())?;
        let w = next.norm();
        if w < opts.eps_terminal {
            forward_terminal = true;
            break;
        }
        let next = next.scaled(Complex64::new(1.0 / w, 0.0));
        if let Some((i, _)) = matches_earlier(&forward, &next, opts.eps_orth)? {
            period = Some(forward.len() - i);
            break;
        }
        forward.push(next);
        fwd_weights.push(w);
    }
    if fwd == 0 {
        forward_terminal = op.apply(&seed)?.norm() < opts.eps_terminal;
    }

    let mut backward: Vec<WaveState> = Vec::new();
    let mut bwd_weights = Vec::new();
    let mut backward_terminal = false;
    if period.is_none() {
        for _ in 0..bwd {
            let cur = backward.last().unwrap_or(&seed);
            let prev = op.apply_adjoint(cur)?;
            let w = prev.norm();
            if w < opts.eps_terminal {
                backward_terminal = true;
                break;
            }
            let prev = prev.scaled(Complex64::new(1.0 / w, 0.0));
            if matches_earlier(&forward, &prev, opts.eps_orth)?.is_some()
                || matches_earlier(&backward, &prev, opts.eps_orth)?.is_some()
            {
                period = Some(forward.len() + backward.len());
                break;
            }
            backward.push(prev);
            bwd_weights.push(w);
        }
        if bwd == 0 {
            backward_terminal = op.apply_adjoint(&seed)?.norm() < opts.eps_terminal;
        }
    }

    let origin = backward.len();
    backward.reverse();
    bwd_weights.reverse();
    let mut states = backward;
    states.extend(forward);
    let mut weights = bwd_weights;
    weights.extend(fwd_weights);

    let cycle = match period {
        Some(period) => {
            let last = states.last().unwrap();
            let image = op.apply(last)?;
            let ov = states[states.len() - period].inner(&image)?;
            Some(CycleInfo {
                period,
                phase: ov.arg(),
                weight: image.norm(),
            })
        }
        None => None,
    };
    let classification = if cycle.is_some() {
        PathClass::Cyclic
    } else {
        match (forward_terminal, backward_terminal) {
            (true, true) => PathClass::Finite,
            (true, false) => PathClass::LeftTruncated,
            (false, true) => PathClass::RightTruncated,
            (false, false) => PathClass::TwoWayTruncated,
        }
    };
    Ok(PathRecord {
        states,
        origin,
        weights,
        forward_terminal,
        backward_terminal,
        cycle,
        classification,
    })
}

/// Worst offender found by [`verify_distinct_path`]. Indices are path
/// indices (seed at 0).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DpgWitness {
    Overlap { k: i64, k_prime: i64, overlap: f64 },
    Backstep { k: i64, defect: f64 },
    Forwardstep { k: i64, defect: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpgReport {
    pub orthogonal: bool,
    pub max_cross_overlap: f64,
    pub backstep_ok: bool,
    pub forwardstep_ok: bool,
    pub max_backstep_defect: f64,
    pub max_forwardstep_defect: f64,
    /// Path indices `k` whose bond `k → k+1` weighs less than [`WEIGHT_FLOOR`].
    pub low_weight_bonds: Vec<i64>,
    pub witness: Option<DpgWitness>,
}

impl DpgReport {
    pub fn passed(&self) -> bool {
        self.orthogonal && self.backstep_ok && self.forwardstep_ok
    }
}

/// Distance of `v` from the ray through unit vector `target`, plus the
/// projection coefficient `⟨target|v⟩`.
fn ray_defect(target: &WaveState, v: &WaveState) -> Result<(f64, Complex64)> {
    let c = target.inner(v)?;
    let rest = v.sub(&target.scaled(c))?;
    Ok((rest.norm(), c))
}

/// Defect of `v ∝ target` with a positive factor; `any_phase` accepts any
/// unit-modulus factor.
fn step_defect(target: &WaveState, v: &WaveState, any_phase: bool) -> Result<f64> {
    let (residual, c) = ray_defect(target, v)?;
    let phase_defect = if any_phase || c.norm() == 0.0 {
        0.0
    } else {
        (c - Complex64::new(c.norm(), 0.0)).norm()
    };
    Ok(residual.max(phase_defect))
}

/// Checks pairwise orthogonality and that `T` and `T†` step along the path
/// with positive factors.
pub fn verify_distinct_path(
    op: &StepOperator,
    path: &PathRecord,
    eps_orth: f64,
) -> Result<DpgReport> {
    let n = path.states.len();
    let idx = |i: usize| i as i64 - path.origin as i64;
    let mut witness = None;

    let mut max_overlap: f64 = 0.0;
    let mut worst_pair = (0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let ov = path.states[i].inner(&path.states[j])?.norm();
            if ov > max_overlap {
                max_overlap = ov;
                worst_pair = (i, j);
            }
        }
    }
    let orthogonal = max_overlap < eps_orth;
    if !orthogonal {
        witness = Some(DpgWitness::Overlap {
            k: idx(worst_pair.0),
            k_prime: idx(worst_pair.1),
            overlap: max_overlap,
        });
    }

    let mut max_back: f64 = 0.0;
    let mut max_fwd: f64 = 0.0;
    let mut worst_back = 0;
    let mut worst_fwd = 0;
    let mut low = Vec::new();
    let mut bonds: Vec<(usize, usize, bool)> = (0..n.saturating_sub(1))
        .map(|i| (i, i + 1, false))
        .collect();
    if let Some(c) = path.cycle {
        if n > 0 && c.period <= n {
            bonds.push((n - 1, n - c.period, true));
        }
    }
    for &(i, j, wrap) in &bonds {
        let f = op.apply(&path.states[i])?;
        let w = f.norm();
        if w < WEIGHT_FLOOR {
            low.push(idx(i));
        }
        let fd = if w == 0.0 {
            1.0
        } else {
            step_defect(
                &path.states[j],
                &f.scaled(Complex64::new(1.0 / w, 0.0)),
                wrap,
            )?
        };
        if fd > max_fwd {
            max_fwd = fd;
            worst_fwd = i;
        }
        let b = op.apply_adjoint(&path.states[j])?;
        let wb = b.norm();
        let bd = if wb == 0.0 {
            1.0
        } else {
            step_defect(
                &path.states[i],
                &b.scaled(Complex64::new(1.0 / wb, 0.0)),
                wrap,
            )?
        };
        if bd > max_back {
            max_back = bd;
            worst_back = i;
        }
    }
    let backstep_ok = max_back < eps_orth;
    let forwardstep_ok = max_fwd < eps_orth;
    if witness.is_none() && !backstep_ok {
        witness = Some(DpgWitness::Backstep {
            k: idx(worst_back),
            defect: max_back,
        });
    }
    if witness.is_none() && !forwardstep_ok {
        witness = Some(DpgWitness::Forwardstep {
            k: idx(worst_fwd),
            defect: max_fwd,
        });
    }
    Ok(DpgReport {
        orthogonal,
        max_cross_overlap: max_overlap,
        backstep_ok,
        forwardstep_ok,
        max_backstep_defect: max_back,
        max_forwardstep_defect: max_fwd,
        low_weight_bonds: low,
        witness,
    })
}

/// A path that passed [`verify_distinct_path`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifiedPath {
    path: PathRecord,
    report: DpgReport,
}

impl VerifiedPath {
    pub fn verify(op: &StepOperator, path: PathRecord, eps_orth: f64) -> Result<VerifiedPath> {
        let report = verify_distinct_path(op, &path, eps_orth)?;
        if !report.passed() {
            return Err(QtmError::NotDistinct(match &report.witness {
                Some(w) => serde_json::to_string(w).unwrap_or_default(),
                None => "verification failed".into(),
            }));
        }
        Ok(VerifiedPath { path, report })
    }

    pub fn path(&self) -> &PathRecord {
        &self.path
    }

    pub fn report(&self) -> &DpgReport {
        &self.report
    }

    pub fn into_inner(self) -> PathRecord {
        self.path
    }
}

/// Generates and verifies in one go.
pub fn follow_verified(
    op: &StepOperator,
    seed: &WaveState,
    fwd: usize,
    bwd: usize,
    opts: PathOptions,
) -> Result<VerifiedPath> {
    let path = generate_path(op, seed, fwd, bwd, opts)?;
    VerifiedPath::verify(op, path, opts.eps_orth)
}

/// Weighted-shift type of the restriction of `T` to a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShiftType {
    /// Unitary; both directions unbounded.
    Bilateral {
        lower_bound: bool,
    },
    /// Isometry; terminal going backward, unbounded forward.
    Unilateral {
        lower_bound: bool,
    },
    /// Adjoint of a unilateral shift; terminal going forward.
    Coisometry {
        lower_bound: bool,
    },
    Finite {
        states: usize,
    },
    Cyclic {
        period: usize,
    },
}

/// `lower_bound` is set whenever an unbounded direction was only followed
/// to the iteration limit.
pub fn classify_shift_type(path: &VerifiedPath) -> ShiftType {
    let p = path.path();
    match p.classification {
        PathClass::Finite => ShiftType::Finite { states: p.len() },
        PathClass::Cyclic => ShiftType::Cyclic {
            period: p.cycle.map(|c| c.period).unwrap_or(p.len()),
        },
        PathClass::RightTruncated => ShiftType::Unilateral { lower_bound: true },
        PathClass::LeftTruncated => ShiftType::Coisometry { lower_bound: true },
        PathClass::TwoWayTruncated => ShiftType::Bilateral { lower_bound: true },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossPathReport {
    pub path_lengths: Vec<usize>,
    pub max_overlap: f64,
    pub orthogonal: bool,
    /// `(path a, index in a, path b, index in b, overlap)` of the worst pair.
    pub witness: Option<(usize, i64, usize, i64, f64)>,
}

/// Follows a path per seed and checks every state against every state of
/// every other path.
pub fn verify_cross_path(
    op: &StepOperator,
    seeds: &[WaveState],
    fwd: usize,
    bwd: usize,
    opts: PathOptions,
) -> Result<CrossPathReport> {
    let normalized: Vec<WaveState> = seeds
        .iter()
        .map(|s| s.normalized())
        .collect::<Result<_>>()?;
    for a in 0..normalized.len() {
        for b in a + 1..normalized.len() {
            let ov = normalized[a].inner(&normalized[b])?.norm();
            if ov > opts.eps_orth {
                return Err(QtmError::NonOrthogonalSeeds {
                    first: a,
                    second: b,
                    overlap: ov,
                });
            }
        }
    }
    let paths: Vec<PathRecord> = normalized
        .iter()
        .map(|s| generate_path(op, s, fwd, bwd, opts))
        .collect::<Result<_>>()?;
    let mut max_overlap: f64 = 0.0;
    let mut witness = None;
    for a in 0..paths.len() {
        for b in a + 1..paths.len() {
            for (i, sa) in paths[a].states.iter().enumerate() {
                for (j, sb) in paths[b].states.iter().enumerate() {
                    let ov = sa.inner(sb)?.norm();
                    if ov > max_overlap {
                        max_overlap = ov;
                        witness = Some((
                            a,
                            i as i64 - paths[a].origin as i64,
                            b,
                            j as i64 - paths[b].origin as i64,
                            ov,
                        ));
                    }
                }
            }
        }
    }
    let orthogonal = max_overlap < opts.eps_orth;
    Ok(CrossPathReport {
        path_lengths: paths.iter().map(|p| p.len()).collect(),
        max_overlap,
        orthogonal,
        witness: if orthogonal { None } else { witness },
    })
}

/// Positions allowed for heads and nonzero qudits: `|site| ≤ half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub half_width: i64,
}

impl Window {
    pub fn new(half_width: i64) -> Self {
        Window { half_width }
    }

    pub fn contains(&self, psi: &WaveState) -> bool {
        match psi.extent() {
            Some((lo, hi)) => lo >= -self.half_width && hi <= self.half_width,
            None => true,
        }
    }

    fn guard(&self, psi: WaveState) -> Result<WaveState> {
        if self.contains(&psi) {
            Ok(psi)
        } else {
            Err(QtmError::WindowOverflow {
                half_width: self.half_width,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerCheck {
    pub n: usize,
    /// `max ‖A²ψ − Aψ‖` over the sample, `A = (T†)ⁿTⁿ`.
    pub a_idempotence: f64,
    pub b_idempotence: f64,
    /// `max |⟨φ|Aψ⟩ − conj⟨ψ|Aφ⟩|` over sample pairs.
    pub a_hermiticity: f64,
    pub b_hermiticity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    pub n_max: usize,
    pub samples: usize,
    pub tolerance: f64,
    pub powers: Vec<PowerCheck>,
    /// `max ‖[X, Y]ψ‖` over all pairs drawn from `{Aₙ, Bₘ}`.
    pub max_commutator: f64,
    pub passed: bool,
}

/// Applies `(T†)ⁿTⁿ` (`outer_adjoint = false`) or `Tⁿ(T†)ⁿ`.
fn power_projector(
    op: &StepOperator,
    psi: &WaveState,
    n: usize,
    outer_adjoint: bool,
    window: Window,
) -> Result<WaveState> {
    let mut cur = psi.clone();
    for adjoint in [outer_adjoint, !outer_adjoint] {
        for _ in 0..n {
            cur = if adjoint {
                op.apply_adjoint(&cur)?
            } else {
                op.apply(&cur)?
            };
            cur = window.guard(cur)?;
        }
    }
    Ok(cur)
}

/// `Aₙ = (T†)ⁿTⁿ` applied to `psi`.
pub fn apply_a(op: &StepOperator, psi: &WaveState, n: usize, window: Window) -> Result<WaveState> {
    power_projector(op, psi, n, false, window)
}

/// `Bₙ = Tⁿ(T†)ⁿ` applied to `psi`.
pub fn apply_b(op: &StepOperator, psi: &WaveState, n: usize, window: Window) -> Result<WaveState> {
    power_projector(op, psi, n, true, window)
}

/// Tests `Aₙ = (T†)ⁿTⁿ` and `Bₙ = Tⁿ(T†)ⁿ` for `n ≤ n_max` on the sample:
/// idempotence, hermiticity and mutual commutation, each against
/// `tolerance`.
pub fn check_power_partial_isometry(
    op: &StepOperator,
    n_max: usize,
    sample: &[BasisVector],
    window: Window,
    tolerance: f64,
) -> Result<IsometryReport> {
    if n_max == 0 {
        return Err(QtmError::InvalidArgument("n_max must be >= 1".into()));
    }
    let dims = op.dims();
    let distinct: BTreeSet<&BasisVector> = sample.iter().collect();
    let states: Vec<WaveState> = distinct
        .into_iter()
        .map(|b| WaveState::basis(dims, b.clone()).and_then(|s| window.guard(s)))
        .collect::<Result<_>>()?;

    // images[n-1][i] = (Aₙψᵢ, Bₙψᵢ)
    let mut images: Vec<Vec<(WaveState, WaveState)>> = Vec::with_capacity(n_max);
    let mut powers = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut row = Vec::with_capacity(states.len());
        let mut a_idem: f64 = 0.0;
        let mut b_idem: f64 = 0.0;
        for psi in &states {
            let a = apply_a(op, psi, n, window)?;
            let b = apply_b(op, psi, n, window)?;
            a_idem = a_idem.max(apply_a(op, &a, n, window)?.distance(&a)?);
            b_idem = b_idem.max(apply_b(op, &b, n, window)?.distance(&b)?);
            row.push((a, b));
        }
        let mut a_herm: f64 = 0.0;
        let mut b_herm: f64 = 0.0;
        for i in 0..states.len() {
            for j in i..states.len() {
                let (ai, bi) = &row[i];
                let (aj, bj) = &row[j];
                a_herm = a_herm.max((states[i].inner(aj)? - states[j].inner(ai)?.conj()).norm());
                b_herm = b_herm.max((states[i].inner(bj)? - states[j].inner(bi)?.conj()).norm());
            }
        }
        powers.push(PowerCheck {
            n,
            a_idempotence: a_idem,
            b_idempotence: b_idem,
            a_hermiticity: a_herm,
            b_hermiticity: b_herm,
        });
        images.push(row);
    }

    let mut max_commutator: f64 = 0.0;
    for (i, psi) in states.iter().enumerate() {
        let _ = psi;
        for n in 1..=n_max {
            for m in 1..=n_max {
                let (an, bn) = &images[n - 1][i];
                let (am, bm) = &images[m - 1][i];
                // [Aₙ, Bₘ]ψ = Aₙ(Bₘψ) − Bₘ(Aₙψ)
                let ab = apply_a(op, bm, n, window)?.distance(&apply_b(op, an, m, window)?)?;
                max_commutator = max_commutator.max(ab);
                if m > n {
                    let aa = apply_a(op, am, n, window)?.distance(&apply_a(op, an, m, window)?)?;
                    let bb = apply_b(op, bm, n, window)?.distance(&apply_b(op, bn, m, window)?)?;
                    max_commutator = max_commutator.max(aa).max(bb);
                }
            }
        }
    }
    let worst = powers
        .iter()
        .map(|p| {
            p.a_idempotence
                .max(p.b_idempotence)
                .max(p.a_hermiticity)
                .max(p.b_hermiticity)
        })
        .fold(max_commutator, f64::max);
    Ok(IsometryReport {
        n_max,
        samples: states.len(),
        tolerance,
        powers,
        max_commutator,
        passed: worst < tolerance,
    })
}
