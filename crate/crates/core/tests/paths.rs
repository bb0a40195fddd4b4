mod common;

use common::*;
use qtm::machines::{self, BtConvention, ErasurePathState, InterferometerSeed};
use qtm::paths::{
    apply_a, apply_b, check_power_partial_isometry, classify_shift_type, follow_verified,
    generate_path, verify_cross_path, verify_distinct_path, DpgWitness, PathClass, PathOptions,
    ShiftType, VerifiedPath, Window, EPS_ORTH,
};
use qtm::{BasisVector, QtmError, QuditLattice, WaveState};

fn opts() -> PathOptions {
    PathOptions::default()
}

#[test]
fn erasure_power_projectors_match_closed_forms() {
    let op = machines::erasure().unwrap();
    let window = Window::new(40);
    let mut r = rng(3);
    for _ in 0..100 {
        let b = window_basis(&mut r, op.dims(), W);
        let psi = WaveState::basis(op.dims(), b.clone()).unwrap();
        for n in 1..=5 {
            let a = apply_a(&op, &psi, n, window).unwrap();
            assert!(
                max_component_diff(&a, &erasure_a(&b, n)) < 1e-12,
                "A_{n} on {b}"
            );
            let bb = apply_b(&op, &psi, n, window).unwrap();
            assert!(
                max_component_diff(&bb, &erasure_b(&b, n)) < 1e-12,
                "B_{n} on {b}"
            );
        }
    }
}

#[test]
fn erasure_is_a_power_partial_isometry() {
    let op = machines::erasure().unwrap();
    let mut r = rng(4);
    let sample: Vec<BasisVector> = (0..30)
        .map(|_| window_basis(&mut r, op.dims(), W))
        .collect();
    let report = check_power_partial_isometry(&op, 5, &sample, Window::new(40), 1e-12).unwrap();
    assert!(report.passed, "{report:?}");
}

#[test]
fn free_motion_powers_are_identity() {
    let op = machines::free_motion().unwrap();
    let mut r = rng(5);
    for _ in 0..20 {
        let psi = WaveState::basis(op.dims(), window_basis(&mut r, op.dims(), W)).unwrap();
        for n in 1..4 {
            assert_eq!(apply_a(&op, &psi, n, Window::new(40)).unwrap(), psi);
            assert_eq!(apply_b(&op, &psi, n, Window::new(40)).unwrap(), psi);
        }
    }
}

#[test]
fn add1_and_interferometers_are_power_partial_isometries() {
    let v = machines::hadamard_like();
    let ops = [
        machines::add_one(&v).unwrap(),
        machines::interferometer_one().unwrap(),
        machines::interferometer_two(&v).unwrap(),
    ];
    for op in ops {
        let mut r = rng(6);
        let sample: Vec<BasisVector> = (0..25)
            .map(|_| window_basis(&mut r, op.dims(), 6))
            .collect();
        let report = check_power_partial_isometry(&op, 3, &sample, Window::new(40), 1e-10).unwrap();
        assert!(report.passed, "{}: {report:?}", op.name());
    }
}

#[test]
fn erasure_bt_path_terminates_at_the_wall() {
    let op = machines::erasure().unwrap();
    let seed = ErasurePathState::new(0, 5).build().unwrap();
    let p = generate_path(&op, &seed, 20, 6, opts()).unwrap();
    assert!(p.forward_terminal);
    assert_eq!(p.m_max(), 5);
    assert!(p
        .states
        .last()
        .unwrap()
        .basis_vectors()
        .all(|b| b.head_pos == 5));
    assert!(p.weights.iter().all(|w| (w - 1.0).abs() < 1e-12));
    for s in &p.states {
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
    let report = verify_distinct_path(&op, &p, EPS_ORTH).unwrap();
    assert!(report.orthogonal && report.backstep_ok && report.forwardstep_ok);
    assert_eq!(p.classification, PathClass::LeftTruncated);
}

#[test]
fn erasure_path_states_are_the_constructed_ones() {
    let op = machines::erasure().unwrap();
    let seed = ErasurePathState::new(-2, 3).build().unwrap();
    let p = generate_path(&op, &seed, 10, 0, opts()).unwrap();
    for (k, s) in p.states.iter().enumerate() {
        let want = ErasurePathState::new(-2 + k as i64, 3).build().unwrap();
        assert!(s.distance(&want).unwrap() < 1e-12, "k={k}");
    }
}

#[test]
fn erasure_conventions() {
    let op = machines::erasure().unwrap();
    let terminal = machines::erasure_bt_state(3, 3, vec![], BtConvention::default()).unwrap();
    assert!(op.apply(&terminal).unwrap().norm() < 1e-12);
    let plus = machines::erasure_bt_state(0, 3, vec![(6, 1)], BtConvention::HeadSitePlus).unwrap();
    let next = machines::erasure_bt_state(1, 3, vec![(6, 1)], BtConvention::HeadSitePlus).unwrap();
    let image = op.apply(&plus).unwrap();
    assert!((image.norm() - 1.0).abs() < 1e-12);
    assert!(image.distance(&next).unwrap() < 1e-12);
    let zero = machines::erasure_bt_state(0, 3, vec![], BtConvention::HeadSiteZero).unwrap();
    assert!((op.apply(&zero).unwrap().norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn erasure_left_wall_gives_a_finite_path() {
    let op = machines::erasure().unwrap();
    let start = ErasurePathState::new(0, 5)
        .with_left_wall(0)
        .build()
        .unwrap();
    assert!(op.apply_adjoint(&start).unwrap().norm() < 1e-12);
    let mid = ErasurePathState::new(2, 5)
        .with_left_wall(0)
        .build()
        .unwrap();
    let v = follow_verified(&op, &mid, 20, 20, opts()).unwrap();
    assert_eq!(v.path().classification, PathClass::Finite);
    assert_eq!((v.path().m_min(), v.path().m_max()), (-2, 3));
    assert_eq!(classify_shift_type(&v), ShiftType::Finite { states: 6 });
}

#[test]
fn add1_path_is_two_way_truncated() {
    let op = machines::add_one(&machines::hadamard_like()).unwrap();
    let seed = machines::add1_initial_state(&[0, 3], 0).unwrap();
    let v = follow_verified(&op, &seed, 16, 5, opts()).unwrap();
    assert_eq!(v.path().classification, PathClass::TwoWayTruncated);
    assert_eq!(
        classify_shift_type(&v),
        ShiftType::Bilateral { lower_bound: true }
    );
    assert!(v.path().weights.iter().all(|w| (w - 1.0).abs() < 1e-12));
}

#[test]
fn weight_one_paths_return_to_the_seed() {
    let op = machines::add_one(&machines::hadamard_like()).unwrap();
    let seed = machines::add1_initial_state(&[0, 3], -1).unwrap();
    for n in 1..12 {
        let there = op.apply_power(&seed, n, false).unwrap();
        let back = op.apply_power(&there, n, true).unwrap();
        assert!(back.normalized().unwrap().distance(&seed).unwrap() < 1e-10);
    }
}

#[test]
fn interferometer_paths_verify() {
    let v = machines::hadamard_like();
    let op = machines::interferometer_two(&v).unwrap();
    let seed = machines::interferometer_seed(InterferometerSeed::Two).unwrap();
    let vp = follow_verified(&op, &seed, 12, 4, opts()).unwrap();
    assert!(vp.path().weights.iter().all(|w| (w - 1.0).abs() < 1e-12));
    let op1 = machines::interferometer_one().unwrap();
    let seed = machines::interferometer_seed(InterferometerSeed::One { gap: 2 }).unwrap();
    assert!(follow_verified(&op1, &seed, 12, 4, opts()).is_ok());
}

#[test]
fn broken_interferometer_fails_on_single_one_seeds() {
    let op = machines::interferometer_two_broken(&machines::hadamard_like()).unwrap();
    for j in 1..=4 {
        let seed = machines::single_one_seed(j).unwrap();
        let p = generate_path(&op, &seed, 12, 3, opts()).unwrap();
        let report = verify_distinct_path(&op, &p, EPS_ORTH).unwrap();
        assert!(!report.passed(), "j={j}");
        assert!(
            matches!(report.witness, Some(DpgWitness::Backstep { .. })),
            "j={j}"
        );
        assert!(matches!(
            VerifiedPath::verify(&op, p, EPS_ORTH),
            Err(QtmError::NotDistinct(_))
        ));
    }
}

#[test]
fn cycle_paths() {
    for len in [1, 2, 3, 5] {
        let op = machines::cycle(len).unwrap();
        let seed = basis_state(op.dims(), 0, 4, &[(1, 1)]);
        let v = follow_verified(&op, &seed, 20, 20, opts()).unwrap();
        assert_eq!(classify_shift_type(&v), ShiftType::Cyclic { period: len });
        let c = v.path().cycle.unwrap();
        assert!((c.weight - 1.0).abs() < 1e-12);
        assert!(c.phase.abs() < 1e-12);
    }
}

#[test]
fn cross_path_checks() {
    let op = machines::erasure().unwrap();
    let a = ErasurePathState::new(0, 3).build().unwrap();
    let b = ErasurePathState::new(0, 6).build().unwrap();
    let r = verify_cross_path(&op, &[a, b], 8, 4, opts()).unwrap();
    assert!(r.orthogonal, "{r:?}");

    let free = machines::free_motion().unwrap();
    let a = basis_state(free.dims(), 0, 0, &[]);
    let b = basis_state(free.dims(), 0, 0, &[(100, 1)]);
    assert!(
        verify_cross_path(&free, &[a, b], 10, 10, opts())
            .unwrap()
            .orthogonal
    );

    // a state inside one arm of the broken machine runs into the single-one path
    let broken = machines::interferometer_two_broken(&machines::hadamard_like()).unwrap();
    let seed = machines::single_one_seed(1).unwrap();
    let arm = {
        let mut s = seed.clone();
        for _ in 0..3 {
            s = broken.apply(&s).unwrap();
        }
        let (b, _) = s
            .iter()
            .find(|(b, _)| b.head_level == 2 || b.head_level == 4)
            .unwrap();
        WaveState::basis(broken.dims(), b.clone()).unwrap()
    };
    let r = verify_cross_path(&broken, &[seed, arm], 6, 6, opts()).unwrap();
    assert!(!r.orthogonal);
    assert!(r.witness.is_some());
}

#[test]
fn window_overflow_is_an_error() {
    let op = machines::free_motion().unwrap();
    let b = BasisVector::new(0, 0, QuditLattice::new(2).unwrap());
    assert!(matches!(
        check_power_partial_isometry(&op, 5, &[b], Window::new(3), 1e-10),
        Err(QtmError::WindowOverflow { half_width: 3 })
    ));
}
