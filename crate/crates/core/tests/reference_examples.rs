//! Reference cases exercised through the public API.

mod common;

use common::*;
use swm_core::fk::fk_residual_system;
use swm_core::geometry::{anchor_distances, equilibrium_residual, geometric_residuals, structure_matrix, TautSet};
use swm_core::nls::{self, SolverOptions};
use swm_core::planar::{detect_adjacent_equal, AdjacentEqual};
use swm_core::single_cable::is_single_cable_suspended;
use swm_core::traversal::{build_guess, solve, FkOutcome, TraversalOptions};
use swm_core::{PlatformPose, TensionVector, Vec3};

fn solved(l: [f64; 4]) -> (PlatformPose, TensionVector, TautSet) {
    match solve(&lengths(l), &reference(), &TraversalOptions::default()).unwrap() {
        FkOutcome::Definite { pose, tensions, taut, .. } => (pose, tensions, taut),
        other => panic!("{l:?}: {other:?}"),
    }
}

const PLANAR_CASE: [f64; 4] = [20.0, 20.0, 20.1, 20.1];
const PAIR_CASE: [f64; 4] = [20.0, 20.0, 21.0, 21.0];
const TRIPLE_CASE: [f64; 4] = [20.3, 20.1, 20.5, 20.2];

fn reference_pose(c: [[f64; 3]; 4]) -> PlatformPose {
    let v = |p: [f64; 3]| Vec3::new(p[0], p[1], p[2]);
    PlatformPose::new(v(c[0]), v(c[1]), v(c[2]), v(c[3]))
}

fn planar_reference_pose() -> PlatformPose {
    reference_pose([
        [2.000, 2.499, -19.999],
        [-2.000, 2.499, -19.999],
        [-2.000, -2.499, -20.099],
        [0.500, 0.700, -30.038],
    ])
}

#[test]
fn anchor_distances_of_planar_case_reproduce_the_lengths() {
    let (pose, _, _) = solved(PLANAR_CASE);
    let d = anchor_distances(&pose, &reference());
    for i in 0..4 {
        assert!((d[i] - PLANAR_CASE[i]).abs() < 2e-2);
    }
}

#[test]
fn reference_pose_of_pair_case_is_nearly_rigid() {
    let pose = reference_pose([[2.0, 2.5, -20.0], [-2.0, 2.5, -20.0], [-2.0, -2.403, -20.981], [0.5, 2.5, -30.198]]);
    assert!(geometric_residuals(&pose, &reference()).iter().all(|r| r.abs() < 5e-3));
}

#[test]
fn structure_matrix_of_planar_case_matches_the_reference_matrix() {
    let (pose, _, _) = solved(PLANAR_CASE);
    let jt = structure_matrix(&pose, &reference()).unwrap();
    let reference_jt = [
        [0.0, 0.0, 0.0, 0.0],
        [-0.00002, -0.00002, 0.00003, 0.00003],
        [-1.0, -1.0, -1.0, -1.0],
        [-1.79942, -1.79942, 3.19908, 3.19908],
        [1.5, -2.5, -2.5, 1.5],
        [-0.00003, 0.00004, -0.00008, 0.00005],
    ];
    for (r, row) in reference_jt.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let got = jt.matrix()[(r, c)];
            assert!((got - v).abs() < 1e-4, "row {r} col {c}: {got}");
        }
    }
    assert!(jt.singular_values()[3] < 1e-3, "nearly singular");
}

/// The reference singular values disagree with the reference matrix; this
/// test documents the discrepancy and is expected to fail.
#[test]
#[ignore = "reference singular values are inconsistent with the reference structure matrix"]
fn singular_values_of_planar_case_match_reference_values() {
    let (pose, _, _) = solved(PLANAR_CASE);
    let sv = structure_matrix(&pose, &reference()).unwrap().singular_values();
    for (s, e) in sv.iter().zip([5.43464, 4.08118, 1.32388, 0.00008]) {
        assert!((s - e).abs() < 1e-3, "{sv:?}");
    }
}

#[test]
fn reference_tensions_balance_the_reference_pose() {
    let cfg = reference();
    let t = TensionVector([39.201e3, 23.520e3, 13.229e3, 22.049e3]);
    let r = equilibrium_residual(&planar_reference_pose(), &t, &cfg).unwrap();
    assert!(r.iter().all(|v| v.abs() < 2e-3 * cfg.weight()), "{r:?}");
}

#[test]
fn solved_examples_are_roots_of_their_fk_systems() {
    let cfg = reference();
    for l in [PLANAR_CASE, PAIR_CASE, TRIPLE_CASE] {
        let (pose, tensions, taut) = solved(l);
        let r = fk_residual_system(taut, &lengths(l), &cfg).residual_at(&pose, &tensions);
        assert!(r.iter().all(|v| v.abs() < 1e-8), "{l:?}: {r:?}");
    }
}

#[test]
fn dogleg_from_the_standard_guess_reaches_triple_case() {
    let cfg = reference();
    let l = lengths(TRIPLE_CASE);
    let taut = TautSet::from_indices(&[0, 1, 3]).unwrap();
    let system = fk_residual_system(taut, &l, &cfg);
    let guess = build_guess(&l, taut, &cfg);
    let report = nls::solve(&system, &system.pack(&guess.pose, &guess.tensions), &SolverOptions::default()).unwrap();
    assert!(report.converged && report.residual_norm < 1e-8);
    let (pose, tensions) = system.unpack(&report.solution);
    let table = reference_pose([
        [1.996, 2.499, -20.299],
        [-1.999, 2.499, -20.099],
        [-1.995, -2.499, -20.000],
        [-0.001, 0.299, -30.170],
    ]);
    assert!(pose.max_abs_difference(&table) < 1e-2);
    let expected = [5.856e3, 49.018e3, 0.0, 43.126e3];
    for (i, e) in expected.iter().enumerate() {
        assert!((tensions.get(i) - e).abs() < 150.0);
    }
}

#[test]
fn single_cable_verdicts_of_the_examples() {
    let cfg = reference();
    assert!(is_single_cable_suspended(&lengths([20.0, 21.0, 22.0, 21.5]), &cfg).unwrap().suspended());
    assert!(!is_single_cable_suspended(&lengths(PAIR_CASE), &cfg).unwrap().suspended());
    assert!(!is_single_cable_suspended(&lengths(TRIPLE_CASE), &cfg).unwrap().suspended());
}

#[test]
fn adjacency_of_the_examples() {
    assert_eq!(detect_adjacent_equal(&lengths(PLANAR_CASE)), Some(AdjacentEqual::OneTwoThreeFour));
    assert_eq!(detect_adjacent_equal(&lengths(TRIPLE_CASE)), None);
}

#[test]
fn pair_case_tension_split_follows_from_plumb_cables() {
    let cfg = reference();
    let (pose, t, taut) = solved(PAIR_CASE);
    assert_eq!(taut, TautSet::from_indices(&[0, 1]).unwrap());
    let w = cfg.weight();
    assert!((pose.b1.x - 2.0).abs() < 1e-9 && (pose.b1.y - 2.5).abs() < 1e-9);
    assert!((t.get(0) + t.get(1) - w).abs() < 1e-6 * w);
    assert!((t.get(0) - 0.625 * w).abs() < 1e-6 * w);
}
