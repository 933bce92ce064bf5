//! Browser bindings. Each operation is a plain function returning JSON so it
//! can be exercised natively; the `wasm` module wraps them for JavaScript.

use std::f64::consts::TAU;

use serde::Serialize;
use swm_core::equal_length::delta_t_min_grid;
use swm_core::report::OutcomeReport;
use swm_core::single_cable::{cable_distance_curve, initial_pose_under_single_cable, is_single_cable_suspended};
use swm_core::{solve, CableLengths, MechanismConfig, TraversalOptions};

/// Pose and tensions for four cable lengths, plus the fourth corner and
/// anchors so the page can draw the mechanism.
#[derive(Serialize)]
struct SolveView {
    #[serde(flatten)]
    report: OutcomeReport,
    b4: Option<[f64; 3]>,
    anchors: [[f64; 3]; 4],
}

#[derive(Serialize)]
struct CurveView {
    cable: usize,
    length: f64,
    l_min: f64,
    l_max: f64,
    distance: Vec<f64>,
    phi: Vec<[f64; 2]>,
}

/// Anchor distance of each slack cable over one turn of spin about the
/// suspension cable, each in its own angular reference.
#[derive(Serialize)]
struct SpinView {
    applicable: bool,
    shortest: Option<usize>,
    theta: Vec<f64>,
    curves: Vec<CurveView>,
    phi: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct GridView {
    n: usize,
    k: Vec<f64>,
    /// Row-major in `k1`, in units of `mg`.
    delta_t_over_mg: Vec<f64>,
}

fn lengths(l: &[f64]) -> Result<CableLengths, String> {
    let arr: [f64; 4] = l
        .try_into()
        .map_err(|_| format!("expected four lengths, got {}", l.len()))?;
    CableLengths::new(arr).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("view serialises")
}

pub fn solve_json(l: &[f64]) -> Result<String, String> {
    let cfg = MechanismConfig::default();
    let lengths = lengths(l)?;
    let outcome = solve(&lengths, &cfg, &TraversalOptions::default()).map_err(|e| e.to_string())?;
    let b4 = match &outcome {
        swm_core::FkOutcome::Definite { pose, .. } => {
            let b = pose.b4();
            Some([b.x, b.y, b.z])
        }
        _ => None,
    };
    Ok(to_json(&SolveView {
        report: OutcomeReport::new(&outcome, &cfg).with_lengths(&lengths),
        b4,
        anchors: cfg.anchors().map(|a| [a.x, a.y, a.z]),
    }))
}

pub fn spin_curves_json(l: &[f64], samples: usize) -> Result<String, String> {
    let cfg = MechanismConfig::default();
    let lengths = lengths(l)?;
    let samples = samples.clamp(8, 4096);
    let theta: Vec<f64> = (0..=samples).map(|i| TAU * i as f64 / samples as f64).collect();
    if lengths.all_equal(swm_core::traversal::EQUAL_TOLERANCE) {
        return Ok(to_json(&SpinView {
            applicable: false,
            shortest: None,
            theta: Vec::new(),
            curves: Vec::new(),
            phi: Vec::new(),
        }));
    }
    let check = is_single_cable_suspended(&lengths, &cfg).map_err(|e| e.to_string())?;
    let body = initial_pose_under_single_cable(check.shortest, &lengths, &cfg).map_err(|e| e.to_string())?;
    let pairs = |r: &swm_core::single_cable::RotationalRange| r.intervals().iter().map(|&(lo, hi)| [lo, hi]).collect();
    let curves = check
        .per_cable
        .iter()
        .map(|(j, range)| {
            let c = check.critical.get(*j).expect("critical length per slack cable");
            CurveView {
                cable: j + 1,
                length: lengths.get(*j),
                l_min: c.min,
                l_max: c.max,
                distance: theta.iter().map(|&t| cable_distance_curve(&body, *j, t)).collect(),
                phi: pairs(range),
            }
        })
        .collect();
    Ok(to_json(&SpinView {
        applicable: true,
        shortest: Some(check.shortest + 1),
        theta,
        curves,
        phi: pairs(&check.range),
    }))
}

pub fn delta_t_grid_json(n: usize) -> Result<String, String> {
    if !(2..=401).contains(&n) {
        return Err(format!("grid size {n} outside 2..=401"));
    }
    let cfg = MechanismConfig::default();
    let nodes = delta_t_min_grid(n, &cfg);
    let k = (0..n).map(|i| swm_core::equal_length::grid_coordinate(i, n)).collect();
    Ok(to_json(&GridView {
        n,
        k,
        delta_t_over_mg: nodes.iter().map(|g| g.delta_t_min / cfg.weight()).collect(),
    }))
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn solve(lengths: &[f64]) -> Result<String, JsError> {
        super::solve_json(lengths).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn spin_curves(lengths: &[f64], samples: usize) -> Result<String, JsError> {
        super::spin_curves_json(lengths, samples).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn delta_t_grid(n: usize) -> Result<String, JsError> {
        super::delta_t_grid_json(n).map_err(|e| JsError::new(&e))
    }
}
