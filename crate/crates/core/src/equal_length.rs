//! All four cables of equal length.
//!
//! The platform hangs level with every cable plumb, so the pose is known in
//! closed form, but the structure matrix has rank three and the tensions form
//! a one-parameter family `T = base + τ4·(−1, 1, −1, 1)`. Among the
//! nonnegative members we pick the one with the smallest spread of tensions.

use serde::{Deserialize, Serialize};

use crate::config::MechanismConfig;
use crate::geometry::{PlatformPose, TensionVector, Vec3};

pub const FAMILY_DIRECTION: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

/// Level pose with all cables plumb at length `l`.
pub fn equal_length_pose(l: f64, cfg: &MechanismConfig) -> PlatformPose {
    let (a, b) = (cfg.a, cfg.b);
    PlatformPose::new(
        Vec3::new(a, b, -l),
        Vec3::new(-a, b, -l),
        Vec3::new(-a, -b, -l),
        Vec3::new(cfg.k1 * a, cfg.k2 * b, -l - cfg.h),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensionFamily {
    /// Particular solution with `τ4 = 0`.
    pub base: TensionVector,
    pub direction: [f64; 4],
    /// Feasible range `[τ4L, τ4R]` of the free tension (N).
    pub tau4_low: f64,
    pub tau4_high: f64,
}

impl TensionFamily {
    pub fn member(&self, tau4: f64) -> TensionVector {
        let mut t = self.base.0;
        for (ti, d) in t.iter_mut().zip(self.direction) {
            *ti += tau4 * d;
        }
        TensionVector(t)
    }
}

/// The equal-length tension family and its nonnegativity interval.
///
/// The interval is read off the four component constraints directly:
/// `τ1 ≥ 0 ⇒ τ4 ≤ (1+k1)mg/2`, `τ2 ≥ 0 ⇒ τ4 ≥ (k1−k2)mg/2`,
/// `τ3 ≥ 0 ⇒ τ4 ≤ (1−k2)mg/2`, `τ4 ≥ 0`.
pub fn tension_family(cfg: &MechanismConfig) -> TensionFamily {
    let w = cfg.weight();
    let (k1, k2) = (cfg.k1, cfg.k2);
    let base = TensionVector([
        (1.0 + k1) * w / 2.0,
        (k2 - k1) * w / 2.0,
        (1.0 - k2) * w / 2.0,
        0.0,
    ]);
    let tau4_low = ((k1 - k2) * w / 2.0).max(0.0);
    let tau4_high = ((1.0 + k1) * w / 2.0).min((1.0 - k2) * w / 2.0);
    TensionFamily {
        base,
        direction: FAMILY_DIRECTION,
        tau4_low,
        tau4_high,
    }
}

/// Root-sum-square of the six pairwise tension differences.
pub fn tension_difference(t: &TensionVector) -> f64 {
    let mut sum = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            sum += (t.0[i] - t.0[j]).powi(2);
        }
    }
    sum.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvenTensionResult {
    pub tensions: TensionVector,
    pub delta_t: f64,
    pub tau4_used: f64,
    /// The unconstrained minimiser fell outside the feasible interval.
    pub boundary_clamped: bool,
}

/// Unconstrained minimiser of the tension difference along the family.
pub fn tau4_star(cfg: &MechanismConfig) -> f64 {
    (1.0 + cfg.k1 - cfg.k2) * cfg.weight() / 4.0
}

pub fn even_tension(cfg: &MechanismConfig) -> EvenTensionResult {
    let family = tension_family(cfg);
    let star = tau4_star(cfg);
    let tau4 = star.clamp(family.tau4_low, family.tau4_high);
    let tensions = family.member(tau4);
    EvenTensionResult {
        tensions,
        delta_t: tension_difference(&tensions),
        tau4_used: tau4,
        boundary_clamped: tau4 != star,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub k1: f64,
    pub k2: f64,
    pub delta_t_min: f64,
}

/// Grid coordinate `i` of `n` cell-centred nodes across (−1, 1). Odd `n`
/// places a node exactly at 0.
pub fn grid_coordinate(i: usize, n: usize) -> f64 {
    (2 * i + 1) as f64 / n as f64 - 1.0
}

/// Minimal tension difference over a `resolution × resolution` grid of
/// centre-of-gravity offsets, row-major in `k1` then `k2`. Mass and gravity
/// come from `cfg`; its own `k1`, `k2` are ignored.
pub fn delta_t_min_grid(resolution: usize, cfg: &MechanismConfig) -> Vec<GridNode> {
    let n = resolution.max(2);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let k1 = grid_coordinate(i, n);
        for j in 0..n {
            let k2 = grid_coordinate(j, n);
            let c = MechanismConfig { k1, k2, ..*cfg };
            out.push(GridNode {
                k1,
                k2,
                delta_t_min: even_tension(&c).delta_t,
            });
        }
    }
    out
}
