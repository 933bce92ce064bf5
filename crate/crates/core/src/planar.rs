//! Adjacent cables of equal length with all four cables taut.
//!
//! With `l1 = l2` and `l3 = l4` the platform is symmetric about the plane
//! `x = k1·a`, and the 3D structure matrix is close to singular. The pose is
//! therefore solved on the projection onto plane `yoz`, where cables 1 and 2
//! collapse into one cable and so do 3 and 4, then lifted back to 3D. The
//! tensions follow from the pseudoinverse of the 3D structure matrix.
//!
//! The other pairing `l1 = l4`, `l2 = l3` is handled by exchanging the x and
//! y axes, which maps it onto the first pairing with cables 2 and 4 swapped.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2, Vector6};
use serde::{Deserialize, Serialize};

use crate::config::MechanismConfig;
use crate::error::{FkError, Result};
use crate::geometry::{gravity_wrench, nearly_equal, structure_matrix, CableLengths, PlatformPose, TensionVector, Vec3};
use crate::nls::{self, SolveReport, SolverOptions, SquareSystem};

/// Relative tolerance for two lengths to count as equal.
pub const ADJACENT_TOLERANCE: f64 = 1e-9;
/// Singular values below this fraction of the largest are treated as zero.
pub const PSEUDOINVERSE_CUTOFF: f64 = 1e-8;
/// Largest equilibrium residual accepted from the pseudoinverse, as a
/// fraction of `mg`.
pub const PSEUDOINVERSE_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdjacentEqual {
    /// `l1 = l2`, `l3 = l4`: symmetric about a plane of constant x.
    OneTwoThreeFour,
    /// `l1 = l4`, `l2 = l3`: symmetric about a plane of constant y.
    OneFourTwoThree,
}

/// Classifies the length pattern. All-equal lengths return `None`.
pub fn detect_adjacent_equal(lengths: &CableLengths) -> Option<AdjacentEqual> {
    let [l1, l2, l3, l4] = lengths.as_array();
    let eq = |x: f64, y: f64| nearly_equal(x, y, ADJACENT_TOLERANCE);
    if eq(l1, l2) && eq(l3, l4) && !eq(l1, l3) {
        Some(AdjacentEqual::OneTwoThreeFour)
    } else if eq(l1, l4) && eq(l2, l3) && !eq(l1, l2) {
        Some(AdjacentEqual::OneFourTwoThree)
    } else {
        None
    }
}

/// Pose on the symmetry plane. The in-plane coordinate `u` is y for
/// [`AdjacentEqual::OneTwoThreeFour`] and x for the other pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPose {
    /// Shared projection of the first pair's attachment points.
    pub near: [f64; 2],
    /// Shared projection of the second pair's attachment points.
    pub far: [f64; 2],
    pub centre: [f64; 2],
}

/// Resultant tension of each collapsed cable pair (N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarTensions {
    /// Cables 1 and 2 (or 1 and 4).
    pub near: f64,
    /// Cables 3 and 4 (or 3 and 2).
    pub far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarSolution {
    pub configuration: AdjacentEqual,
    pub pose: PlanarPose,
    pub tensions: PlanarTensions,
    pub report: SolveReport,
}

/// Mechanism as seen in the frame where the pairing is `l1 = l2`, `l3 = l4`.
fn working_config(configuration: AdjacentEqual, cfg: &MechanismConfig) -> MechanismConfig {
    match configuration {
        AdjacentEqual::OneTwoThreeFour => *cfg,
        AdjacentEqual::OneFourTwoThree => MechanismConfig {
            a: cfg.b,
            b: cfg.a,
            k1: cfg.k2,
            k2: cfg.k1,
            ..*cfg
        },
    }
}

/// Planar four-bar-like system in plane `yoz` of the working frame.
///
/// Unknowns `(y1, z1, y4, z4, yc, zc)/a` and `(τ12, τ34)/mg`; equations are
/// the two cable lengths, the three rigid distances, then force y, force z
/// and the moment about the x-axis through the centre of gravity.
#[derive(Debug, Clone)]
pub struct PlanarSystem {
    scale: f64,
    weight: f64,
    half_span: f64,
    near_length: f64,
    far_length: f64,
    near_radius: f64,
    far_radius: f64,
}

impl PlanarSystem {
    /// `cfg` is the working-frame configuration.
    pub fn new(near_length: f64, far_length: f64, cfg: &MechanismConfig) -> Self {
        let s = 1.0 / cfg.a;
        let (b, h, k2) = (cfg.b, cfg.h, cfg.k2);
        Self {
            scale: cfg.a,
            weight: cfg.weight(),
            half_span: b * s,
            near_length: near_length * s,
            far_length: far_length * s,
            near_radius: ((1.0 - k2).powi(2) * b * b + h * h).sqrt() * s,
            far_radius: ((1.0 + k2).powi(2) * b * b + h * h).sqrt() * s,
        }
    }

    pub fn pack(&self, pose: &PlanarPose, tensions: &PlanarTensions) -> Vec<f64> {
        let s = 1.0 / self.scale;
        let mut x: Vec<f64> = [pose.near, pose.far, pose.centre].iter().flatten().map(|v| v * s).collect();
        x.push(tensions.near / self.weight);
        x.push(tensions.far / self.weight);
        x
    }

    pub fn unpack(&self, x: &[f64]) -> (PlanarPose, PlanarTensions) {
        let s = self.scale;
        let pose = PlanarPose {
            near: [x[0] * s, x[1] * s],
            far: [x[2] * s, x[3] * s],
            centre: [x[4] * s, x[5] * s],
        };
        let tensions = PlanarTensions {
            near: x[6] * self.weight,
            far: x[7] * self.weight,
        };
        (pose, tensions)
    }

    fn anchors(&self) -> [Vector2<f64>; 2] {
        [Vector2::new(self.half_span, 0.0), Vector2::new(-self.half_span, 0.0)]
    }
}

fn cross2(p: &Vector2<f64>, q: &Vector2<f64>) -> f64 {
    p.x * q.y - p.y * q.x
}

/// Gradient of `cross2(p, q)` with respect to `p`.
fn perp(q: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(q.y, -q.x)
}

fn points(x: &DVector<f64>) -> [Vector2<f64>; 3] {
    [
        Vector2::new(x[0], x[1]),
        Vector2::new(x[2], x[3]),
        Vector2::new(x[4], x[5]),
    ]
}

impl SquareSystem for PlanarSystem {
    fn dim(&self) -> usize {
        8
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let [p1, p4, c] = points(x);
        let [a1, a4] = self.anchors();
        let (t1, t4) = (x[6], x[7]);
        let (c1, c4) = (p1 - a1, p4 - a4);
        let (u1, u4) = (c1.normalize(), c4.normalize());
        let force = u1 * t1 + u4 * t4 + Vector2::new(0.0, 1.0);
        let torque = cross2(&(p1 - c), &u1) * t1 + cross2(&(p4 - c), &u4) * t4;
        DVector::from_vec(vec![
            c1.norm() - self.near_length,
            c4.norm() - self.far_length,
            (p1 - p4).norm() - 2.0 * self.half_span,
            (c - p1).norm() - self.near_radius,
            (c - p4).norm() - self.far_radius,
            force.x,
            force.y,
            torque,
        ])
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let [p1, p4, c] = points(x);
        let [a1, a4] = self.anchors();
        let mut jac = DMatrix::zeros(8, 8);
        let put = |jac: &mut DMatrix<f64>, row: usize, col: usize, g: Vector2<f64>| {
            jac[(row, col)] += g.x;
            jac[(row, col + 1)] += g.y;
        };
        // point blocks: near 0, far 2, centre 4
        let e = (p1 - p4).normalize();
        let f1 = (c - p1).normalize();
        let f4 = (c - p4).normalize();
        put(&mut jac, 2, 0, e);
        put(&mut jac, 2, 2, -e);
        put(&mut jac, 3, 4, f1);
        put(&mut jac, 3, 0, -f1);
        put(&mut jac, 4, 4, f4);
        put(&mut jac, 4, 2, -f4);

        let cables = [(p1, a1, 0usize, 6usize), (p4, a4, 2, 7)];
        for (row, (p, a, block, col)) in cables.into_iter().enumerate() {
            let cable = p - a;
            let len = cable.norm();
            let u = cable / len;
            let t = x[col];
            let proj = (Matrix2::identity() - u * u.transpose()) / len;
            let lever = p - c;
            put(&mut jac, row, block, u);
            // force rows
            let d_force = proj * t;
            for r in 0..2 {
                jac[(5 + r, block)] += d_force[(r, 0)];
                jac[(5 + r, block + 1)] += d_force[(r, 1)];
                jac[(5 + r, col)] = u[r];
            }
            // moment row
            let d_lever = perp(&u);
            let d_dir = proj.transpose() * Vector2::new(-lever.y, lever.x);
            put(&mut jac, 7, block, (d_lever + d_dir) * t);
            put(&mut jac, 7, 4, -d_lever * t);
            jac[(7, col)] = cross2(&lever, &u);
        }
        Some(jac)
    }
}

/// Planar guess: the level pose at the mean of the two lengths with the load
/// split evenly between the two collapsed cables.
pub fn planar_guess(near_length: f64, far_length: f64, cfg: &MechanismConfig) -> (PlanarPose, PlanarTensions) {
    let l = 0.5 * (near_length + far_length);
    let b = cfg.b;
    let pose = PlanarPose {
        near: [b, -l],
        far: [-b, -l],
        centre: [cfg.k2 * b, -l - cfg.h],
    };
    let half = 0.5 * cfg.weight();
    (pose, PlanarTensions { near: half, far: half })
}

/// Solves the planar pose for an adjacent-equal length pattern.
pub fn planar_fk(
    configuration: AdjacentEqual,
    lengths: &CableLengths,
    cfg: &MechanismConfig,
    options: &SolverOptions,
) -> Result<PlanarSolution> {
    let work = working_config(configuration, cfg);
    let (near, far) = (lengths.get(0), lengths.get(2));
    let system = PlanarSystem::new(near, far, &work);
    let (pose, tensions) = planar_guess(near, far, &work);
    let report = nls::solve(&system, &system.pack(&pose, &tensions), options)?;
    if !report.converged {
        return Err(FkError::SolverFailed(format!(
            "planar solve stopped ({:?}) after {} iterations with residual {:.3e}",
            report.termination, report.iterations, report.residual_norm
        )));
    }
    let (pose, tensions) = system.unpack(&report.solution);
    Ok(PlanarSolution {
        configuration,
        pose,
        tensions,
        report,
    })
}

/// Lifts a planar pose back to the mechanism frame.
pub fn lift_to_3d(planar: &PlanarPose, configuration: AdjacentEqual, cfg: &MechanismConfig) -> PlatformPose {
    let work = working_config(configuration, cfg);
    let [y1, z1] = planar.near;
    let [y4, z4] = planar.far;
    let [yc, zc] = planar.centre;
    let a = work.a;
    let b1 = Vec3::new(a, y1, z1);
    let b2 = Vec3::new(-a, y1, z1);
    let b3 = Vec3::new(-a, y4, z4);
    let b4 = Vec3::new(a, y4, z4);
    let c = Vec3::new(work.k1 * a, yc, zc);
    match configuration {
        AdjacentEqual::OneTwoThreeFour => PlatformPose::new(b1, b2, b3, c),
        AdjacentEqual::OneFourTwoThree => {
            let swap = |p: Vec3| Vec3::new(p.y, p.x, p.z);
            // working cable 4 is cable 2 of the mechanism
            PlatformPose::new(swap(b1), swap(b4), swap(b3), swap(c))
        }
    }
}

/// Projection of a pose onto the symmetry plane of `configuration`.
pub fn project(pose: &PlatformPose, configuration: AdjacentEqual) -> PlanarPose {
    let along = |p: &Vec3| match configuration {
        AdjacentEqual::OneTwoThreeFour => [p.y, p.z],
        AdjacentEqual::OneFourTwoThree => [p.x, p.z],
    };
    PlanarPose {
        near: along(&pose.b1),
        far: along(&pose.b3),
        centre: along(&pose.c),
    }
}

/// Minimum-norm tensions `T = (Jᵀ)⁺·F` at `pose`.
///
/// Components within `1e-9·mg` below zero are clamped to zero; larger
/// negative components are left for the caller to reject.
pub fn tensions_by_pseudoinverse(pose: &PlatformPose, cfg: &MechanismConfig) -> Result<TensionVector> {
    let jt = structure_matrix(pose, cfg)?;
    let svd = jt.matrix().svd(true, true);
    let cutoff = PSEUDOINVERSE_CUTOFF * svd.singular_values.max();
    let pinv = svd
        .pseudo_inverse(cutoff)
        .map_err(|e| FkError::SolverFailed(format!("pseudoinverse: {e}")))?;
    let f = gravity_wrench(cfg);
    let t = pinv * f;
    let w = cfg.weight();
    let mut tensions = [t[0], t[1], t[2], t[3]];
    for v in &mut tensions {
        if *v < 0.0 && *v >= -1e-9 * w {
            *v = 0.0;
        }
    }
    let tensions = TensionVector(tensions);
    let r: Vector6<f64> = jt.wrench(&tensions) - f;
    let scaled = r.fixed_rows::<3>(0).norm() / w + r.fixed_rows::<3>(3).norm() / (w * cfg.a);
    if scaled > PSEUDOINVERSE_RESIDUAL {
        return Err(FkError::RankCollapse { residual: scaled });
    }
    Ok(tensions)
}
