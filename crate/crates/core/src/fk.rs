//! Forward-kinematics residual system for an assumed set of taut cables.
//!
//! Unknowns are the twelve pose coordinates followed by one tension per taut
//! cable; equations are the six rigid-body distances, one length equation per
//! taut cable and the six equilibrium rows. The system is solved in
//! nondimensional form: lengths divided by `a`, forces by `mg`, torques by
//! `mg·a`.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::config::MechanismConfig;
use crate::geometry::{skew, CableLengths, PlatformPose, TautSet, TensionVector, Vec3};
use crate::nls::SquareSystem;

#[derive(Debug, Clone)]
pub struct FkSystem {
    taut: TautSet,
    cfg: MechanismConfig,
    members: Vec<usize>,
    // scaled geometry (unit length = a)
    anchors: [Vec3; 4],
    lengths: [f64; 4],
    side_a: f64,
    side_b: f64,
    diagonal: f64,
    radii: [f64; 3],
}

/// Builds the residual system for `taut`. Construction always succeeds.
pub fn fk_residual_system(taut: TautSet, lengths: &CableLengths, cfg: &MechanismConfig) -> FkSystem {
    FkSystem::new(taut, lengths, cfg)
}

impl FkSystem {
    pub fn new(taut: TautSet, lengths: &CableLengths, cfg: &MechanismConfig) -> Self {
        let s = 1.0 / cfg.a;
        Self {
            taut,
            cfg: *cfg,
            members: taut.members().collect(),
            anchors: cfg.anchors().map(|p| p * s),
            lengths: lengths.as_array().map(|l| l * s),
            side_a: 2.0,
            side_b: 2.0 * cfg.b * s,
            diagonal: cfg.diagonal() * s,
            radii: [cfg.r1() * s, cfg.r2() * s, cfg.r3() * s],
        }
    }

    pub fn taut(&self) -> TautSet {
        self.taut
    }

    pub fn config(&self) -> &MechanismConfig {
        &self.cfg
    }

    /// Scaled unknown vector for a pose and tension vector. Tensions of slack
    /// cables are dropped.
    pub fn pack(&self, pose: &PlatformPose, tensions: &TensionVector) -> Vec<f64> {
        let s = 1.0 / self.cfg.a;
        let mut x: Vec<f64> = pose.coordinates().iter().map(|v| v * s).collect();
        let w = self.cfg.weight();
        x.extend(self.members.iter().map(|&i| tensions.get(i) / w));
        x
    }

    pub fn unpack(&self, x: &[f64]) -> (PlatformPose, TensionVector) {
        let coords: Vec<f64> = x[..12].iter().map(|v| v * self.cfg.a).collect();
        let pose = PlatformPose::from_coordinates(&coords);
        let w = self.cfg.weight();
        let mut t = [0.0; 4];
        for (k, &i) in self.members.iter().enumerate() {
            t[i] = x[12 + k] * w;
        }
        (pose, TensionVector(t))
    }

    /// Scaled residual at a physical pose and tension vector.
    pub fn residual_at(&self, pose: &PlatformPose, tensions: &TensionVector) -> Vec<f64> {
        let x = DVector::from_vec(self.pack(pose, tensions));
        self.residual(&x).as_slice().to_vec()
    }

    fn points(x: &DVector<f64>) -> [Vec3; 5] {
        let p = |k: usize| Vec3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
        let (b1, b2, b3, c) = (p(0), p(1), p(2), p(3));
        [b1, b2, b3, b1 - b2 + b3, c]
    }
}

/// Coefficients of `B1, B2, B3` in attachment point `i` (only `B4` mixes).
const CORNER_COEFFS: [[f64; 3]; 4] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, -1.0, 1.0],
];

impl SquareSystem for FkSystem {
    fn dim(&self) -> usize {
        12 + self.members.len()
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let b = Self::points(x);
        let (b1, b2, b3, c) = (b[0], b[1], b[2], b[4]);
        let k = self.members.len();
        let mut r = DVector::zeros(12 + k);
        r[0] = (b1 - b2).norm() - self.side_a;
        r[1] = (b2 - b3).norm() - self.side_b;
        r[2] = (b1 - b3).norm() - self.diagonal;
        r[3] = (c - b1).norm() - self.radii[0];
        r[4] = (c - b2).norm() - self.radii[1];
        r[5] = (c - b3).norm() - self.radii[2];

        let mut force = Vec3::new(0.0, 0.0, 1.0);
        let mut torque = Vec3::zeros();
        for (slot, &i) in self.members.iter().enumerate() {
            let cable = b[i] - self.anchors[i];
            let len = cable.norm();
            r[6 + slot] = len - self.lengths[i];
            let u = cable / len;
            let t = x[12 + slot];
            force += u * t;
            torque += (b[i] - c).cross(&u) * t;
        }
        r.fixed_rows_mut::<3>(6 + k).copy_from(&force);
        r.fixed_rows_mut::<3>(9 + k).copy_from(&torque);
        r
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let b = Self::points(x);
        let c = b[4];
        let k = self.members.len();
        let n = 12 + k;
        let mut jac = DMatrix::zeros(n, n);

        // distance rows: (row, first point block, second point block)
        let pairs = [(0, 0, 1), (1, 1, 2), (2, 0, 2), (3, 3, 0), (4, 3, 1), (5, 3, 2)];
        for (row, p, q) in pairs {
            let e = (b_block(&b, p) - b_block(&b, q)).normalize();
            add_row(&mut jac, row, 3 * p, &e, 1.0);
            add_row(&mut jac, row, 3 * q, &e, -1.0);
        }

        let force_row = 6 + k;
        let torque_row = 9 + k;
        for (slot, &i) in self.members.iter().enumerate() {
            let cable = b[i] - self.anchors[i];
            let len = cable.norm();
            let u = cable / len;
            let t = x[12 + slot];
            let lever = b[i] - c;
            let proj = (Matrix3::identity() - u * u.transpose()) / len;

            let d_force = proj * t;
            let d_torque = (-skew(&u) + skew(&lever) * proj) * t;
            for (block, &coef) in CORNER_COEFFS[i].iter().enumerate() {
                if coef == 0.0 {
                    continue;
                }
                add_row(&mut jac, 6 + slot, 3 * block, &u, coef);
                add_block(&mut jac, force_row, 3 * block, &d_force, coef);
                add_block(&mut jac, torque_row, 3 * block, &d_torque, coef);
            }
            add_block(&mut jac, torque_row, 9, &(skew(&u) * t), 1.0);

            let col = 12 + slot;
            for r in 0..3 {
                jac[(force_row + r, col)] = u[r];
                jac[(torque_row + r, col)] = lever.cross(&u)[r];
            }
        }
        Some(jac)
    }
}

fn b_block(points: &[Vec3; 5], block: usize) -> Vec3 {
    // blocks 0..3 are B1, B2, B3, C
    if block == 3 {
        points[4]
    } else {
        points[block]
    }
}

fn add_row(jac: &mut DMatrix<f64>, row: usize, col: usize, v: &Vec3, scale: f64) {
    for j in 0..3 {
        jac[(row, col + j)] += scale * v[j];
    }
}

fn add_block(jac: &mut DMatrix<f64>, row: usize, col: usize, m: &Matrix3<f64>, scale: f64) {
    for i in 0..3 {
        for j in 0..3 {
            jac[(row + i, col + j)] += scale * m[(i, j)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nls::{jacobian, JacobianMode};
    use nalgebra::{Rotation3, Unit};

    fn reference() -> MechanismConfig {
        MechanismConfig::default()
    }

    #[test]
    fn system_dimensions() {
        let l = CableLengths::new([20.0; 4]).unwrap();
        let s = fk_residual_system(TautSet::from_indices(&[0, 1, 2]).unwrap(), &l, &reference());
        assert_eq!(s.dim(), 15);
        assert_eq!(s.residual(&DVector::from_element(15, 0.3)).len(), 15);
        let s = fk_residual_system(TautSet::ALL, &l, &reference());
        assert_eq!(s.dim(), 16);
        let s = fk_residual_system(TautSet::from_indices(&[3]).unwrap(), &l, &reference());
        assert_eq!(s.dim(), 13);
    }

    #[test]
    fn pack_unpack_round_trip() {
        let cfg = reference();
        let l = CableLengths::new([20.0, 20.1, 20.2, 20.3]).unwrap();
        let s = fk_residual_system(TautSet::from_indices(&[1, 3]).unwrap(), &l, &cfg);
        let rot = Rotation3::from_euler_angles(0.01, -0.02, 0.3);
        let pose = PlatformPose::from_frame(&rot, &Vec3::new(0.1, 0.2, -20.0), &cfg);
        let t = TensionVector([0.0, 1234.5, 0.0, 999.0]);
        let (p2, t2) = s.unpack(&s.pack(&pose, &t));
        assert!(pose.max_abs_difference(&p2) < 1e-12);
        assert!((t2.get(1) - 1234.5).abs() < 1e-9);
        assert_eq!(t2.get(0), 0.0);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let cfg = reference();
        let l = CableLengths::new([20.3, 20.1, 20.5, 20.2]).unwrap();
        let axis = Unit::new_normalize(Vec3::new(0.3, -1.0, 0.2));
        let rot = Rotation3::from_axis_angle(&axis, 0.15);
        let mut pose = PlatformPose::from_frame(&rot, &Vec3::new(0.2, -0.1, -20.1), &cfg);
        // break rigidity slightly so that no term vanishes by symmetry
        pose.b2.x += 0.01;
        pose.c.y -= 0.02;
        let t = TensionVector([2.0e4, 3.0e4, 1.5e4, 3.5e4]);
        for mask in 1u8..16 {
            let taut = TautSet::from_mask(mask).unwrap();
            let s = FkSystem::new(taut, &l, &cfg);
            let x = DVector::from_vec(s.pack(&pose, &t));
            let analytic = s.jacobian(&x).unwrap();
            let fd = jacobian(&s, &x, JacobianMode::ForwardDifference { step: 1e-7 }).unwrap();
            let err = (analytic - fd).amax();
            assert!(err < 1e-5, "taut {taut}: max diff {err}");
        }
    }

    #[test]
    fn level_pose_with_even_tensions_is_a_root_of_the_four_cable_system() {
        let cfg = reference();
        let l = CableLengths::new([20.0; 4]).unwrap();
        let pose = PlatformPose::from_frame(&Rotation3::identity(), &Vec3::new(0.0, 0.0, -20.0), &cfg);
        let w = cfg.weight();
        let t = TensionVector([0.3625 * w, 0.2375 * w, 0.1375 * w, 0.2625 * w]);
        let s = FkSystem::new(TautSet::ALL, &l, &cfg);
        let r = s.residual_at(&pose, &t);
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
    }
}
