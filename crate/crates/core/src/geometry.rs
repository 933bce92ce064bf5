//! Poses, cable quantities and the constraint residuals shared by every
//! solver path.
//!
//! Cable indices are 0-based in code (`0..4` ↔ cables 1–4). Everything that
//! faces users (display, JSON, CLI) prints them 1-based.

use std::fmt;

use nalgebra::{Matrix3, Matrix6x4, Rotation3, Vector6};
use serde::{Deserialize, Serialize};

use crate::config::MechanismConfig;
use crate::error::{FkError, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Fourth corner of the attachment rectangle, `B4 = B1 − B2 + B3`.
pub fn fourth_corner(b1: &Vec3, b2: &Vec3, b3: &Vec3) -> Vec3 {
    b1 - b2 + b3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CableLengths(pub [f64; 4]);

impl CableLengths {
    pub fn new(lengths: [f64; 4]) -> Result<Self> {
        for (i, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(FkError::InvalidLength {
                    cable: i + 1,
                    value: l,
                });
            }
        }
        Ok(Self(lengths))
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn average(&self) -> f64 {
        self.0.iter().sum::<f64>() / 4.0
    }

    /// True when every length equals the first within relative tolerance `rel`.
    pub fn all_equal(&self, rel: f64) -> bool {
        self.0.iter().all(|&l| nearly_equal(l, self.0[0], rel))
    }

    /// Index of the shortest cable; ties go to the lowest index.
    pub fn shortest(&self) -> usize {
        let mut best = 0;
        for i in 1..4 {
            if self.0[i] < self.0[best] {
                best = i;
            }
        }
        best
    }
}

pub(crate) fn nearly_equal(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * x.abs().max(y.abs())
}

/// Platform pose: attachment points `B1, B2, B3` and the centre of gravity
/// `C`, all in the inertial frame. `B4` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformPose {
    pub b1: Vec3,
    pub b2: Vec3,
    pub b3: Vec3,
    pub c: Vec3,
}

impl PlatformPose {
    pub fn new(b1: Vec3, b2: Vec3, b3: Vec3, c: Vec3) -> Self {
        Self { b1, b2, b3, c }
    }

    /// Places the rigid platform with `world = rotation · local + origin`,
    /// where `local` are platform-frame coordinates.
    pub fn from_frame(rotation: &Rotation3<f64>, origin: &Vec3, cfg: &MechanismConfig) -> Self {
        let place = |p: Vec3| rotation * p + origin;
        Self {
            b1: place(cfg.local_attachment(0)),
            b2: place(cfg.local_attachment(1)),
            b3: place(cfg.local_attachment(2)),
            c: place(cfg.local_centre()),
        }
    }

    pub fn b4(&self) -> Vec3 {
        fourth_corner(&self.b1, &self.b2, &self.b3)
    }

    pub fn attachments(&self) -> [Vec3; 4] {
        [self.b1, self.b2, self.b3, self.b4()]
    }

    /// Upward normal of the attachment plane for an upright platform,
    /// `(B2 − B1) × (B3 − B2)`, normalised.
    pub fn normal(&self) -> Vec3 {
        (self.b2 - self.b1).cross(&(self.b3 - self.b2)).normalize()
    }

    /// Signed distance of `C` from the attachment plane along [`Self::normal`].
    /// Equals `−h` for a rigid, correctly handed platform.
    pub fn centre_offset(&self) -> f64 {
        (self.c - self.b1).dot(&self.normal())
    }

    /// The twelve coordinates in the row order B1x, B1y, B1z, …, Cz.
    pub fn coordinates(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, p) in [self.b1, self.b2, self.b3, self.c].iter().enumerate() {
            out[3 * k..3 * k + 3].copy_from_slice(p.as_slice());
        }
        out
    }

    pub fn from_coordinates(x: &[f64]) -> Self {
        let p = |k: usize| Vec3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
        Self::new(p(0), p(1), p(2), p(3))
    }

    pub fn max_abs_difference(&self, other: &PlatformPose) -> f64 {
        self.coordinates()
            .iter()
            .zip(other.coordinates().iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Set of taut cables, stored as a 4-bit mask (bit `i` ↔ cable `i + 1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TautSet(u8);

impl TautSet {
    pub const ALL: TautSet = TautSet(0b1111);

    /// Builds a set from 0-based indices. Returns `None` for an empty set or
    /// out-of-range index.
    pub fn from_indices(indices: &[usize]) -> Option<Self> {
        let mut mask = 0u8;
        for &i in indices {
            if i >= 4 {
                return None;
            }
            mask |= 1 << i;
        }
        (mask != 0).then_some(Self(mask))
    }

    pub fn from_mask(mask: u8) -> Option<Self> {
        (mask != 0 && mask < 16).then_some(Self(mask))
    }

    pub fn mask(&self) -> u8 {
        self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 4 && self.0 & (1 << i) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Taut cables in increasing order (0-based).
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..4).filter(move |&i| self.contains(i))
    }

    pub fn slack(&self) -> impl Iterator<Item = usize> + '_ {
        (0..4).filter(move |&i| !self.contains(i))
    }

    /// 1-based cable numbers, as printed to users.
    pub fn cable_numbers(&self) -> Vec<usize> {
        self.members().map(|i| i + 1).collect()
    }
}

impl fmt::Debug for TautSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TautSet{:?}", self.cable_numbers())
    }
}

impl fmt::Display for TautSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Cable tensions τ1..τ4 (N).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TensionVector(pub [f64; 4]);

impl TensionVector {
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn as_vector(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::from(self.0)
    }
}

/// `Jᵀ`: column `i` is `[uᵢ ; CBᵢ × uᵢ]`, with `uᵢ` the unit vector from
/// `Aᵢ` to `Bᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureMatrix(pub Matrix6x4<f64>);

impl StructureMatrix {
    pub fn matrix(&self) -> &Matrix6x4<f64> {
        &self.0
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> [f64; 4] {
        let mut s: Vec<f64> = self.0.singular_values().iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        [s[0], s[1], s[2], s[3]]
    }

    pub fn wrench(&self, tensions: &TensionVector) -> Vector6<f64> {
        self.0 * tensions.as_vector()
    }
}

/// `|AᵢBᵢ|` for the four cables.
pub fn anchor_distances(pose: &PlatformPose, cfg: &MechanismConfig) -> [f64; 4] {
    let b = pose.attachments();
    [0, 1, 2, 3].map(|i| (b[i] - cfg.anchor(i)).norm())
}

/// Rigid-body residuals (m): `|B1B2| − 2a`, `|B2B3| − 2b`, `|B1B3| − diag`,
/// `|CB1| − r1`, `|CB2| − r2`, `|CB3| − r3`.
pub fn geometric_residuals(pose: &PlatformPose, cfg: &MechanismConfig) -> [f64; 6] {
    let PlatformPose { b1, b2, b3, c } = pose;
    [
        (b1 - b2).norm() - 2.0 * cfg.a,
        (b2 - b3).norm() - 2.0 * cfg.b,
        (b1 - b3).norm() - cfg.diagonal(),
        (c - b1).norm() - cfg.r1(),
        (c - b2).norm() - cfg.r2(),
        (c - b3).norm() - cfg.r3(),
    ]
}

pub fn structure_matrix(pose: &PlatformPose, cfg: &MechanismConfig) -> Result<StructureMatrix> {
    let b = pose.attachments();
    let mut jt = Matrix6x4::zeros();
    for (i, bi) in b.iter().enumerate() {
        let cable = bi - cfg.anchor(i);
        let len = cable.norm();
        if len == 0.0 {
            return Err(FkError::ZeroLengthCable { cable: i + 1 });
        }
        let u = cable / len;
        let moment = (bi - pose.c).cross(&u);
        jt.fixed_view_mut::<3, 1>(0, i).copy_from(&u);
        jt.fixed_view_mut::<3, 1>(3, i).copy_from(&moment);
    }
    Ok(StructureMatrix(jt))
}

/// External wrench from gravity, `[0, 0, −mg, 0, 0, 0]`.
pub fn gravity_wrench(cfg: &MechanismConfig) -> Vector6<f64> {
    Vector6::new(0.0, 0.0, -cfg.weight(), 0.0, 0.0, 0.0)
}

/// `Jᵀ·T − F` in N (rows 1–3) and N·m (rows 4–6).
pub fn equilibrium_residual(
    pose: &PlatformPose,
    tensions: &TensionVector,
    cfg: &MechanismConfig,
) -> Result<[f64; 6]> {
    let jt = structure_matrix(pose, cfg)?;
    let r = jt.wrench(tensions) - gravity_wrench(cfg);
    Ok([r[0], r[1], r[2], r[3], r[4], r[5]])
}

/// Cross-product matrix: `skew(v) · w = v × w`.
pub(crate) fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
