//! Detection of single-cable suspension.
//!
//! When one cable is much shorter than the others it may carry the whole
//! platform alone. The platform then hangs with anchor, attachment point and
//! centre of gravity on one plumb line and is free to spin about that line
//! within whatever range the three slack cables allow. The spin range `φ` is
//! computed here; a nonempty `φ` means the pose is not determined by the
//! cable lengths.
//!
//! Each slack cable's spin angle is measured from the configuration in which
//! that cable reaches its minimal critical length (its attachment point
//! nearest to its anchor). For the cable beside the suspension cable along
//! the `a` side this is exactly the shared initial pose; for the other two it
//! differs from the shared pose by a constant phase, available as
//! [`SlackCable::shared_offset`] and used by [`shared_frame_range`].
//!
//! The closed-form initial pose is derived for cable 1 carrying the load.
//! Other suspension cables are handled by mapping the mechanism through the
//! rectangle's symmetries onto that case and mapping the resulting points
//! back, so every angle reported here is measured in the caller's frame.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use crate::config::MechanismConfig;
use crate::error::{FkError, Result};
use crate::geometry::{CableLengths, PlatformPose, Vec3};

/// Width below which a root bracket is considered resolved (rad).
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// Symmetry of the anchor rectangle used to relabel cables so that the
/// suspension cable becomes cable 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    Identity,
    /// x → −x; swaps cables 1↔2 and 3↔4.
    MirrorX,
    /// (x, y) → (−x, −y); swaps 1↔3 and 2↔4.
    HalfTurn,
    /// y → −y; swaps 1↔4 and 2↔3.
    MirrorY,
}

impl Symmetry {
    fn mapping_to_first(cable: usize) -> Self {
        match cable {
            0 => Self::Identity,
            1 => Self::MirrorX,
            2 => Self::HalfTurn,
            3 => Self::MirrorY,
            _ => panic!("cable index {cable} out of range"),
        }
    }

    /// Every element is an involution, so the same map works both ways.
    fn cable(self, i: usize) -> usize {
        match self {
            Self::Identity => i,
            Self::MirrorX => [1, 0, 3, 2][i],
            Self::HalfTurn => [2, 3, 0, 1][i],
            Self::MirrorY => [3, 2, 1, 0][i],
        }
    }

    fn signs(self) -> (f64, f64) {
        match self {
            Self::Identity => (1.0, 1.0),
            Self::MirrorX => (-1.0, 1.0),
            Self::HalfTurn => (-1.0, -1.0),
            Self::MirrorY => (1.0, -1.0),
        }
    }

    fn point(self, p: &Vec3) -> Vec3 {
        let (sx, sy) = self.signs();
        Vec3::new(sx * p.x, sy * p.y, p.z)
    }

    fn config(self, cfg: &MechanismConfig) -> MechanismConfig {
        let (sx, sy) = self.signs();
        MechanismConfig {
            k1: sx * cfg.k1,
            k2: sy * cfg.k2,
            ..*cfg
        }
    }
}

/// Circle traced by a slack cable's attachment point while the platform
/// spins about the suspension cable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackCable {
    pub cable: usize,
    /// Distance from the attachment point to the suspension line (m).
    pub radius: f64,
    /// Azimuth of the normal vector at this cable's reference configuration,
    /// i.e. pointing from the suspension line towards the cable's anchor (rad).
    pub phase: f64,
    /// Azimuth of the normal vector at the shared initial pose (rad).
    pub initial_phase: f64,
    /// Height of the attachment point, constant during the spin (m).
    pub height: f64,
}

impl SlackCable {
    /// Spin angle, in this cable's reference frame, of the shared initial
    /// pose.
    pub fn shared_offset(&self) -> f64 {
        (self.initial_phase - self.phase).rem_euclid(TAU)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationRigidBody {
    pub suspension: usize,
    /// Attachment point of the suspension cable, directly below its anchor.
    pub pivot: Vec3,
    pub initial_pose: PlatformPose,
    pub slack: [SlackCable; 3],
    anchors: [Vec3; 4],
}

impl RotationRigidBody {
    pub fn slack_cable(&self, cable: usize) -> Option<&SlackCable> {
        self.slack.iter().find(|s| s.cable == cable)
    }

    /// Position of slack attachment point `cable` after a counter-clockwise
    /// spin by `theta` about the suspension line, measured from the cable's
    /// reference configuration.
    pub fn attachment_at(&self, cable: usize, theta: f64) -> Vec3 {
        let s = self
            .slack_cable(cable)
            .unwrap_or_else(|| panic!("cable {} is the suspension cable", cable + 1));
        let angle = s.phase + theta;
        Vec3::new(
            self.pivot.x + s.radius * angle.cos(),
            self.pivot.y + s.radius * angle.sin(),
            s.height,
        )
    }

    pub fn anchor(&self, cable: usize) -> Vec3 {
        self.anchors[cable]
    }
}

/// `|A_j B_j(θ)|`.
pub fn cable_distance_curve(body: &RotationRigidBody, cable: usize, theta: f64) -> f64 {
    (body.anchor(cable) - body.attachment_at(cable, theta)).norm()
}

/// Initial spin pose: the suspension cable plumb and the neighbouring cable
/// along the `a` side coplanar with it, at its minimal critical length.
pub fn initial_pose_under_single_cable(
    shortest: usize,
    lengths: &CableLengths,
    cfg: &MechanismConfig,
) -> Result<RotationRigidBody> {
    build_body(shortest, lengths.get(shortest), cfg)
}

fn build_body(shortest: usize, l_short: f64, cfg: &MechanismConfig) -> Result<RotationRigidBody> {
    let sym = Symmetry::mapping_to_first(shortest);
    let canon = sym.config(cfg);
    let pose = canonical_initial_pose(l_short, &canon)?;

    let canon_points = pose.attachments();
    let mut points = [Vec3::zeros(); 4];
    for (i, p) in canon_points.iter().enumerate() {
        points[sym.cable(i)] = sym.point(p);
    }
    let initial_pose = PlatformPose::new(points[0], points[1], points[2], sym.point(&pose.c));

    let anchor = cfg.anchor(shortest);
    let pivot = points[shortest];
    let line = anchor - pivot;
    let mut slack = Vec::with_capacity(3);
    for j in (0..4).filter(|&j| j != shortest) {
        let to_point = points[j] - pivot;
        let foot = pivot + line * (line.dot(&to_point) / line.norm_squared());
        let normal = points[j] - foot;
        let toward_anchor = cfg.anchor(j) - pivot;
        slack.push(SlackCable {
            cable: j,
            radius: normal.norm(),
            phase: toward_anchor.y.atan2(toward_anchor.x),
            initial_phase: normal.y.atan2(normal.x),
            height: points[j].z,
        });
    }
    Ok(RotationRigidBody {
        suspension: shortest,
        pivot,
        initial_pose,
        slack: [slack[0], slack[1], slack[2]],
        anchors: cfg.anchors(),
    })
}

/// Initial pose with cable 1 carrying the platform.
fn canonical_initial_pose(l1: f64, cfg: &MechanismConfig) -> Result<PlatformPose> {
    let (a, b) = (cfg.a, cfg.b);
    let (r1, r2) = (cfg.r1(), cfg.r2());
    let dz = (r2 * r2 - 4.0 * a * a - r1 * r1) / (2.0 * r1);
    let arg = 4.0 * a * a - dz * dz;
    if !(arg > 1e-12 * a * a) {
        return Err(FkError::GeometryInfeasible(format!(
            "square-root argument 4a² − z² = {arg:.3e} is not positive"
        )));
    }
    let b1 = Vec3::new(a, b, -l1);
    let c = Vec3::new(a, b, -l1 - r1);
    let b2 = Vec3::new(a - arg.sqrt(), b, dz - l1);

    let rotation = frame(&b1, &b2, &c) * frame(&cfg.local_attachment(0), &cfg.local_attachment(1), &cfg.local_centre()).transpose();
    let rotation = Rotation3::from_matrix_unchecked(rotation);
    let origin = b1 - rotation * cfg.local_attachment(0);
    Ok(PlatformPose::from_frame(&rotation, &origin, cfg))
}

/// Orthonormal frame spanned by `p → q` and the component of `p → r`
/// orthogonal to it.
fn frame(p: &Vec3, q: &Vec3, r: &Vec3) -> Matrix3<f64> {
    let e1 = (q - p).normalize();
    let w = r - p;
    let e2 = (w - e1 * e1.dot(&w)).normalize();
    let e3 = e1.cross(&e2);
    Matrix3::from_columns(&[e1, e2, e3])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLength {
    pub cable: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLengths(pub [CriticalLength; 3]);

impl CriticalLengths {
    pub fn get(&self, cable: usize) -> Option<&CriticalLength> {
        self.0.iter().find(|c| c.cable == cable)
    }
}

impl RotationRigidBody {
    /// Extremes of `|A_j B_j(θ)|` over a full turn. The attachment point moves
    /// on a horizontal circle, so the extremes are where the circle is
    /// nearest to and farthest from the anchor's vertical.
    pub fn critical_lengths(&self) -> CriticalLengths {
        CriticalLengths(self.slack.map(|s| {
            let anchor = self.anchor(s.cable);
            let horizontal = (anchor.x - self.pivot.x).hypot(anchor.y - self.pivot.y);
            let dz = anchor.z - s.height;
            CriticalLength {
                cable: s.cable,
                min: (horizontal - s.radius).hypot(dz),
                max: (horizontal + s.radius).hypot(dz),
            }
        }))
    }
}

pub fn critical_lengths(shortest: usize, l_short: f64, cfg: &MechanismConfig) -> Result<CriticalLengths> {
    Ok(build_body(shortest, l_short, cfg)?.critical_lengths())
}

/// A union of disjoint closed angle intervals inside `[0, 2π]`. A range that
/// wraps through zero is stored as two intervals touching `0` and `2π`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RotationalRange {
    intervals: Vec<(f64, f64)>,
}

impl RotationalRange {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self {
            intervals: vec![(0.0, TAU)],
        }
    }

    /// Normalises arbitrary intervals: clips to `[0, 2π]`, sorts and merges
    /// overlapping or touching pieces.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(lo, hi)| lo <= hi);
        for iv in raw.iter_mut() {
            iv.0 = iv.0.clamp(0.0, TAU);
            iv.1 = iv.1.clamp(0.0, TAU);
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| theta >= lo && theta <= hi)
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn intersect(&self, other: &RotationalRange) -> RotationalRange {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a_lo, a_hi) = self.intervals[i];
            let (b_lo, b_hi) = other.intervals[j];
            let lo = a_lo.max(b_lo);
            let hi = a_hi.min(b_hi);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a_hi < b_hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { intervals: out }
    }

    /// The set `{θ : θ + delta ∈ self}` folded back into `[0, 2π]`.
    pub fn shifted(&self, delta: f64) -> RotationalRange {
        let mut raw = Vec::new();
        for &(lo, hi) in &self.intervals {
            let lo = lo - delta;
            let hi = hi - delta;
            for k in -2..=2 {
                let off = k as f64 * TAU;
                raw.push(((lo + off).max(0.0), (hi + off).min(TAU)));
            }
        }
        raw.retain(|(lo, hi)| lo <= hi);
        Self::from_intervals(raw)
    }

    /// Open gaps between consecutive intervals (not including wrap-around).
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        let mut gaps = Vec::new();
        let mut cursor = 0.0;
        for &(lo, hi) in &self.intervals {
            if lo > cursor {
                gaps.push((cursor, lo));
            }
            cursor = hi;
        }
        if cursor < TAU {
            gaps.push((cursor, TAU));
        }
        gaps
    }
}

/// Isolates the zeros of `f` on `[lo, hi]` by interval subdivision.
///
/// `lipschitz` bounds `|f'|`, so on a sub-interval of width `w` centred at
/// `m`, `f` lies in `f(m) ± lipschitz·w/2`. Sub-intervals whose enclosure
/// excludes zero are discarded; the rest are bisected until narrower than
/// `tol`. Adjacent surviving pieces are merged into one root estimate, which
/// covers tangential (double) roots.
pub fn isolate_roots<F: Fn(f64) -> f64>(f: F, lipschitz: f64, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() > 0.5 * lipschitz * (b - a) {
            continue;
        }
        if b - a <= tol {
            pieces.push((a, b));
            continue;
        }
        // push right first so pieces come out in increasing order
        stack.push((mid, b));
        stack.push((a, mid));
    }
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for (a, b) in pieces {
        match clusters.last_mut() {
            Some(last) if a <= last.1 + tol => last.1 = b,
            _ => clusters.push((a, b)),
        }
    }
    clusters
        .into_iter()
        .map(|(a, b)| {
            // inside a cluster, pick the point of smallest |f|
            let n = 16;
            (0..=n)
                .map(|k| a + (b - a) * k as f64 / n as f64)
                .min_by(|x, y| f(*x).abs().total_cmp(&f(*y).abs()))
                .unwrap()
        })
        .collect()
}

/// Spin range permitted by one slack cable of length `length`.
pub fn cable_rotational_range(body: &RotationRigidBody, cable: usize, length: f64) -> RotationalRange {
    let crit = body
        .critical_lengths()
        .get(cable)
        .copied()
        .expect("slack cable");
    if length <= crit.min {
        return RotationalRange::empty();
    }
    if length >= crit.max {
        return RotationalRange::full();
    }
    let s = body.slack_cable(cable).expect("slack cable");
    let anchor = body.anchor(cable);
    let horizontal = (anchor.x - body.pivot.x).hypot(anchor.y - body.pivot.y);
    let lipschitz = 2.0 * s.radius * horizontal;
    let excess = |theta: f64| cable_distance_curve(body, cable, theta).powi(2) - length * length;

    let mut breaks = vec![0.0];
    breaks.extend(isolate_roots(excess, lipschitz, 0.0, TAU, ROOT_TOLERANCE));
    breaks.push(TAU);
    let mut raw = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        if excess(0.5 * (lo + hi)) <= 0.0 {
            raw.push((lo, hi));
        }
    }
    RotationalRange::from_intervals(raw)
}

/// `φ = φ_j ∩ φ_k ∩ φ_l` over the three slack cables.
pub fn rotational_range(shortest: usize, lengths: &CableLengths, cfg: &MechanismConfig) -> Result<RotationalRange> {
    let body = initial_pose_under_single_cable(shortest, lengths, cfg)?;
    Ok(range_for_body(&body, lengths).0)
}

fn range_for_body(body: &RotationRigidBody, lengths: &CableLengths) -> (RotationalRange, Vec<(usize, RotationalRange)>) {
    let per_cable: Vec<(usize, RotationalRange)> = body
        .slack
        .iter()
        .map(|s| (s.cable, cable_rotational_range(body, s.cable, lengths.get(s.cable))))
        .collect();
    let total = per_cable
        .iter()
        .fold(RotationalRange::full(), |acc, (_, r)| acc.intersect(r));
    (total, per_cable)
}

/// Spin range with every cable's angle measured from the one shared initial
/// pose rather than from each cable's own reference configuration.
pub fn shared_frame_range(shortest: usize, lengths: &CableLengths, cfg: &MechanismConfig) -> Result<RotationalRange> {
    let body = initial_pose_under_single_cable(shortest, lengths, cfg)?;
    let (_, per_cable) = range_for_body(&body, lengths);
    Ok(per_cable.iter().fold(RotationalRange::full(), |acc, (cable, r)| {
        let offset = body.slack_cable(*cable).expect("slack cable").shared_offset();
        acc.intersect(&r.shifted(offset))
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleCableCheck {
    pub shortest: usize,
    pub critical: CriticalLengths,
    pub per_cable: Vec<(usize, RotationalRange)>,
    pub range: RotationalRange,
}

impl SingleCableCheck {
    pub fn suspended(&self) -> bool {
        !self.range.is_empty()
    }
}

/// Runs the spin-range test on the shortest cable (lowest index on ties).
pub fn is_single_cable_suspended(lengths: &CableLengths, cfg: &MechanismConfig) -> Result<SingleCableCheck> {
    let shortest = lengths.shortest();
    let body = initial_pose_under_single_cable(shortest, lengths, cfg)?;
    let (range, per_cable) = range_for_body(&body, lengths);
    Ok(SingleCableCheck {
        shortest,
        critical: body.critical_lengths(),
        per_cable,
        range,
    })
}
