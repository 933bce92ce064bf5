//! The traversal (try-and-error) forward-kinematics procedure.
//!
//! Steps, in order:
//! 1. build the guess: the level pose at the mean length with the even
//!    tension distribution;
//! 2. all lengths equal: the guess is the answer;
//! 3. single-cable check: a nonempty spin range means the pose is not
//!    determined;
//! 4. the six pairs of taut cables, then the four triples: solve and keep the
//!    first assumption that holds;
//! 5. adjacent lengths equal: planar reduction;
//! 6. otherwise all four cables taut.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::MechanismConfig;
use crate::equal_length::{equal_length_pose, even_tension};
use crate::error::{FkError, Result};
use crate::fk::FkSystem;
use crate::geometry::{anchor_distances, CableLengths, PlatformPose, TautSet, TensionVector};
use crate::nls::{self, SolverOptions, Termination};
use crate::planar::{detect_adjacent_equal, lift_to_3d, planar_fk, tensions_by_pseudoinverse};
use crate::single_cable::{is_single_cable_suspended, RotationalRange, SingleCableCheck};

/// Relative tolerance for the all-equal shortcut.
pub const EQUAL_TOLERANCE: f64 = 1e-9;
/// Largest scaled residual accepted for a candidate solution.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Pairs, then triples, in the order they are tried.
pub const PAIRS: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
pub const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraversalOptions {
    pub solver: SolverOptions,
    /// Smallest tension a taut cable may carry, as a fraction of `mg`.
    pub tau_tol: f64,
    /// A slack cable must be shorter than its length by this fraction.
    pub eps_slack: f64,
}

impl Default for TraversalOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            tau_tol: 1e-6,
            eps_slack: 1e-9,
        }
    }
}

impl TraversalOptions {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if !(self.tau_tol >= 0.0 && self.eps_slack >= 0.0) {
            return Err(FkError::SolverFailed(format!(
                "tolerances must be nonnegative (tau_tol {}, eps_slack {})",
                self.tau_tol, self.eps_slack
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    EqualLength,
    Pair,
    Triple,
    Planar,
    FourCable,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::EqualLength => "equal-length",
            Branch::Pair => "pair",
            Branch::Triple => "triple",
            Branch::Planar => "planar",
            Branch::FourCable => "four-cable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guess {
    pub l_ave: f64,
    pub pose: PlatformPose,
    /// Even tensions with the entries of slack cables set to zero.
    pub tensions: TensionVector,
}

pub fn build_guess(lengths: &CableLengths, taut: TautSet, cfg: &MechanismConfig) -> Guess {
    let l_ave = lengths.average();
    let even = even_tension(cfg).tensions;
    let mut t = [0.0; 4];
    for i in taut.members() {
        t[i] = even.get(i);
    }
    Guess {
        l_ave,
        pose: equal_length_pose(l_ave, cfg),
        tensions: TensionVector(t),
    }
}

/// Why an assumed tension state was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Rejection {
    NotConverged { termination: Termination, residual: f64 },
    Residual { residual: f64 },
    TautCableUnloaded { cable: usize, tension: f64 },
    SlackCableTooLong { cable: usize, distance: f64, length: f64 },
    AboveAnchors { cable: usize, z: f64 },
    Overturned,
    SolveError { message: String },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NotConverged { termination, residual } => {
                write!(f, "solver stopped ({termination:?}) at residual {residual:.3e}")
            }
            Rejection::Residual { residual } => write!(f, "residual {residual:.3e} too large"),
            Rejection::TautCableUnloaded { cable, tension } => {
                write!(f, "cable {} tension {tension:.3} N is below the taut threshold", cable + 1)
            }
            Rejection::SlackCableTooLong { cable, distance, length } => write!(
                f,
                "slack cable {} would need {distance:.6} m but is {length:.6} m",
                cable + 1
            ),
            Rejection::AboveAnchors { cable, z } => {
                write!(f, "attachment point {} at z = {z:.3} is not below the anchors", cable + 1)
            }
            Rejection::Overturned => f.write_str("platform is overturned or mirrored"),
            Rejection::SolveError { message } => f.write_str(message),
        }
    }
}

/// Checks a candidate pose and tension vector against the assumed taut set.
///
/// The candidate holds when the FK residual for `taut` vanishes, every taut
/// cable pulls, every slack cable is strictly shorter than its length, and
/// the platform hangs upright below the anchors with its centre of gravity
/// under the attachment plane.
pub fn verify_assumption(
    pose: &PlatformPose,
    tensions: &TensionVector,
    taut: TautSet,
    lengths: &CableLengths,
    cfg: &MechanismConfig,
    options: &TraversalOptions,
) -> std::result::Result<(), Rejection> {
    let residual = FkSystem::new(taut, lengths, cfg)
        .residual_at(pose, tensions)
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.abs()));
    if !(residual < RESIDUAL_TOLERANCE) {
        return Err(Rejection::Residual { residual });
    }
    let w = cfg.weight();
    for i in taut.members() {
        if !(tensions.get(i) > options.tau_tol * w) {
            return Err(Rejection::TautCableUnloaded {
                cable: i,
                tension: tensions.get(i),
            });
        }
    }
    let d = anchor_distances(pose, cfg);
    for j in taut.slack() {
        let length = lengths.get(j);
        if !(d[j] < length * (1.0 - options.eps_slack)) {
            return Err(Rejection::SlackCableTooLong {
                cable: j,
                distance: d[j],
                length,
            });
        }
    }
    for (i, b) in pose.attachments().iter().enumerate() {
        if !(b.z < 0.0) {
            return Err(Rejection::AboveAnchors { cable: i, z: b.z });
        }
    }
    if !(pose.normal().z > 0.0 && pose.centre_offset() < 0.0) {
        return Err(Rejection::Overturned);
    }
    Ok(())
}

/// One tried tension state and why it was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub branch: Branch,
    pub taut: TautSet,
    pub rejection: Rejection,
}

impl fmt::Display for Attempt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.branch, self.taut, self.rejection)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum FkOutcome {
    Definite {
        pose: PlatformPose,
        tensions: TensionVector,
        taut: TautSet,
        branch: Branch,
    },
    SingleCableIndefinite {
        shortest: usize,
        range: RotationalRange,
        check: SingleCableCheck,
    },
    Infeasible {
        diagnostics: Vec<Attempt>,
    },
}

impl FkOutcome {
    pub fn is_definite(&self) -> bool {
        matches!(self, FkOutcome::Definite { .. })
    }
}

/// Solves the FK system for `taut` from the standard guess and verifies it.
fn try_taut_set(
    taut: TautSet,
    lengths: &CableLengths,
    cfg: &MechanismConfig,
    options: &TraversalOptions,
) -> std::result::Result<(PlatformPose, TensionVector), Rejection> {
    let system = FkSystem::new(taut, lengths, cfg);
    let guess = build_guess(lengths, taut, cfg);
    let report = nls::solve(&system, &system.pack(&guess.pose, &guess.tensions), &options.solver)
        .map_err(|e| Rejection::SolveError { message: e.to_string() })?;
    if !report.converged {
        return Err(Rejection::NotConverged {
            termination: report.termination,
            residual: report.residual_norm,
        });
    }
    let (pose, tensions) = system.unpack(&report.solution);
    verify_assumption(&pose, &tensions, taut, lengths, cfg, options)?;
    Ok((pose, tensions))
}

fn planar_branch(
    lengths: &CableLengths,
    cfg: &MechanismConfig,
    options: &TraversalOptions,
) -> Option<std::result::Result<(PlatformPose, TensionVector), Rejection>> {
    let configuration = detect_adjacent_equal(lengths)?;
    let run = || {
        let solution = planar_fk(configuration, lengths, cfg, &options.solver)
            .map_err(|e| Rejection::SolveError { message: e.to_string() })?;
        let pose = lift_to_3d(&solution.pose, configuration, cfg);
        let tensions =
            tensions_by_pseudoinverse(&pose, cfg).map_err(|e| Rejection::SolveError { message: e.to_string() })?;
        verify_assumption(&pose, &tensions, TautSet::ALL, lengths, cfg, options)?;
        Ok((pose, tensions))
    };
    Some(run())
}

/// Runs the traversal procedure.
pub fn solve(lengths: &CableLengths, cfg: &MechanismConfig, options: &TraversalOptions) -> Result<FkOutcome> {
    cfg.validate()?;
    options.validate()?;
    let definite = |pose, tensions, taut, branch| FkOutcome::Definite {
        pose,
        tensions,
        taut,
        branch,
    };

    if lengths.all_equal(EQUAL_TOLERANCE) {
        let guess = build_guess(lengths, TautSet::ALL, cfg);
        return Ok(definite(guess.pose, guess.tensions, TautSet::ALL, Branch::EqualLength));
    }

    let mut diagnostics = Vec::new();
    match is_single_cable_suspended(lengths, cfg) {
        Ok(check) if check.suspended() => {
            return Ok(FkOutcome::SingleCableIndefinite {
                shortest: check.shortest,
                range: check.range.clone(),
                check,
            });
        }
        Ok(_) => {}
        Err(e) => diagnostics.push(Attempt {
            branch: Branch::Pair,
            taut: TautSet::from_indices(&[lengths.shortest()]).expect("one cable"),
            rejection: Rejection::SolveError { message: e.to_string() },
        }),
    }

    let candidates = PAIRS
        .iter()
        .map(|p| (Branch::Pair, TautSet::from_indices(p).expect("pair")))
        .chain(TRIPLES.iter().map(|t| (Branch::Triple, TautSet::from_indices(t).expect("triple"))));
    for (branch, taut) in candidates {
        match try_taut_set(taut, lengths, cfg, options) {
            Ok((pose, tensions)) => return Ok(definite(pose, tensions, taut, branch)),
            Err(rejection) => diagnostics.push(Attempt { branch, taut, rejection }),
        }
    }

    let (branch, result) = match planar_branch(lengths, cfg, options) {
        Some(result) => (Branch::Planar, result),
        None => (Branch::FourCable, try_taut_set(TautSet::ALL, lengths, cfg, options)),
    };
    match result {
        Ok((pose, tensions)) => Ok(definite(pose, tensions, TautSet::ALL, branch)),
        Err(rejection) => {
            diagnostics.push(Attempt {
                branch,
                taut: TautSet::ALL,
                rejection,
            });
            Ok(FkOutcome::Infeasible { diagnostics })
        }
    }
}
