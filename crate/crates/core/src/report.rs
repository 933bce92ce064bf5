//! Flat, serialisable view of an [`FkOutcome`] for machine-readable output.
//!
//! Cables are numbered from 1, lengths are in m and tensions in N.

use serde::{Deserialize, Serialize};

use crate::config::MechanismConfig;
use crate::geometry::{CableLengths, PlatformPose, Vec3};
use crate::traversal::FkOutcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeTag {
    Definite,
    SingleCable,
    Infeasible,
}

impl OutcomeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutcomeTag::Definite => "definite",
            OutcomeTag::SingleCable => "single-cable",
            OutcomeTag::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PoseReport {
    pub B1: [f64; 3],
    pub B2: [f64; 3],
    pub B3: [f64; 3],
    pub C: [f64; 3],
}

impl From<&PlatformPose> for PoseReport {
    fn from(p: &PlatformPose) -> Self {
        let a = |v: &Vec3| [v.x, v.y, v.z];
        PoseReport {
            B1: a(&p.b1),
            B2: a(&p.b2),
            B3: a(&p.b3),
            C: a(&p.c),
        }
    }
}

impl From<&PoseReport> for PlatformPose {
    fn from(p: &PoseReport) -> Self {
        let v = |a: [f64; 3]| Vec3::new(a[0], a[1], a[2]);
        PlatformPose::new(v(p.B1), v(p.B2), v(p.B3), v(p.C))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lengths: Option<[f64; 4]>,
    pub outcome: OutcomeTag,
    /// Taut cables, numbered from 1.
    pub taut: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pose: Option<PoseReport>,
    /// Tensions (N). Under single-cable suspension the hanging cable carries
    /// the full weight.
    pub tensions: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<Vec<String>>,
}

impl OutcomeReport {
    pub fn new(outcome: &FkOutcome, cfg: &MechanismConfig) -> Self {
        match outcome {
            FkOutcome::Definite { pose, tensions, taut, branch } => OutcomeReport {
                lengths: None,
                outcome: OutcomeTag::Definite,
                taut: taut.cable_numbers(),
                pose: Some(pose.into()),
                tensions: tensions.as_array(),
                phi: None,
                branch: Some(branch.to_string()),
                diagnostics: None,
            },
            FkOutcome::SingleCableIndefinite { shortest, range, .. } => {
                let mut tensions = [0.0; 4];
                tensions[*shortest] = cfg.weight();
                OutcomeReport {
                    lengths: None,
                    outcome: OutcomeTag::SingleCable,
                    taut: vec![shortest + 1],
                    pose: None,
                    tensions,
                    phi: Some(range.intervals().iter().map(|&(lo, hi)| [lo, hi]).collect()),
                    branch: None,
                    diagnostics: None,
                }
            }
            FkOutcome::Infeasible { diagnostics } => OutcomeReport {
                lengths: None,
                outcome: OutcomeTag::Infeasible,
                taut: Vec::new(),
                pose: None,
                tensions: [0.0; 4],
                phi: None,
                branch: None,
                diagnostics: Some(diagnostics.iter().map(|d| d.to_string()).collect()),
            },
        }
    }

    pub fn with_lengths(mut self, lengths: &CableLengths) -> Self {
        self.lengths = Some(lengths.as_array());
        self
    }
}
