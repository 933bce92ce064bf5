//! Forward kinematics and tension distribution of a four-cable suspended
//! platform (a shaft-sinking winch mechanism).
//!
//! Given the four cable lengths, [`traversal::solve`] decides which cables
//! are taut, computes the static-equilibrium pose of the platform and the
//! cable tensions, and reports the degenerate single-cable case in which the
//! pose is not determined.

// Negated comparisons are used deliberately so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod equal_length;
pub mod error;
pub mod fk;
pub mod geometry;
pub mod nls;
pub mod planar;
pub mod report;
pub mod single_cable;
pub mod traversal;

pub use config::MechanismConfig;
pub use error::{FkError, Result};
pub use geometry::{CableLengths, PlatformPose, TautSet, TensionVector, Vec3};
pub use traversal::{solve, Branch, FkOutcome, TraversalOptions};
