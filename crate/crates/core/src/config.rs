//! Mechanism parameters.
//!
//! The anchor rectangle `A1..A4` and the attachment rectangle `B1..B4` are
//! identical, with half-sides `a` (along x) and `b` (along y). In the platform
//! frame the attachment points sit at `(±a, ±b, 0)` and the centre of gravity
//! at `(k1·a, k2·b, −h)`.

use serde::{Deserialize, Serialize};

use crate::error::{FkError, Result};
use crate::geometry::Vec3;

/// Standard gravity used throughout. Chosen so that the reference examples'
/// tension sum equals `m·g`.
pub const STANDARD_GRAVITY: f64 = 9.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub k1: f64,
    pub k2: f64,
    pub m: f64,
    pub g: f64,
}

impl Default for MechanismConfig {
    /// The reference shaft-sinking platform: 4 m × 5 m rectangle, centre of
    /// gravity 10 m below the attachment plane, 10 t.
    fn default() -> Self {
        Self {
            a: 2.0,
            b: 2.5,
            h: 10.0,
            k1: 0.25,
            k2: 0.2,
            m: 1.0e4,
            g: STANDARD_GRAVITY,
        }
    }
}

impl MechanismConfig {
    pub fn new(a: f64, b: f64, h: f64, k1: f64, k2: f64, m: f64, g: f64) -> Result<Self> {
        let cfg = Self { a, b, h, k1, k2, m, g };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("b", self.b),
            ("h", self.h),
            ("m", self.m),
            ("g", self.g),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(FkError::InvalidConfig {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        for (name, value) in [("k1", self.k1), ("k2", self.k2)] {
            if !(value.is_finite() && value > -1.0 && value < 1.0) {
                return Err(FkError::InvalidConfig {
                    name,
                    value,
                    reason: "must lie in the open interval (-1, 1)",
                });
            }
        }
        Ok(())
    }

    /// Platform weight `m·g` (N).
    pub fn weight(&self) -> f64 {
        self.m * self.g
    }

    /// Tangent point of cable `i` (0-based) in the inertial frame.
    pub fn anchor(&self, i: usize) -> Vec3 {
        let (sx, sy) = corner_signs(i);
        Vec3::new(sx * self.a, sy * self.b, 0.0)
    }

    pub fn anchors(&self) -> [Vec3; 4] {
        [0, 1, 2, 3].map(|i| self.anchor(i))
    }

    /// Attachment point of cable `i` in the platform frame.
    pub fn local_attachment(&self, i: usize) -> Vec3 {
        self.anchor(i)
    }

    /// Centre of gravity in the platform frame.
    pub fn local_centre(&self) -> Vec3 {
        Vec3::new(self.k1 * self.a, self.k2 * self.b, -self.h)
    }

    /// Distance from the centre of gravity to attachment point `i`.
    pub fn centre_distance(&self, i: usize) -> f64 {
        (self.local_attachment(i) - self.local_centre()).norm()
    }

    pub fn r1(&self) -> f64 {
        self.centre_distance(0)
    }

    pub fn r2(&self) -> f64 {
        self.centre_distance(1)
    }

    pub fn r3(&self) -> f64 {
        self.centre_distance(2)
    }

    pub fn diagonal(&self) -> f64 {
        2.0 * self.a.hypot(self.b)
    }
}

/// Signs of the (x, y) coordinates of corner `i`: 1 → (+,+), 2 → (−,+),
/// 3 → (−,−), 4 → (+,−).
pub(crate) fn corner_signs(i: usize) -> (f64, f64) {
    match i {
        0 => (1.0, 1.0),
        1 => (-1.0, 1.0),
        2 => (-1.0, -1.0),
        3 => (1.0, -1.0),
        _ => panic!("cable index {i} out of range 0..4"),
    }
}
