//! Run configuration: mechanism parameters plus optional solver settings,
//! read from a flat TOML document.

use std::path::Path;

use serde::Deserialize;
use swm_core::{MechanismConfig, TraversalOptions};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    a: Option<f64>,
    b: Option<f64>,
    h: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    m: Option<f64>,
    g: Option<f64>,
    max_iterations: Option<usize>,
    residual_tolerance: Option<f64>,
    tau_tol: Option<f64>,
    eps_slack: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunConfig {
    pub mechanism: MechanismConfig,
    pub options: TraversalOptions,
}

#[derive(Debug)]
pub enum ConfigError {
    Unreadable(String),
    Invalid(String),
}

impl RunConfig {
    /// Missing keys keep the reference values.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let d = MechanismConfig::default();
        let mechanism = MechanismConfig::new(
            raw.a.unwrap_or(d.a),
            raw.b.unwrap_or(d.b),
            raw.h.unwrap_or(d.h),
            raw.k1.unwrap_or(d.k1),
            raw.k2.unwrap_or(d.k2),
            raw.m.unwrap_or(d.m),
            raw.g.unwrap_or(d.g),
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut options = TraversalOptions::default();
        if let Some(v) = raw.max_iterations {
            options.solver.max_iterations = v;
        }
        if let Some(v) = raw.residual_tolerance {
            options.solver.residual_tolerance = v;
        }
        if let Some(v) = raw.tau_tol {
            options.tau_tol = v;
        }
        if let Some(v) = raw.eps_slack {
            options.eps_slack = v;
        }
        options.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Self { mechanism, options })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError::Unreadable(format!("{}: {e}", p.display())))?;
                Self::parse(&text).map_err(|e| match e {
                    ConfigError::Invalid(msg) => ConfigError::Invalid(format!("{}: {msg}", p.display())),
                    other => other,
                })
            }
        }
    }
}
