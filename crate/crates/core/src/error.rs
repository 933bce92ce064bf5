use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FkError {
    #[error("invalid mechanism parameter `{name}` = {value}: {reason}")]
    InvalidConfig {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("cable {cable} has invalid length {value} (must be finite and > 0)")]
    InvalidLength { cable: usize, value: f64 },

    #[error("cable {cable} has zero length between anchor and attachment point")]
    ZeroLengthCable { cable: usize },

    #[error("single-cable geometry is infeasible: {0}")]
    GeometryInfeasible(String),

    #[error("dimension mismatch: system has {expected} equations, guess has {actual} entries")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("residual function returned a non-finite value")]
    NonFiniteResidual,

    #[error("nonlinear solve failed: {0}")]
    SolverFailed(String),

    #[error("structure matrix cannot balance the load (equilibrium residual {residual:.3e} x mg)")]
    RankCollapse { residual: f64 },
}

pub type Result<T> = std::result::Result<T, FkError>;
