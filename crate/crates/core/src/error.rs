use thiserror::Error;

use crate::dynamics::Trajectory;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Fock dimension {0}: need at least 2 levels")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("metric violation: {0}")]
    MetricViolation(String),

    #[error("operator is singular: {0}")]
    Singular(&'static str),

    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("exceptional point: 2g*sqrt(alpha*beta) = {coupling} equals detuning {delta}")]
    ExceptionalPoint { delta: f64, coupling: f64 },

    #[error("time grid too coarse: {points} points, need at least {needed}")]
    GridTooCoarse { points: usize, needed: usize },

    #[error("time grid is not uniform")]
    NonUniformGrid,

    #[error("time grid is not symmetric about t = 0")]
    AsymmetricGrid,

    #[error("no sample at t = {0} for the time-reversed partner")]
    MissingTimePair(f64),

    #[error("basis is not an invariant eigenbasis: off-diagonal residual {residual:e}")]
    NotAnInvariantBasis { residual: f64 },

    #[error("basis incomplete for initial state: projection deficit {deficit:e}")]
    IncompleteBasis { deficit: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailed {
        t: f64,
        reason: String,
        partial: Box<Trajectory>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
