use thiserror::Error;

/// Errors produced by the tracking library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("matrix is singular: {0}")]
    Singular(&'static str),

    #[error("radar is co-located with the evaluated position")]
    ZeroRange,

    #[error("jammer component index {index} out of range 1..={total}")]
    ComponentIndex { index: usize, total: usize },

    #[error("invalid bias slot {0}")]
    InvalidSlot(usize),

    #[error("all clutter rates are zero")]
    ZeroClutterRates,

    #[error("empty mixture")]
    EmptyMixture,

    #[error("evaluation time {t_k} precedes attack start {t_0}")]
    BeforeAttackStart { t_k: f64, t_0: f64 },

    #[error("trajectory leaves the field of view at step {step}")]
    OutsideFov { step: usize },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
