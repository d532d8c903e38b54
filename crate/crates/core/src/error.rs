use crate::field::Vec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("newton failed from every seed near ({}, {}) although |v| = {residual:.3e} there; refine the mesh", at.x, at.y)]
    NonConvergence { at: Vec2, residual: f64 },

    #[error("zero at ({}, {}) is not hyperbolic: det J = {det:.3e}", at.x, at.y)]
    DegenerateZero { at: Vec2, det: f64 },

    #[error("expected 3 saddles, found {found}")]
    WrongSaddleCount { found: usize },

    #[error("operation requires a saddle")]
    KindMismatch,

    #[error("integration step budget of {steps} exhausted")]
    StepBudgetExhausted { steps: usize },

    #[error("trajectory stalled at a non-saddle singularity near ({}, {})", at.x, at.y)]
    SingularityEncountered { at: Vec2 },

    #[error("orbit through x = {x0} runs into a saddle before returning to the meridian")]
    SeparatrixHit { x0: f64 },

    #[error("level-curve continuation reached a critical point near ({}, {})", at.x, at.y)]
    NearCriticalPoint { at: Vec2 },

    #[error("delta has no sign change on d in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("sampled circle-map lift is not monotone of degree one near x = {at}")]
    NotMonotone { at: f64 },

    #[error("power-law fit needs positive samples, got ({x}, {y})")]
    NonPositiveSample { x: f64, y: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("points of the decomposition collide: minimal spacing {min_spacing:.3e}")]
    DegenerateSpacing { min_spacing: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
