use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("interval mismatch: [{lo_a}, {hi_a}] vs [{lo_b}, {hi_b}]")]
    IntervalMismatch {
        lo_a: f64,
        hi_a: f64,
        lo_b: f64,
        hi_b: f64,
    },

    #[error("evaluation point {s} outside interval [{lo}, {hi}]")]
    OutsideInterval { s: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("a = {a} outside the leading-branch window [-1.5, -0.5]")]
    OutsideBranch { a: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("negative discriminant {value:e} under the frequency square root")]
    NegativeDiscriminant { value: f64 },

    #[error("singular {what}: |pivot| = {magnitude:e}")]
    Singular { what: &'static str, magnitude: f64 },

    #[error("characteristic function too close to zero on the contour after {retries} retries")]
    ContourProximity { retries: usize },

    #[error("argument accumulation failed to resolve the phase (winding {winding})")]
    PhaseResolution { winding: f64 },

    #[error("coefficient ({0}, {1}) not yet computed")]
    MissingCoefficient(u32, u32),

    #[error("w21 compatibility failure: reconstructed w21(-r) differs from the boundary relation by {mismatch:e}")]
    Compatibility { mismatch: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty feasible region: {0}")]
    EmptyRegion(String),
}

pub type Result<T> = std::result::Result<T, Error>;
