use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor received a parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A point or argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two grid-sampled quantities have incompatible shapes.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A boundary-condition spec violates its well-posedness invariant.
    #[error("invalid boundary spec: {0}")]
    InvalidSpec(String),

    /// The assembled constraint rows are rank deficient on the given side.
    #[error("degenerate boundary spec at s = {side:+}: {detail}")]
    DegenerateSpec { side: f64, detail: String },

    /// A perturbed metric stopped being positive definite.
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
