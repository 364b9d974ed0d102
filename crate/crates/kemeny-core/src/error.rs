//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while validating models or running the
/// numerical machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {cols} entries, expected {expected}")]
    NotSquare {
        row: usize,
        cols: usize,
        expected: usize,
    },

    #[error("state space too small: n = {n}, need n >= 2")]
    TooFewStates { n: usize },

    #[error("state space too large: n = {n}, desk-scale cap is {max}")]
    TooManyStates { n: usize, max: usize },

    #[error("row {row} sums to {sum:.17} (allowed slack {slack:e})")]
    RowSumViolation { row: usize, sum: f64, slack: f64 },

    #[error("negative entry {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("negative off-diagonal rate {value:e} at ({row}, {col})")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },

    #[error("positive-entry digraph is not strongly connected")]
    NotIrreducible,

    #[error("linear system is singular; validation should have rejected this input")]
    SingularSystem,

    #[error("state {state} out of range for {n} states")]
    StateOutOfRange { state: usize, n: usize },

    #[error("uniformization rate {rate} below max exit rate {required}")]
    RateTooSmall { rate: f64, required: f64 },

    #[error("speed measure has infinite mass; the diffusion is not positive recurrent")]
    NotPositiveRecurrent,

    #[error("sigma({x}) = {value} must be strictly positive")]
    SigmaVanishes { x: f64, value: f64 },

    #[error("quadrature failed to converge: {context}")]
    QuadratureFailure { context: String },

    #[error("integral exceeds the overflow guard: {context}")]
    Divergent { context: String },

    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("point {x} outside the interval")]
    PointOutsideInterval { x: f64 },

    #[error("anchor {anchor} must lie strictly inside the interval")]
    InvalidAnchor { anchor: f64 },

    #[error("reflecting endpoint must be finite")]
    ReflectingAtInfinity,

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: &'static str },

    #[error("{operation} requires a bounded interval; truncate the domain first")]
    UnboundedDomain { operation: &'static str },

    #[error("trajectory exceeded the safety cap of {cap:e}")]
    RunawayTrajectory { cap: f64 },

    #[error("step size {step:e} too large; must be <= {max:e}")]
    StepTooLarge { step: f64, max: f64 },

    #[error("parse error at position {position}: expected {expected}")]
    Parse { position: usize, expected: String },

    #[error("unknown function '{name}' at position {position}")]
    UnknownFunction { name: String, position: usize },

    #[error("unknown identifier '{name}' at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("domain error evaluating {what} at x = {x}")]
    EvalDomain { what: &'static str, x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
