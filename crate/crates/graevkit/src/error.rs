//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the exact and numeric modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A point identifier that is not part of the ambient space.
    #[error("unknown point identifier `{0}`")]
    UnknownPoint(String),

    /// The basepoint may not be used where a proper point is required.
    #[error("the basepoint `{0}` may not carry a coefficient")]
    BasepointCoefficient(String),

    /// Structural problem with a space definition, as opposed to a metric
    /// axiom violation (those are reported by validation, not errored).
    #[error("structural error: {0}")]
    Structural(String),

    /// Two values built over different ambient spaces were combined.
    #[error("operands belong to different spaces")]
    SpaceMismatch,

    /// Augmentation requires diameter at most 1.
    #[error("diameter exceeds 1: d({0}, {1}) = {2}")]
    DiameterExceeded(String, String, String),

    /// A transport plan violated an invariant.
    #[error("invalid transport plan: {0}")]
    InvalidPlan(String),

    /// Rounding requires an integer divergence at every node.
    #[error("divergence at `{0}` is {1}, not an integer")]
    NonIntegerDivergence(String, String),

    /// Probability weights must be positive and sum to one.
    #[error("invalid probability measure: {0}")]
    InvalidMeasure(String),

    /// A group table failed the group or metric axioms.
    #[error("invalid metric group: {0}")]
    InvalidGroup(String),

    /// A map that must be 1-Lipschitz is not.
    #[error("map is not 1-Lipschitz: distance {dist} but target distance {target_dist} for ({a}, {b})")]
    NotLipschitz {
        a: String,
        b: String,
        dist: String,
        target_dist: String,
    },

    /// The basepoint must map to the target identity.
    #[error("basepoint must map to the identity element")]
    BasepointNotIdentity,

    /// Positive definite function data is inconsistent.
    #[error("invalid positive definite function: {0}")]
    InvalidPdFunction(String),

    /// A matrix expected to be Hermitian is not, beyond tolerance.
    #[error("matrix is not Hermitian: max asymmetry {0}")]
    NotHermitian(f64),

    /// A Gram matrix is not positive semidefinite within tolerance.
    #[error("matrix is not positive semidefinite: min eigenvalue {0}")]
    NotPsd(f64),

    /// Bad numeric parameter.
    #[error("invalid parameter: {0}")]
    BadParameter(String),

    /// Malformed rational literal.
    #[error("cannot parse rational `{0}`")]
    ParseRational(String),

    /// Malformed input document.
    #[error("cannot parse input: {0}")]
    ParseInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
