//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the quadrature, estimator and solver layers.
#[derive(Debug, Error)]
pub enum UqError {
    /// An operation requiring a downward-closed index set received one that
    /// is missing a predecessor.
    #[error("index set is not downward closed: {missing} (predecessor of {of}) is absent")]
    NotDownwardClosed { missing: String, of: String },

    /// A work-level assignment induced a non-downward-closed set at some level.
    #[error("work levels induce a non-downward-closed set at level {level}: {missing} (predecessor of {of}) is absent")]
    GammaNotDownwardClosed {
        level: usize,
        missing: String,
        of: String,
    },

    /// Interpolation data length does not match the node count.
    #[error("value count {got} does not match node count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The domain transformation degenerates (non-positive Jacobian determinant).
    #[error("inadmissible domain map: sampled min det(dT) = {min_det:.6e}")]
    InadmissibleMap { min_det: f64 },

    /// Assembly quadrature is weaker than the exactness the forms require.
    #[error("quadrature rule {which} is exact only on degree {got}, but degree {required} is required")]
    QuadratureTooWeak {
        which: &'static str,
        required: usize,
        got: usize,
    },

    /// Linear solve failed or did not reach the residual target.
    #[error("solver failure at level {level}: {detail}")]
    SolverFailure { level: usize, detail: String },

    /// An estimator propagates an evaluation failure with its location.
    #[error("evaluation failed at level {level}, sample {sample}: {source}")]
    EstimatorFailure {
        level: usize,
        sample: u64,
        #[source]
        source: Box<UqError>,
    },

    /// Reference-cache file exists but cannot be parsed.
    #[error("oracle cache file {path} is corrupt: {detail}")]
    CacheCorrupt { path: String, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
