use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("usage error: {0}")]
    Usage(String),

    /// Eigenvalue filtering did not isolate exactly one positive real eigenvalue.
    #[error("spectral ambiguity: found {found} positive real eigenvalue candidates {candidates:?}; adjust N, L or the filtering tolerances")]
    SpectralAmbiguity { found: usize, candidates: Vec<f64> },

    #[error("not found: {0}")]
    NotFound(String),

    /// The resolvent shift sits on (or too close to) the computed spectrum.
    #[error("near-singular resolvent: shift {shift} is within {distance:e} of the spectrum (tolerance {tolerance:e})")]
    NearSingular {
        shift: f64,
        distance: f64,
        tolerance: f64,
    },

    #[error("modulation failure: {0}")]
    Modulation(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
