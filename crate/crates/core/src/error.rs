//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a precondition (dimension mismatch, non-finite entries,
    /// singular matrix where an invertible one is required, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Principal-branch domain violated: an eigenvalue lies on the closed
    /// negative real axis, or a near-identity requirement failed.
    #[error("branch cut: {0}")]
    BranchCut(String),

    /// Floating point geometry broke down (punctures too close, degenerate
    /// loop radii).
    #[error("geometry: {0}")]
    Geometry(String),

    /// A value that must round to an integer / lattice member was too far
    /// from one to round safely.
    #[error("precision: {0}")]
    Precision(String),

    /// Evaluation of a form or expression failed (pole hit, unknown variable).
    #[error("evaluation failure{}: {msg}", at.map(|t| format!(" at t={t}")).unwrap_or_default())]
    Evaluation { at: Option<f64>, msg: String },

    /// Expression text did not parse.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// The integrator produced a non-finite value.
    #[error("numeric blowup at step {step}")]
    NumericBlowup { step: usize },

    /// Sampling grid too coarse for a finite-difference logarithmic derivative.
    #[error("sampling resolution: {0}")]
    SamplingResolution(String),

    /// Evaluation of a non-integrable element without an explicit path.
    #[error("ambiguous: {0}")]
    Ambiguity(String),

    /// Requested classification is not implemented for this group.
    #[error("unsupported classification: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn eval(at: Option<f64>, msg: impl Into<String>) -> Self {
        Error::Evaluation { at, msg: msg.into() }
    }
}
