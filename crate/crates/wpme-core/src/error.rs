//! Crate-wide error type.
//!
//! Validation is fail-closed: anything outside a function's documented
//! domain produces an [`Error`] instead of a silently degraded result.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range (`p = 1`,
    /// non-positive grid spacing, degenerate dimensional constant, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two fields that must share a grid were built on different manifolds.
    #[error("manifold mismatch: {0}")]
    ManifoldMismatch(String),

    /// A snapshot or node index is outside the stored range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// The solution dropped to (or below) the positivity floor; the porous
    /// medium / fast diffusion flow is only defined for positive data.
    #[error("positivity breach at t = {t}: min u = {min_u} <= floor {floor}")]
    PositivityBreach { t: f64, min_u: f64, floor: f64 },

    /// A non-finite value appeared during time stepping.
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },

    /// The requested check does not apply to the trajectory's regime
    /// (e.g. a porous-regime bound on a fast-diffusion run).
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// The check is valid mathematics but outside what this crate
    /// implements (e.g. the fast-regime limit bound with positive
    /// curvature correction).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Scenario file could not be parsed or violates the schema.
    #[error("scenario parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure (scenario files, CSV/JSON output).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
