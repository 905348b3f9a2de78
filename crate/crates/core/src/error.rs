//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library. The CLI maps `Internal` to exit code 3
/// and everything else to exit code 2; certificate violations and
/// refutation traces are ordinary return values, not errors.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: unknown points, bad file contents, length mismatches.
    #[error("input error: {0}")]
    Input(String),

    /// A documented operation precondition does not hold.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// A family member that must have Lipschitz norm exactly 1 does not.
    #[error("not normalized: member `{member}` has Lipschitz norm {norm}")]
    NotNormalized { member: String, norm: String },

    /// Lipschitz norm requested on a space with fewer than two points.
    #[error("undefined norm: space has fewer than two points")]
    UndefinedNorm,

    /// Exact search requested beyond its supported size.
    #[error("size error: {0}")]
    Size(String),

    /// Net sizes fail to increase along the requested level subsequence.
    #[error("hierarchy error: {0}")]
    Hierarchy(String),

    /// Candidate sequence exhausted before enough picks were made.
    #[error("insufficient sequence: found {found} of {requested} requested candidates")]
    InsufficientSequence { found: usize, requested: usize },

    /// An invariant the construction guarantees failed to verify. A bug signal.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
