use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    /// Invalid input: out-of-range vertex, non-adjacent pair, malformed spec.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request exceeds a configured memory or enumeration budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// A Monte Carlo root finder could not resolve its target.
    #[error("precision error: {message} (bracket [{lo}, {hi}])")]
    Precision { message: String, lo: f64, hi: f64 },
    /// An iteration hit its cap without meeting the stopping criterion.
    #[error("divergence error: {message} (best t = {best_t})")]
    Divergence { message: String, best_t: u64 },
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> LabError {
    LabError::Domain(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> LabError {
    LabError::Resource(msg.into())
}
