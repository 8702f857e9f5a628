use crate::environment::PopulationState;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Raised when `|C1| < 1` (or the second-moment analogue) cannot be guaranteed.
    #[error("recursion is not contracting: {0}")]
    ContractionViolation(String),

    #[error("unsupported operator configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("grammatical advantage of G2 must be non-zero")]
    DegenerateAdvantage,

    #[error("nullcline conic degenerates for alpha = {alpha}, sigma = {sigma}")]
    DegenerateConic { alpha: f64, sigma: f64 },

    #[error("no convergence after {iterations} iterations (last state p = {}, q = {})", last.p, last.q)]
    NonConvergence {
        iterations: usize,
        last: PopulationState,
    },

    #[error("demographic record is empty or has zero total population")]
    EmptyRecord,

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> ModelError {
    ModelError::ParameterDomain(msg.into())
}
