use thiserror::Error;

/// Errors surfaced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dictionary column {index} has norm {norm:.3e}, below the 1e-12 floor")]
    ZeroColumn { index: usize, norm: f64 },

    #[error("sparsity {s} exceeds dictionary size {n}")]
    InvalidSparsity { s: usize, n: usize },

    #[error("{context}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state became non-finite at t = {t}; try a smaller dt")]
    NonFiniteState { t: f64 },

    #[error("activation inversion failed to bracket target {target}")]
    InversionFailure { target: f64 },

    #[error("critical-point certification is only defined for the soft-threshold (l1) cost")]
    UnsupportedCost,

    #[error("support set is empty")]
    EmptySupport,

    #[error("initial state coincides with the fixed point (distance {norm:.3e} < 1e-14)")]
    DegenerateStart { norm: f64 },

    #[error("step size {step} exceeds the stability bound {bound:.6} = 1/sigma_max^2")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("problem file invalid: {0}")]
    ProblemFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
