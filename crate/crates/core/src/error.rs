use crate::arith::QVector;

/// Errors surfaced by the engine.
///
/// Mathematical outcomes such as "inseparable" or "not a member" are ordinary
/// return values; the variants here cover malformed input, violated
/// preconditions and resource limits.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} requires a closed polyhedron")]
    OpenInput(&'static str),
    #[error("{0} is undefined on the empty set")]
    EmptyInput(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("the set is not absorbing (0 is not in its core)")]
    NotAbsorbing,
    #[error("g is not dominated by p on Y; violating direction {witness:?}")]
    DominationViolated { witness: QVector },
    #[error("function takes the value -inf")]
    UnboundedBelow,
    #[error("function value is infinite at the requested point")]
    InfiniteValue,
    #[error("Fourier-Motzkin elimination exceeded {limit} constraints")]
    FmLimitExceeded { limit: usize },
    #[error("brute-force enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl Error {
    /// True for outcomes that are facts about the mathematical input (as
    /// opposed to malformed input or resource limits).
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::PreconditionUnmet(_)
                | Error::NotAbsorbing
                | Error::DominationViolated { .. }
                | Error::UnboundedBelow
                | Error::InfiniteValue
                | Error::EmptyInput(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
