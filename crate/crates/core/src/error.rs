use thiserror::Error;

use crate::jet::JetError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("demand is not guaranteed strictly decreasing: a - |eps| k pi = {0} <= 0")]
    MonotonicityViolated(f64),

    #[error("invalid period sequence: {0}")]
    InvalidSequence(String),

    #[error("period {period} out of range for a {periods}-period sequence")]
    BadPeriod { period: usize, periods: usize },

    #[error("observation count S_{level} overflows 64 bits")]
    Overflow { level: usize },

    #[error("equilibrium condition has {} roots on the search interval (exactly one required): {roots:?}", roots.len())]
    RegularityViolated { roots: Vec<f64> },

    #[error("non-interior equilibrium: period {period} quantity {quantity:e}")]
    NonInterior { period: usize, quantity: f64 },

    #[error("continuation slope {slope} in period {period} is not positive")]
    DegenerateSlope { period: usize, slope: f64 },

    #[error("degenerate denominator in the quadratic closed form")]
    DegenerateDenominator,

    #[error("quadratic payoff is trivial (alpha1 = 0 or alpha2 = beta2)")]
    TrivialModel,

    #[error("bad belief: {0}")]
    BadBelief(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("state space too large for the grid oracle: {0}")]
    StateSpaceTooLarge(String),

    #[error("best-response iteration did not converge in {sweeps} sweeps (gap {gap:e})")]
    NoConvergence { sweeps: usize, gap: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping context annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
