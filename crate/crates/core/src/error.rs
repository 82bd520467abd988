use thiserror::Error;

use crate::resample_engine::{ResampleState, TraceStats};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("factor {what} has zero mass and cannot be normalized")]
    ZeroFactor { what: String },

    #[error("negative or non-finite entry in {what}")]
    InvalidEntry { what: String },

    #[error("constraint scope {scope:?} has fewer than two variables")]
    ScopeArity { scope: Vec<usize> },

    #[error("constraint scope {scope:?} repeats a variable")]
    RepeatedScopeVariable { scope: Vec<usize> },

    #[error("variable {id} does not exist (model has {n} variables)")]
    UnknownVariable { id: usize, n: usize },

    #[error("two constraints share the scope {scope:?}")]
    DuplicateScope { scope: Vec<usize> },

    #[error("update targets {target} more than once")]
    DuplicateTarget { target: String },

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("configuration invalid: {0}")]
    InvalidConfiguration(String),

    #[error("model is not normalized")]
    NotNormalized,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("state space of {states} configurations exceeds the enumeration limit {limit}")]
    StateSpaceTooLarge { states: u128, limit: u128 },

    #[error("partition function is zero")]
    ZeroPartition,

    #[error("distributions have different support sizes ({left} vs {right})")]
    SupportMismatch { left: usize, right: usize },

    #[error("variable {var} is not covered by any constraint")]
    UncoveredVariable { var: usize },

    #[error("sampler did not terminate within {} rounds", .0.stats.iterations)]
    BudgetExceeded(Box<BudgetExceeded>),

    #[error("update {index} of the stream failed: {source}")]
    Stream {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

/// Partial state of a run that hit its round budget.
#[derive(Debug, Clone)]
pub struct BudgetExceeded {
    pub state: ResampleState,
    pub stats: TraceStats,
}

impl Error {
    pub fn is_budget_exceeded(&self) -> bool {
        match self {
            Error::BudgetExceeded(_) => true,
            Error::Stream { source, .. } => source.is_budget_exceeded(),
            _ => false,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
