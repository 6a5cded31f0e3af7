use bbs_core::{DynamicsError, EnsembleError};
use bbs_tba::AnalyticsError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(
        "ring of {length} sites lets signals wrap within the run; \
         need at least {required} sites or an explicit wrap override"
    )]
    WrapAround { length: usize, required: usize },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{skipped} of {samples} samples met an ambiguous periodic carrier (budget {budget})")]
    SkipBudgetExceeded { skipped: u64, samples: u64, budget: u64 },
    #[error("{excluded} of {samples} samples lack a needed soliton species (more than 1%); enlarge the ring")]
    ExcessExclusions { excluded: u64, samples: u64 },
    #[error("worker pool: {0}")]
    Workers(String),
}

impl MeasureError {
    /// True for errors caught before any sampling starts.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            MeasureError::InvalidPlan(_)
                | MeasureError::WrapAround { .. }
                | MeasureError::Ensemble(_)
                | MeasureError::Analytics(AnalyticsError::DomainError(_))
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> MeasureError {
    MeasureError::InvalidPlan(msg.into())
}
