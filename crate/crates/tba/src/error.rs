use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("parameter out of domain: {0}")]
    DomainError(String),
    #[error("quantity diverges: {0}")]
    DivergentQuantity(String),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("root not bracketed for target {target}")]
    RootNotBracketed { target: f64 },
    #[error("leading eigenvalue is degenerate (gap {gap:e})")]
    DegenerateLeadingEigenvalue { gap: f64 },
}

pub(crate) fn domain(msg: impl Into<String>) -> AnalyticsError {
    AnalyticsError::DomainError(msg.into())
}
