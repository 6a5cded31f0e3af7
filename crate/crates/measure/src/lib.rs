//! Monte Carlo estimators for the box-ball system.
//!
//! Samples are drawn by index from an ensemble spec, evolved 256 at a time
//! and folded into exact integer accumulators in sample order, so every
//! estimate is reproducible regardless of the worker count. Errors come
//! from a delete-one-block jackknife.

pub mod correlation;
pub mod error;
pub mod plan;
pub mod pseudoenergy;
pub mod runner;
pub mod stats;
pub mod sumrule;
pub mod transfer;

pub use correlation::{
    current_totals, measure_density_correlation, measure_generalized_correlation, CorrelationEstimate, CurrentLabels,
};
pub use error::MeasureError;
pub use plan::{max_velocity, no_wrap_length, MeasurementPlan};
pub use pseudoenergy::{measure_pseudoenergy_covariance, pseudoenergy_predictions, PseudoenergyCovariance};
pub use runner::Execution;
pub use stats::{Accumulator, Blocked, CrossMoments, Estimate, PowerSums};
pub use sumrule::{sum_rule_check, SumRuleResult, Weight};
pub use transfer::{
    compare_with_rate_function, measure_cumulants, measure_histogram, rate_function_curve, CumulantEstimates,
    RateComparison, TransferHistogram,
};
