//! Summation of geometrically convergent series.

use crate::error::AnalyticsError;

pub(crate) const REL_TOL: f64 = 1e-14;
const MAX_TERMS: u32 = 2_000_000;

/// `sum_{k >= from} term(k)` until the running term drops below `REL_TOL`
/// of the partial sum for a few consecutive indices.
pub(crate) fn sum_from(from: u32, mut term: impl FnMut(u32) -> f64) -> Result<f64, AnalyticsError> {
    let mut total = 0.0;
    let mut quiet = 0;
    let mut k = from;
    while k < from.saturating_add(MAX_TERMS) {
        let t = term(k);
        total += t;
        if t.abs() <= REL_TOL * total.abs() || t == 0.0 {
            quiet += 1;
            if quiet >= 4 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        k += 1;
    }
    Err(AnalyticsError::DivergentQuantity(format!(
        "series did not converge within {MAX_TERMS} terms"
    )))
}
