//! Measurement plans and the no-wrap bound.

use bbs_core::EnsembleSpec;
use bbs_tba::{Capacity, Fugacities};

use crate::error::{invalid, MeasureError};

/// Margin applied to the fastest soliton velocity in the no-wrap bound.
pub const WRAP_SAFETY: f64 = 1.2;

/// Default index from which a current label is treated as unbounded.
pub const DEFAULT_INF_PROXY: u32 = 99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementPlan {
    pub ensemble: EnsembleSpec,
    /// Capacity `l` of the dynamics for transfer statistics and of the
    /// second current in correlations.
    pub capacity: u32,
    /// Capacity `n` of the dynamics used for correlations.
    pub dyn_capacity: u32,
    pub time: u64,
    pub samples: u64,
    /// Current labels at or above this value use the unbounded current.
    pub inf_proxy: u32,
    pub allow_wrap: bool,
    /// Samples that may be skipped for an ambiguous periodic carrier.
    pub skip_budget: u64,
}

impl MeasurementPlan {
    /// Plan with `n = l`, the default infinity proxy, no wrap override and a
    /// skip budget of 1% of the samples.
    pub fn new(ensemble: EnsembleSpec, capacity: u32, time: u64, samples: u64) -> Self {
        MeasurementPlan {
            ensemble,
            capacity,
            dyn_capacity: capacity,
            time,
            samples,
            inf_proxy: DEFAULT_INF_PROXY,
            allow_wrap: false,
            skip_budget: samples / 100,
        }
    }

    pub fn with_dyn_capacity(self, n: u32) -> Self {
        MeasurementPlan { dyn_capacity: n, ..self }
    }

    pub fn allowing_wrap(self) -> Self {
        MeasurementPlan { allow_wrap: true, ..self }
    }

    pub fn length(&self) -> usize {
        self.ensemble.length()
    }

    /// Checks the plan for a run of `time` steps of `T_dynamics`.
    pub(crate) fn validate_run(&self, dynamics: u32, min_time: u64) -> Result<(), MeasureError> {
        self.ensemble.validate()?;
        if self.samples == 0 {
            return Err(invalid("sample count must be at least 1"));
        }
        if self.capacity == 0 || self.dyn_capacity == 0 {
            return Err(invalid("capacities must be at least 1"));
        }
        if self.time < min_time {
            return Err(invalid(format!("time horizon must be at least {min_time}")));
        }
        if !self.allow_wrap {
            let required = no_wrap_length(&self.ensemble, dynamics, self.time)?;
            if self.length() < required {
                return Err(MeasureError::WrapAround { length: self.length(), required });
            }
        }
        Ok(())
    }
}

/// Fastest soliton velocity `v^{(l)}_l` under `T_l` in the ensemble.
pub fn max_velocity(ensemble: &EnsembleSpec, l: u32) -> Result<f64, MeasureError> {
    let (a, z) = ensemble.fugacities();
    if z == 0.0 {
        // Empty state: only the bare limit of a lone soliton remains.
        return Ok(l as f64);
    }
    let f = Fugacities::new(a, z)?;
    Ok(f.velocity(Capacity::Finite(l), l))
}

/// Smallest ring on which nothing travels around within `time` steps of
/// `T_l`: `2 * 1.2 * v_max * t`.
pub fn no_wrap_length(ensemble: &EnsembleSpec, l: u32, time: u64) -> Result<usize, MeasureError> {
    let v = max_velocity(ensemble, l)?;
    Ok((2.0 * WRAP_SAFETY * v * time as f64).ceil() as usize)
}
