//! Fluctuations of the pseudoenergies `eps_i` across the ensemble.

use bbs_core::batch::Batch;
use bbs_core::{pseudoenergy, Configuration, EnergySpectrum};
use bbs_tba::{profile, pseudoenergy_cov_prediction};

use crate::error::{invalid, MeasureError};
use crate::plan::MeasurementPlan;
use crate::runner::{check_skips, collect, Execution, Outcome};
use crate::stats::{CrossMoments, Estimate};

/// Fractional bits used to hold `eps_i` exactly in the accumulator.
const EPS_BITS: u32 = 40;

/// Largest tolerated fraction of samples missing a soliton species.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoenergyCovariance {
    pub i_max: usize,
    /// `L cov(eps_i, eps_j)`, row `i - 1`, column `j - 1`.
    pub entries: Vec<Vec<Estimate>>,
    pub used: u64,
    pub excluded: u64,
    pub skipped: u64,
}

impl PseudoenergyCovariance {
    pub fn at(&self, i: usize, j: usize) -> Estimate {
        self.entries[i - 1][j - 1]
    }
}

/// `eps_1..eps_{i_max}` of every lane, or `Excluded` where one is undefined.
fn lane_pseudoenergies(configs: &[Configuration], i_max: usize) -> Vec<Outcome<Vec<f64>>> {
    let mut batch = Batch::from_configs(configs);
    let len = batch.len();
    let per_k: Vec<_> = (1..=i_max as u32 + 1).map(|k| batch.energies(k)).collect();
    let invalid = batch.invalid();
    (0..configs.len())
        .map(|lane| {
            if invalid.lane(lane) {
                return Outcome::Skipped;
            }
            let spec = EnergySpectrum::new(len, per_k.iter().map(|e| e[lane]).collect());
            match (1..=i_max).map(|i| pseudoenergy(&spec, i)).collect::<Result<Vec<_>, _>>() {
                Ok(eps) => Outcome::Value(eps),
                Err(_) => Outcome::Excluded,
            }
        })
        .collect()
}

/// `L cov(eps_i, eps_j)` for `1 <= i, j <= i_max` over `plan.samples` rings
/// (no time evolution).
pub fn measure_pseudoenergy_covariance(
    plan: &MeasurementPlan,
    i_max: usize,
    exec: &Execution,
) -> Result<PseudoenergyCovariance, MeasureError> {
    if i_max == 0 {
        return Err(invalid("i_max must be at least 1"));
    }
    plan.ensemble.validate()?;
    if plan.samples == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let got = collect(
        &plan.ensemble,
        plan.samples,
        exec,
        &CrossMoments::new(i_max, EPS_BITS),
        |c| lane_pseudoenergies(c, i_max),
        |acc, eps| acc.push_reals(&eps),
    )?;
    check_skips(&got, plan.samples, plan.skip_budget)?;
    if got.excluded as f64 > MAX_EXCLUDED_FRACTION * plan.samples as f64 {
        return Err(MeasureError::ExcessExclusions { excluded: got.excluded, samples: plan.samples });
    }
    let len = plan.length() as f64;
    let entries = (0..i_max)
        .map(|a| (0..i_max).map(|b| got.stats.estimate(|s| len * s.covariance(a, b))).collect())
        .collect();
    Ok(PseudoenergyCovariance { i_max, entries, used: got.used, excluded: got.excluded, skipped: got.skipped })
}

/// Predicted diagonal `L <d eps_i^2>` for `i = 1..=i_max` in the ensemble.
pub fn pseudoenergy_predictions(plan: &MeasurementPlan, i_max: usize) -> Result<Vec<f64>, MeasureError> {
    let (a, z) = plan.ensemble.fugacities();
    let p = profile(a, z, i_max)?;
    (1..=i_max).map(|i| Ok(pseudoenergy_cov_prediction(&p, i)?)).collect()
}
