//! Ring-integrated current correlations and density correlations.

use bbs_core::batch::{Batch, Mask, PlaneSums, SiteObserver};
use bbs_core::{generalized_current_field, Configuration, DynamicsError};

use crate::error::{invalid, MeasureError};
use crate::plan::MeasurementPlan;
use crate::runner::{check_skips, collect, Execution, Outcome};
use crate::stats::{CrossMoments, Estimate};

/// Per-lane sum of the carrier load over all sites.
#[derive(Default)]
struct LoadTotals(PlaneSums);

impl SiteObserver for LoadTotals {
    #[inline(always)]
    fn site(&mut self, _x: usize, load: &[Mask], _pick: Mask) {
        self.0.add(load);
    }
}

/// `sum_x eta^{(l)}_j(x)` for every lane of `batch` in its current state;
/// `None` where the carrier is ambiguous. Labels `j >= inf_proxy` use the
/// capacity-`l` carrier load itself.
pub fn current_totals(batch: &mut Batch, l: u32, j: u32, inf_proxy: u32) -> Vec<Option<u64>> {
    if j >= inf_proxy {
        let mut obs = LoadTotals::default();
        let sweep = batch.observe(l, &mut obs);
        let totals = obs.0.totals();
        return (0..batch.lanes())
            .map(|k| (!sweep.ambiguous.lane(k)).then_some(totals[k]))
            .collect();
    }
    batch
        .configs()
        .iter()
        .map(|c| match generalized_current_field(c, l, j) {
            Ok(field) => Some(field.total()),
            Err(DynamicsError::CarrierNonConvergent { .. }) => None,
            Err(e) => panic!("labels were validated: {e}"),
        })
        .collect()
}

/// Current labels `(m, i)` at time `t` and `(l, j)` at time 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurrentLabels {
    pub m: u32,
    pub i: u32,
    pub j: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub value: Estimate,
    pub used: u64,
    pub skipped: u64,
}

/// `sum_x <eta^{(m)}_i(x, t) eta^{(l)}_j(0, 0)>^c` with `l = plan.capacity`
/// and time evolution by `T_n`, `n = plan.dyn_capacity`; estimated as
/// `Cov(H_t, H_0) / L` with `H` the ring totals of the two currents.
pub fn measure_generalized_correlation(
    plan: &MeasurementPlan,
    labels: CurrentLabels,
    exec: &Execution,
) -> Result<CorrelationEstimate, MeasureError> {
    if labels.m == 0 || labels.i == 0 || labels.j == 0 {
        return Err(invalid("current labels must be at least 1"));
    }
    plan.validate_run(plan.dyn_capacity, 0)?;
    let (l, n, t, proxy) = (plan.capacity, plan.dyn_capacity, plan.time, plan.inf_proxy);
    let observe = |configs: &[Configuration]| -> Vec<Outcome<[i64; 2]>> {
        let mut batch = Batch::from_configs(configs);
        let start = current_totals(&mut batch, l, labels.j, proxy);
        for _ in 0..t {
            batch.evolve(n);
        }
        let end = current_totals(&mut batch, labels.m, labels.i, proxy);
        let invalid = batch.invalid();
        start
            .into_iter()
            .zip(end)
            .enumerate()
            .map(|(k, pair)| match pair {
                (Some(h0), Some(ht)) if !invalid.lane(k) => Outcome::Value([h0 as i64, ht as i64]),
                _ => Outcome::Skipped,
            })
            .collect()
    };
    let got = collect(&plan.ensemble, plan.samples, exec, &CrossMoments::new(2, 0), observe, |acc, x| {
        acc.push_ints(&x)
    })?;
    check_skips(&got, plan.samples, plan.skip_budget)?;
    let len = plan.length() as f64;
    let value = got.stats.estimate(|a| a.covariance(0, 1) / len);
    Ok(CorrelationEstimate { value, used: got.used, skipped: got.skipped })
}

/// `<n(x, t) n(0, 0)>^c` for each offset, evolving by `T_l`.
pub fn measure_density_correlation(
    plan: &MeasurementPlan,
    offsets: &[i64],
    exec: &Execution,
) -> Result<Vec<(i64, Estimate)>, MeasureError> {
    plan.validate_run(plan.capacity, 0)?;
    let len = plan.length();
    let (l, t) = (plan.capacity, plan.time);
    let dim = offsets.len() + 1;
    let observe = |configs: &[Configuration]| -> Vec<Outcome<Vec<i64>>> {
        let mut batch = Batch::from_configs(configs);
        for _ in 0..t {
            batch.evolve(l);
        }
        let invalid = batch.invalid();
        batch
            .configs()
            .iter()
            .zip(configs)
            .enumerate()
            .map(|(k, (now, before))| {
                if invalid.lane(k) {
                    return Outcome::Skipped;
                }
                let mut row: Vec<i64> = offsets
                    .iter()
                    .map(|&x| {
                        // Site y of the shifted ring holds n(y + x, t).
                        let shifted = now.rotate_right((-x).rem_euclid(len as i64) as usize);
                        overlap(&shifted, before) as i64
                    })
                    .collect();
                row.push(before.ball_count() as i64);
                Outcome::Value(row)
            })
            .collect()
    };
    let got = collect(&plan.ensemble, plan.samples, exec, &CrossMoments::new(dim, 0), observe, |acc, x| {
        acc.push_ints(&x)
    })?;
    check_skips(&got, plan.samples, plan.skip_budget)?;
    let lf = len as f64;
    Ok(offsets
        .iter()
        .enumerate()
        .map(|(a, &x)| {
            let est = got.stats.estimate(|s| s.mean(a) / lf - (s.mean(dim - 1) / lf).powi(2));
            (x, est)
        })
        .collect())
}

fn overlap(a: &Configuration, b: &Configuration) -> u64 {
    a.words().iter().zip(b.words()).map(|(x, y)| (x & y).count_ones() as u64).sum()
}
