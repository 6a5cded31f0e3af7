//! Statistics of `N_t`, the number of balls carried across the bond
//! entering site 0 during `t` steps of `T_l`.

use bbs_core::batch::Batch;
use bbs_core::Configuration;
use bbs_tba::ldf::rate;
use bbs_tba::Capacity;

use crate::error::{invalid, MeasureError};
use crate::plan::MeasurementPlan;
use crate::runner::{check_skips, collect, mark_skipped, Execution, Outcome};
use crate::stats::{Accumulator, Counts, Estimate, PowerSums};

/// `N_t` for every ring of the batch.
pub fn transfer_counts(configs: &[Configuration], l: u32, time: u64) -> Vec<Outcome<u64>> {
    let mut batch = Batch::from_configs(configs);
    let mut totals = vec![0u64; configs.len()];
    for _ in 0..time {
        let sweep = batch.evolve(l);
        let origin = sweep.origin_values();
        for (t, o) in totals.iter_mut().zip(origin.iter()) {
            *t += o;
        }
    }
    mark_skipped(&batch, totals)
}

/// Scaled cumulants `<N_t^k>^c / t`, `k = 1..=4`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantEstimates {
    pub time: u64,
    pub scaled: [Estimate; 4],
    pub used: u64,
    pub skipped: u64,
}

pub fn measure_cumulants(plan: &MeasurementPlan, exec: &Execution) -> Result<CumulantEstimates, MeasureError> {
    plan.validate_run(plan.capacity, 1)?;
    let (l, t) = (plan.capacity, plan.time);
    let got = collect(
        &plan.ensemble,
        plan.samples,
        exec,
        &PowerSums::default(),
        |c| transfer_counts(c, l, t),
        |acc, n| acc.push(n as i64),
    )?;
    check_skips(&got, plan.samples, plan.skip_budget)?;
    let scaled = std::array::from_fn(|k| got.stats.estimate(|a| a.cumulants()[k] / t as f64));
    Ok(CumulantEstimates { time: t, scaled, used: got.used, skipped: got.skipped })
}

/// Integer histogram of `N_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferHistogram {
    pub time: u64,
    pub capacity: u32,
    pub counts: Counts,
    pub skipped: u64,
}

impl TransferHistogram {
    pub fn total(&self) -> u64 {
        self.counts.count()
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self.counts.bins().iter().map(|(&x, &c)| x as f64 * c as f64).sum();
        s / self.total() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let s: f64 = self.counts.bins().iter().map(|(&x, &c)| (x as f64 - m).powi(2) * c as f64).sum();
        s / self.total() as f64
    }

    /// Standard error of the mean.
    pub fn mean_estimate(&self) -> Estimate {
        Estimate { value: self.mean(), error: (self.variance() / self.total() as f64).sqrt() }
    }

    /// `(N, count / total)` over the observed bins.
    pub fn probabilities(&self) -> Vec<(u64, f64)> {
        let n = self.total() as f64;
        self.counts.bins().iter().map(|(&x, &c)| (x, c as f64 / n)).collect()
    }

    /// Largest possible value `l * t`.
    pub fn max_value(&self) -> u64 {
        self.capacity as u64 * self.time
    }
}

pub fn measure_histogram(plan: &MeasurementPlan, exec: &Execution) -> Result<TransferHistogram, MeasureError> {
    plan.validate_run(plan.capacity, 0)?;
    let (l, t) = (plan.capacity, plan.time);
    let got = collect(
        &plan.ensemble,
        plan.samples,
        exec,
        &Counts::default(),
        |c| transfer_counts(c, l, t),
        |acc, n| acc.push(n),
    )?;
    check_skips(&got, plan.samples, plan.skip_budget)?;
    Ok(TransferHistogram { time: t, capacity: l, counts: got.stats.total(), skipped: got.skipped })
}

fn normalize(mut logs: Vec<(u64, f64)>) -> Vec<(u64, f64)> {
    let top = logs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|p| (p.1 - top).exp()).sum();
    for p in logs.iter_mut() {
        p.1 = (p.1 - top).exp() / z;
    }
    logs
}

/// `exp(-t G(N/t))` normalized over `N = 0..=l t` for the product state of
/// fugacity `z`.
pub fn rate_function_curve(z: f64, l: u32, time: u64) -> Result<Vec<(u64, f64)>, MeasureError> {
    if time == 0 {
        return Ok(vec![(0, 1.0)]);
    }
    let t = time as f64;
    let logs = (0..=l as u64 * time)
        .map(|n| Ok((n, -t * rate(z, Capacity::Finite(l), n as f64 / t)?.value)))
        .collect::<Result<Vec<_>, MeasureError>>()?;
    Ok(normalize(logs))
}

/// Discretized Gaussian of the given mean and variance, normalized over
/// `N = 0..=max`.
pub fn gaussian_curve(mean: f64, variance: f64, max: u64) -> Vec<(u64, f64)> {
    normalize((0..=max).map(|n| (n, -(n as f64 - mean).powi(2) / (2.0 * variance))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Probability mass in one tail beyond the fit Gaussian, observed and predicted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailExcess {
    pub side: Side,
    pub observed: Estimate,
    pub predicted: f64,
}

impl TailExcess {
    /// Observed excess nonzero at `sigmas` and of the predicted sign.
    pub fn agrees(&self, sigmas: f64) -> bool {
        self.observed.value.signum() == self.predicted.signum()
            && self.observed.value.abs() > sigmas * self.observed.error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateComparison {
    /// Bins `|N - mean| <= window_sigmas * sd` used for the chi-square.
    pub window: (u64, u64),
    pub bins: usize,
    /// Pearson chi-square of the counts against the rate-function curve.
    pub chi2: f64,
    pub tails: [TailExcess; 2],
}

impl RateComparison {
    /// Chi-square within three standard deviations of its mean.
    pub fn chi2_acceptable(&self) -> bool {
        let k = self.bins as f64;
        self.chi2 <= k + 3.0 * (2.0 * k).sqrt()
    }
}

/// Compares the histogram with the rate-function curve inside the central
/// window and measures the tail mass in excess of the moment-matched
/// Gaussian beyond `tail_sigmas` standard deviations.
pub fn compare_with_rate_function(
    hist: &TransferHistogram,
    z: f64,
    window_sigmas: f64,
    tail_sigmas: f64,
) -> Result<RateComparison, MeasureError> {
    if hist.total() == 0 || hist.time == 0 {
        return Err(invalid("comparison needs a nonempty histogram at t >= 1"));
    }
    let theory = rate_function_curve(z, hist.capacity, hist.time)?;
    let (mean, var) = (hist.mean(), hist.variance());
    let sd = var.sqrt();
    let gauss = gaussian_curve(mean, var, hist.max_value());
    let n = hist.total() as f64;

    let lo = (mean - window_sigmas * sd).ceil().max(0.0) as u64;
    let hi = ((mean + window_sigmas * sd).floor() as u64).min(hist.max_value());
    let mut chi2 = 0.0;
    for x in lo..=hi {
        let expect = n * theory[x as usize].1;
        chi2 += (hist.counts.get(x) as f64 - expect).powi(2) / expect;
    }

    let tail = |side: Side| {
        let inside = |x: u64| match side {
            Side::Left => (x as f64) < mean - tail_sigmas * sd,
            Side::Right => (x as f64) > mean + tail_sigmas * sd,
        };
        let (mut obs, mut count, mut pred) = (0.0, 0.0, 0.0);
        for x in (0..=hist.max_value()).filter(|&x| inside(x)) {
            let c = hist.counts.get(x) as f64;
            let g = gauss[x as usize].1;
            obs += c / n - g;
            count += c;
            pred += theory[x as usize].1 - g;
        }
        TailExcess { side, observed: Estimate { value: obs, error: count.sqrt() / n }, predicted: pred }
    };
    Ok(RateComparison {
        window: (lo, hi),
        bins: (hi - lo + 1) as usize,
        chi2,
        tails: [tail(Side::Left), tail(Side::Right)],
    })
}
