//! Sampling loop: batches of 256 rings fanned out over a worker pool and
//! folded back in sample-index order.

use bbs_core::batch::{Batch, LANES};
use bbs_core::{Configuration, EnsembleSpec};
use rayon::prelude::*;

use crate::error::MeasureError;
use crate::stats::{block_count, block_of, Accumulator, Blocked};

/// Worker count for the sampling loop; `0` lets the pool pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Execution {
    pub workers: usize,
}

impl Execution {
    pub fn with_workers(workers: usize) -> Self {
        Execution { workers }
    }
}

/// What one ring contributed.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<S> {
    Value(S),
    /// Ambiguous periodic carrier.
    Skipped,
    /// Observable undefined for this ring.
    Excluded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collected<A> {
    pub stats: Blocked<A>,
    pub used: u64,
    pub skipped: u64,
    pub excluded: u64,
}

/// Lanes flagged invalid by the batch become [`Outcome::Skipped`].
pub(crate) fn mark_skipped<S>(batch: &Batch, values: Vec<S>) -> Vec<Outcome<S>> {
    let invalid = batch.invalid();
    values
        .into_iter()
        .enumerate()
        .map(|(k, v)| if invalid.lane(k) { Outcome::Skipped } else { Outcome::Value(v) })
        .collect()
}

/// Draws `samples` rings, hands them to `observe` up to 256 at a time and
/// pushes each value into the accumulator of its jackknife block.
pub(crate) fn collect<A, S, O, P>(
    ensemble: &EnsembleSpec,
    samples: u64,
    exec: &Execution,
    empty: &A,
    observe: O,
    push: P,
) -> Result<Collected<A>, MeasureError>
where
    A: Accumulator + Send + Sync,
    S: Send,
    O: Fn(&[Configuration]) -> Vec<Outcome<S>> + Sync,
    P: Fn(&mut A, S) + Sync,
{
    let blocks = block_count(samples);
    let batches = samples.div_ceil(LANES as u64);
    let run = |b: u64| -> (Vec<(usize, A)>, u64, u64) {
        let start = b * LANES as u64;
        let end = (start + LANES as u64).min(samples);
        let configs: Vec<Configuration> = (start..end).map(|i| ensemble.sample(i)).collect();
        let outcomes = observe(&configs);
        debug_assert_eq!(outcomes.len(), configs.len());
        let mut parts: Vec<(usize, A)> = Vec::new();
        let (mut skipped, mut excluded) = (0, 0);
        for (i, out) in (start..end).zip(outcomes) {
            match out {
                Outcome::Value(s) => {
                    let blk = block_of(i, samples, blocks);
                    if parts.last().map(|p| p.0) != Some(blk) {
                        parts.push((blk, empty.clone()));
                    }
                    push(&mut parts.last_mut().expect("pushed above").1, s);
                }
                Outcome::Skipped => skipped += 1,
                Outcome::Excluded => excluded += 1,
            }
        }
        (parts, skipped, excluded)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(exec.workers)
        .build()
        .map_err(|e| MeasureError::Workers(e.to_string()))?;
    let results: Vec<_> = pool.install(|| (0..batches).into_par_iter().map(run).collect());

    let mut stats = Blocked::new(empty, blocks);
    let (mut skipped, mut excluded) = (0, 0);
    for (parts, s, e) in results {
        for (blk, acc) in parts {
            stats.block_mut(blk).merge(&acc);
        }
        skipped += s;
        excluded += e;
    }
    let used = stats.blocks().iter().map(|b| b.count()).sum();
    Ok(Collected { stats, used, skipped, excluded })
}

pub(crate) fn check_skips<A>(c: &Collected<A>, samples: u64, budget: u64) -> Result<(), MeasureError> {
    if c.skipped > budget {
        return Err(MeasureError::SkipBudgetExceeded { skipped: c.skipped, samples, budget });
    }
    Ok(())
}
