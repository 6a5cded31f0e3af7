//! Merging partial accumulators is exact, order-free and equals one pass.

use bbs_measure::stats::{Accumulator, Blocked, Counts, CrossMoments, PowerSums};
use proptest::prelude::*;

fn split<T: Clone>(xs: &[T], cuts: &[usize]) -> Vec<Vec<T>> {
    let mut bounds: Vec<usize> = cuts.iter().map(|&c| c % (xs.len() + 1)).collect();
    bounds.push(0);
    bounds.push(xs.len());
    bounds.sort_unstable();
    bounds.windows(2).map(|w| xs[w[0]..w[1]].to_vec()).collect()
}

fn fold<A: Accumulator>(empty: &A, parts: impl IntoIterator<Item = A>) -> A {
    parts.into_iter().fold(empty.clone(), |mut acc, p| {
        acc.merge(&p);
        acc
    })
}

proptest! {
    #[test]
    fn power_sums_merge_in_any_order(
        xs in prop::collection::vec(0i64..5000, 0..200),
        cuts in prop::collection::vec(0usize..200, 0..6),
    ) {
        let mut whole = PowerSums::default();
        xs.iter().for_each(|&x| whole.push(x));
        let parts: Vec<PowerSums> = split(&xs, &cuts)
            .into_iter()
            .map(|c| { let mut p = PowerSums::default(); c.iter().for_each(|&x| p.push(x)); p })
            .collect();
        let forward = fold(&PowerSums::default(), parts.clone());
        let backward = fold(&PowerSums::default(), parts.iter().rev().cloned());
        prop_assert_eq!(&forward, &whole);
        prop_assert_eq!(&backward, &whole);
        // Grouping: (a + b) + c == a + (b + c) on every split.
        if parts.len() >= 3 {
            let mut left = parts[0].clone();
            left.merge(&parts[1]);
            left.merge(&parts[2]);
            let mut right = parts[1].clone();
            right.merge(&parts[2]);
            let mut outer = parts[0].clone();
            outer.merge(&right);
            prop_assert_eq!(left, outer);
        }
    }

    #[test]
    fn cross_moments_of_reals_merge_exactly(
        rows in prop::collection::vec(prop::array::uniform3(-50.0f64..50.0), 1..120),
        cuts in prop::collection::vec(0usize..120, 0..5),
    ) {
        let mut whole = CrossMoments::new(3, 40);
        rows.iter().for_each(|r| whole.push_reals(r));
        let parts: Vec<CrossMoments> = split(&rows, &cuts)
            .into_iter()
            .map(|c| { let mut m = CrossMoments::new(3, 40); c.iter().for_each(|r| m.push_reals(r)); m })
            .collect();
        prop_assert_eq!(&fold(&CrossMoments::new(3, 40), parts.iter().rev().cloned()), &whole);
        let mut undo = whole.clone();
        undo.merge(&parts[0]);
        undo.remove(&parts[0]);
        prop_assert_eq!(undo, whole);
    }

    #[test]
    fn histogram_counts_merge(xs in prop::collection::vec(0u64..40, 0..300), cut in 0usize..300) {
        let cut = cut.min(xs.len());
        let mut whole = Counts::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Counts::default(), Counts::default());
        xs[..cut].iter().for_each(|&x| a.push(x));
        xs[cut..].iter().for_each(|&x| b.push(x));
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        prop_assert_eq!(&ab, &whole);
        prop_assert_eq!(&ba, &whole);
    }
}

#[test]
fn jackknife_of_the_mean_is_the_standard_error() {
    let xs: Vec<i64> = (0..1000).map(|i| (i * 7919 % 101) as i64).collect();
    let mut blocks = Blocked::new(&PowerSums::default(), xs.len());
    for (i, &x) in xs.iter().enumerate() {
        blocks.block_mut(i).push(x);
    }
    let est = blocks.estimate(|a| a.mean());
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<i64>() as f64 / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((est.value - mean).abs() < 1e-12);
    assert!((est.error - (var / n).sqrt()).abs() < 1e-10);
}
