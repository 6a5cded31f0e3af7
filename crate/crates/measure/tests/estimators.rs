//! Monte Carlo estimators on small rings: trivial limits, reproducibility,
//! error scaling and agreement with exact results.

use bbs_core::batch::Batch;
use bbs_core::ensemble::stream;
use bbs_core::{evolve_periodic, generalized_current_field, sample_iid, EnsembleSpec, IidSpec};
use bbs_measure::correlation::current_totals;
use bbs_measure::transfer::gaussian_curve;
use bbs_measure::*;
use bbs_tba::{c2_analytic, equal_time_variance, four_index_correlation, mean_currents, Capacity, Fugacities};
use rand::Rng;

fn iid(len: usize, p: f64, seed: u64) -> EnsembleSpec {
    EnsembleSpec::Iid(IidSpec::new(len, p, seed).unwrap())
}

fn one() -> Execution {
    Execution::with_workers(1)
}

fn agree(a: Estimate, b: Estimate, sigmas: f64) -> bool {
    (a.value - b.value).abs() <= sigmas * a.error.hypot(b.error)
}

#[test]
fn empty_ring_transfers_nothing() {
    let plan = MeasurementPlan::new(iid(320, 0.0, 3), 4, 30, 300);
    let c = measure_cumulants(&plan, &one()).unwrap();
    for e in c.scaled {
        assert_eq!(e.value, 0.0);
        assert_eq!(e.error, 0.0);
    }
    assert_eq!(c.used, 300);
}

#[test]
fn zero_time_is_a_point_mass() {
    let plan = MeasurementPlan::new(iid(200, 0.3, 5), 3, 0, 500);
    let h = measure_histogram(&plan, &one()).unwrap();
    assert_eq!(h.probabilities(), vec![(0, 1.0)]);
    assert_eq!(rate_function_curve(0.5, 3, 0).unwrap(), vec![(0, 1.0)]);

    for w in [Weight::Abs, Weight::Square] {
        let s = sum_rule_check(&plan, w, &one()).unwrap();
        assert_eq!((s.lhs.value, s.rhs.value), (0.0, 0.0));
        assert_eq!(s.z_score(), 0.0);
    }
}

#[test]
fn wrap_bound_is_enforced_unless_overridden() {
    let ens = iid(500, 0.3, 1);
    let need = no_wrap_length(&ens, 4, 100).unwrap();
    let plan = MeasurementPlan::new(ens, 4, 100, 10);
    match measure_cumulants(&plan, &one()) {
        Err(e @ MeasureError::WrapAround { .. }) => assert!(e.is_validation()),
        other => panic!("expected a wrap error, got {other:?}"),
    }
    assert!(need > 500);
    assert!(measure_cumulants(&plan.allowing_wrap(), &one()).is_ok());
    let zero = MeasurementPlan::new(iid(500, 0.3, 1), 4, 1, 0);
    assert!(matches!(measure_cumulants(&zero, &one()), Err(MeasureError::InvalidPlan(_))));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let plan = MeasurementPlan::new(iid(448, 0.25, 9), 3, 40, 1500);
    let a = measure_cumulants(&plan, &one()).unwrap();
    let b = measure_cumulants(&plan, &Execution::with_workers(3)).unwrap();
    assert_eq!(a, b);
    let ha = measure_histogram(&plan, &one()).unwrap();
    let hb = measure_histogram(&plan, &Execution::with_workers(4)).unwrap();
    assert_eq!(ha, hb);
}

#[test]
fn short_run_matches_exact_cumulants() {
    let (p, l, t) = (0.3, 2, 60);
    let f = Fugacities::from_density(p).unwrap();
    let len = no_wrap_length(&iid(1, p, 0), l, t).unwrap().next_multiple_of(64);
    let plan = MeasurementPlan::new(iid(len, p, 11), l, t, 20_000);
    let c = measure_cumulants(&plan, &one()).unwrap();
    let j = mean_currents(f, Capacity::Finite(l)).ball;
    let c2 = c2_analytic(f, Capacity::Finite(l));
    assert!(c.scaled[0].covers(j, 3.0), "{:?} vs {j}", c.scaled[0]);
    assert!(c.scaled[1].covers(c2, 3.0), "{:?} vs {c2}", c.scaled[1]);
}

#[test]
fn doubling_samples_shrinks_errors_by_root_two() {
    let len = 640;
    let run = |samples| {
        let plan = MeasurementPlan::new(iid(len, 0.3, 21), 3, 40, samples);
        measure_cumulants(&plan, &one()).unwrap().scaled[1].error
    };
    let ratio = run(25_600) / run(51_200);
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn histogram_mean_and_curves() {
    let (p, l, t) = (0.3, 3, 50);
    let z = p / (1.0 - p);
    let len = no_wrap_length(&iid(1, p, 0), l, t).unwrap().next_multiple_of(64);
    let plan = MeasurementPlan::new(iid(len, p, 2), l, t, 10_000);
    let h = measure_histogram(&plan, &one()).unwrap();
    let j = mean_currents(Fugacities::iid(z).unwrap(), Capacity::Finite(l)).ball;
    assert!(h.mean_estimate().covers(j * t as f64, 3.0));
    let total: f64 = h.probabilities().iter().map(|p| p.1).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let theory = rate_function_curve(z, l, t).unwrap();
    assert_eq!(theory.len() as u64, l as u64 * t + 1);
    assert!((theory.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-12);
    let peak = theory.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert!((peak as f64 - j * t as f64).abs() <= 1.0);
    let g = gaussian_curve(10.0, 4.0, 30);
    assert_eq!(g.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0, 10);
}

/// The unbounded current is the carrier load, checked against the field
/// built from a second carrier that can never fill.
#[test]
fn unbounded_current_is_the_carrier_load() {
    let mut rng = stream(0xA1);
    for _ in 0..200 {
        let len = rng.random_range(5..120);
        let p = rng.random_range(0.05..0.45);
        let c = sample_iid(&IidSpec::new(len, p, rng.random()).unwrap());
        if 2 * c.ball_count() >= len {
            continue;
        }
        let l = rng.random_range(1..8);
        let field = generalized_current_field(&c, l, len as u32 + 1).unwrap();
        let (_, trace) = evolve_periodic(&c, l).unwrap();
        assert_eq!(field.values(), trace.loads(), "{c} l={l}");
    }
    let configs: Vec<_> = (0..40).map(|i| iid(90, 0.35, 4).sample(i)).collect();
    let mut batch = Batch::from_configs(&configs);
    let fast = current_totals(&mut batch, 4, 99, 99);
    let slow = current_totals(&mut batch, 4, 98, 99);
    for (k, c) in configs.iter().enumerate() {
        let exact = generalized_current_field(c, 4, 200).ok().map(|f| f.total());
        assert_eq!(fast[k], exact);
        assert_eq!(slow[k], exact);
    }
}

#[test]
fn equal_time_correlation_is_the_transfer_matrix_variance() {
    let (p, l) = (0.3, 3);
    let plan = MeasurementPlan::new(iid(1024, p, 8), l, 0, 20_000).with_dyn_capacity(1);
    let labels = CurrentLabels { m: l, i: 99, j: 99 };
    let got = measure_generalized_correlation(&plan, labels, &one()).unwrap();
    let f = equal_time_variance(l, p / (1.0 - p)).unwrap();
    assert!(got.value.covers(f, 3.0), "{:?} vs {f}", got.value);
}

#[test]
fn correlation_settles_once_dynamics_exceeds_min_capacity() {
    let (p, m, l, t) = (0.3, 2, 3, 60);
    let fug = Fugacities::from_density(p).unwrap();
    let len = no_wrap_length(&iid(1, p, 0), 4, t).unwrap().next_multiple_of(64);
    let labels = CurrentLabels { m, i: 99, j: 99 };
    let at = |n: u32| {
        let plan = MeasurementPlan::new(iid(len, p, 12), l, t, 6_000).with_dyn_capacity(n);
        measure_generalized_correlation(&plan, labels, &one()).unwrap().value
    };
    let (a, b) = (at(2), at(4));
    assert!(agree(a, b, 3.0), "{a:?} vs {b:?}");
    let exact = four_index_correlation(fug, Capacity::Infinite, Capacity::Infinite, Capacity::Finite(l), Capacity::Finite(m))
        .unwrap();
    assert!(b.covers(exact, 3.0), "{b:?} vs {exact}");
}

#[test]
fn finite_labels_use_the_scalar_path() {
    let plan = MeasurementPlan::new(iid(200, 0.25, 3), 2, 5, 512).allowing_wrap();
    let labels = CurrentLabels { m: 2, i: 3, j: 1 };
    let got = measure_generalized_correlation(&plan, labels, &one()).unwrap();
    assert!(got.value.value.is_finite() && got.value.error > 0.0);
    let bad = CurrentLabels { m: 0, i: 3, j: 1 };
    assert!(measure_generalized_correlation(&plan, bad, &one()).is_err());
}

#[test]
fn density_correlation_is_causal() {
    let (p, l, t) = (0.25, 2, 8);
    let len = no_wrap_length(&iid(1, p, 0), l, t).unwrap().next_multiple_of(64);
    let plan = MeasurementPlan::new(iid(len, p, 13), l, t, 20_000);
    let offsets: Vec<i64> = (-12..=30).collect();
    let s = measure_density_correlation(&plan, &offsets, &one()).unwrap();
    for &(x, e) in &s {
        if x < 0 {
            assert!(e.covers(0.0, 4.0), "x={x}: {e:?}");
        }
    }
    let total: f64 = s.iter().map(|p| p.1.value).sum();
    assert!((total - p * (1.0 - p)).abs() < 0.02, "sum {total}");
    let peak = s.iter().max_by(|a, b| a.1.value.total_cmp(&b.1.value)).unwrap();
    assert!(peak.0 > 0 && peak.1.value > 5.0 * peak.1.error);
}

#[test]
fn sum_rule_holds_at_short_times() {
    let (p, l, t) = (0.2, 3, 10);
    let len = no_wrap_length(&iid(1, p, 0), l, t).unwrap().next_multiple_of(64);
    for w in [Weight::Abs, Weight::Square] {
        let plan = MeasurementPlan::new(iid(len, p, 14), l, t, 30_000);
        let s = sum_rule_check(&plan, w, &one()).unwrap();
        assert!(s.z_score().abs() < 3.0, "{w:?}: {s:?}");
        assert!(s.lhs.value < 0.0 && s.lhs.value.abs() > 10.0 * s.lhs.error);
    }
}

#[test]
fn pseudoenergy_covariance_on_a_short_run() {
    let plan = MeasurementPlan::new(iid(4000, 0.4, 15), 1, 0, 20_000);
    let got = measure_pseudoenergy_covariance(&plan, 3, &one()).unwrap();
    let want = pseudoenergy_predictions(&plan, 3).unwrap();
    for i in 1..=3 {
        assert!(got.at(i, i).covers(want[i - 1], 4.0), "i={i}: {:?} vs {}", got.at(i, i), want[i - 1]);
        for j in i + 1..=3 {
            assert!(got.at(i, j).covers(0.0, 4.0), "({i},{j}): {:?}", got.at(i, j));
            assert_eq!(got.at(i, j), got.at(j, i));
        }
    }
}

#[test]
fn small_rings_exclude_too_many_samples() {
    let plan = MeasurementPlan::new(iid(40, 0.3, 16), 1, 0, 1000);
    match measure_pseudoenergy_covariance(&plan, 5, &one()) {
        Err(MeasureError::ExcessExclusions { excluded, samples }) => {
            assert!(excluded > 10);
            assert_eq!(samples, 1000);
        }
        other => panic!("expected exclusions, got {other:?}"),
    }
}
