//! Samplers: run counting, detailed balance and the stationary law.

use bbs_core::energy;
use bbs_core::ensemble::{ball_runs, runs_delta, stream, Gge2tChain, Gge2tSpec, IidSpec};
use bbs_core::{sample_iid, Configuration, EnsembleSpec};
use rand::Rng;

fn all_configs(len: usize) -> impl Iterator<Item = Configuration> {
    (0..1u64 << len).map(move |p| Configuration::from_pattern(len, p))
}

#[test]
fn first_energy_counts_runs() {
    for len in 1..=14 {
        for c in all_configs(len).filter(|c| 2 * c.ball_count() != len) {
            assert_eq!(energy(&c, 1).unwrap(), ball_runs(&c), "{c}");
        }
    }
}

#[test]
fn runs_delta_is_exact() {
    for len in 1..=10 {
        for c in all_configs(len) {
            for x in 0..len {
                let mut d = c.clone();
                d.set(x, !c.get(x));
                let expect = ball_runs(&d) as i64 - ball_runs(&c) as i64;
                assert_eq!(runs_delta(&c, x), expect, "{c} x={x}");
            }
        }
    }
}

#[test]
fn metropolis_kernel_is_reversible() {
    let spec = Gge2tSpec::new(8, -0.7, 0.4, 1).unwrap();
    let weight = |c: &Configuration| -> f64 {
        (-spec.beta1 * ball_runs(c) as f64 - spec.beta_inf * c.ball_count() as f64).exp()
    };
    for c in all_configs(8) {
        let chain = Gge2tChain::from_state(&spec, c.clone()).unwrap();
        for x in 0..8 {
            let mut d = c.clone();
            d.set(x, !c.get(x));
            let rev = Gge2tChain::from_state(&spec, d.clone()).unwrap();
            let forward = weight(&c) * chain.acceptance(x);
            let backward = weight(&d) * rev.acceptance(x);
            assert!((forward - backward).abs() <= 1e-12 * forward.max(backward));
        }
    }
}

#[test]
fn chain_reaches_the_exact_law_on_a_small_ring() {
    let len = 6;
    let spec = Gge2tSpec::new(len, 0.5, 0.3, 7).unwrap();
    let weights: Vec<f64> = all_configs(len)
        .map(|c| (-spec.beta1 * ball_runs(&c) as f64 - spec.beta_inf * c.ball_count() as f64).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let mut chain = Gge2tChain::new(&spec).unwrap();
    chain.advance(1000);
    let mut counts = vec![0u64; 1 << len];
    let n = 200_000;
    for _ in 0..n {
        chain.advance(30);
        let p = chain.state().words()[0] as usize;
        counts[p] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&weights)
        .map(|(&o, &w)| {
            let e = n as f64 * w / z;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 63 degrees of freedom; samples are 5 sweeps apart.
    assert!(chi2 < 200.0, "chi2 = {chi2}");
}

#[test]
fn iid_density_within_band() {
    let mut rng = stream(0xE1);
    for &p in &[0.05, 0.3, 0.49] {
        let spec = IidSpec::new(100_000, p, rng.random()).unwrap();
        let c = sample_iid(&spec);
        let sd = (p * (1.0 - p) / 1e5).sqrt();
        let got = c.ball_count() as f64 / 1e5;
        assert!((got - p).abs() < 5.0 * sd, "p={p} got {got}");
    }
}

#[test]
fn samples_are_reproducible_and_distinct() {
    let spec = EnsembleSpec::Iid(IidSpec::new(1000, 0.3, 42).unwrap());
    assert_eq!(spec.sample(3), spec.sample(3));
    assert_ne!(spec.sample(3), spec.sample(4));
    let text = spec.to_string();
    assert_eq!(text.parse::<EnsembleSpec>().unwrap(), spec);
}
