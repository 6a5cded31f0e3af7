//! Exhaustive checks of the carrier dynamics on small rings.

use bbs_core::carrier::{evolve_open, evolve_periodic, exit_load, periodic_load};
use bbs_core::energy::{energy, soliton_content, EnergySpectrum};
use bbs_core::{Configuration, DynamicsError};

fn all_configs(max_len: usize) -> impl Iterator<Item = Configuration> {
    (1..=max_len).flat_map(|len| (0..1u64 << len).map(move |p| Configuration::from_pattern(len, p)))
}

fn half_filled(c: &Configuration) -> bool {
    2 * c.ball_count() == c.len()
}

/// Least fixed point by literal iteration of the pass map from load zero.
fn iterated_fixed_point(c: &Configuration, cap: u32) -> u32 {
    let mut u = 0;
    for _ in 0..=cap + 1 {
        let next = exit_load(c, cap, u);
        if next == u {
            return u;
        }
        u = next;
    }
    panic!("pass map iteration did not settle");
}

fn fixed_points(c: &Configuration, cap: u32) -> Vec<u32> {
    (0..=cap).filter(|&u| exit_load(c, cap, u) == u).collect()
}

#[test]
fn periodic_load_is_the_least_fixed_point() {
    for c in all_configs(12) {
        for cap in 1..=5 {
            let fps = fixed_points(&c, cap);
            let least = iterated_fixed_point(&c, cap);
            assert_eq!(fps[0], least);
            match periodic_load(&c, cap) {
                Ok(u) => {
                    assert_eq!(fps, vec![u], "{c} cap {cap}");
                }
                Err(DynamicsError::CarrierNonConvergent { .. }) => {
                    assert!(half_filled(&c), "{c} cap {cap}");
                    assert!(fps.len() > 1);
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn conservation_and_commutativity() {
    for c in all_configs(12).filter(|c| !half_filled(c)) {
        let q = c.ball_count();
        let spectrum: Vec<u64> = (1..=5).map(|k| energy(&c, k).unwrap()).collect();
        let evolved: Vec<Configuration> =
            (1..=4).map(|l| evolve_periodic(&c, l).unwrap().0).collect();
        for (li, e) in evolved.iter().enumerate() {
            assert_eq!(e.ball_count(), q);
            for k in 1..=5 {
                assert_eq!(energy(e, k).unwrap(), spectrum[k as usize - 1], "{c} l={} k={k}", li + 1);
            }
        }
        for l in 1..=4u32 {
            for i in (l + 1)..=4u32 {
                let a = evolve_periodic(&evolved[l as usize - 1], i).unwrap().0;
                let b = evolve_periodic(&evolved[i as usize - 1], l).unwrap().0;
                assert_eq!(a, b, "{c}: T_{l} T_{i} != T_{i} T_{l}");
            }
        }
    }
}

#[test]
fn capacity_one_is_a_right_shift() {
    for c in all_configs(11) {
        assert_eq!(evolve_periodic(&c, 1).unwrap().0, c.rotate_right(1), "{c}");
    }
}

#[test]
fn local_ball_conservation() {
    for c in all_configs(10).filter(|c| !half_filled(c)) {
        for cap in 1..=4 {
            let (out, trace) = evolve_periodic(&c, cap).unwrap();
            let n = c.len();
            let j = trace.loads();
            assert_eq!(trace.exit(), j[0]);
            for x in 0..n {
                let next = if x + 1 == n { trace.exit() } else { j[x + 1] };
                let dn = out.get(x) as i64 - c.get(x) as i64;
                assert_eq!(dn, j[x] as i64 - next as i64);
                assert!(j[x] <= cap);
            }
        }
    }
}

#[test]
fn energies_saturate_and_count_runs() {
    for c in all_configs(12).filter(|c| 2 * c.ball_count() < c.len()) {
        let q = c.ball_count() as u64;
        let cap = c.len() as u32;
        let spec = EnergySpectrum::of(&c, cap + 1).unwrap();
        let e = spec.energies();
        assert_eq!(e[cap as usize - 1], q);
        let m = soliton_content(&spec).unwrap();
        let balls: u64 = m.iter().enumerate().map(|(k, &mk)| (k as u64 + 1) * mk).sum();
        assert_eq!(balls, q);
        assert_eq!(m.iter().sum::<u64>(), e[0], "E_1 counts solitons");
        for k in 1..e.len() {
            assert!(e[k - 1] <= e[k] && e[k] <= e[k - 1] + e[0]);
        }
    }
}

#[test]
fn open_pass_keeps_loads_in_range() {
    for c in all_configs(9) {
        for cap in 1..=3 {
            for u0 in 0..=cap {
                let (out, trace) = evolve_open(&c, cap, u0).unwrap();
                let dq = out.ball_count() as i64 - c.ball_count() as i64;
                assert_eq!(dq, u0 as i64 - trace.exit() as i64);
                for w in trace.loads().windows(2) {
                    assert!(w[0].abs_diff(w[1]) <= 1);
                }
            }
        }
    }
}
