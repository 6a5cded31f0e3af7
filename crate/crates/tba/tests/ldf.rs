use bbs_tba::ldf::{cumulants_2t, scaled_cumulants};
use bbs_tba::{alpha_of, mean_currents, rate, rate_2t_inf, scgf, scgf_2t, AnalyticsError, Capacity, Fugacities};
use proptest::prelude::*;

const F: fn(u32) -> Capacity = Capacity::Finite;
const INF: Capacity = Capacity::Infinite;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

fn z_of(p: f64) -> f64 {
    p / (1.0 - p)
}

#[test]
fn printed_scgf_derivatives() {
    let s = scgf(z_of(0.3), F(10), 0.0).unwrap();
    assert_eq!(s.value, 0.0);
    assert!(close(s.derivative, 0.7490144, 1e-7));
    assert!(close(s.second, 1.3016578, 1e-7));
}

#[test]
fn scgf_derivatives_are_tilted_currents() {
    for z in [0.1, 0.4286, 0.9] {
        for l in [F(1), F(3), F(10), F(40), INF] {
            let lambdas: &[f64] = if l.is_infinite() { &[-3.0, -0.5, 0.0, 0.05] } else { &[-6.0, -1.0, 0.0, 0.7, 4.0] };
            for &lam in lambdas {
                if l.is_infinite() && z * lam.exp() >= 0.95 {
                    continue;
                }
                let p = scgf(z, l, lam).unwrap();
                let tilted = Fugacities::iid(z * lam.exp()).map(|f| mean_currents(f, l).ball);
                if let Ok(j) = tilted {
                    assert!(close(p.derivative, j, 1e-12), "z={z} l={l} lam={lam}");
                }
                let h = 1e-4;
                let fd = |g: &dyn Fn(f64) -> f64| {
                    (8.0 * (g(lam + h) - g(lam - h)) - (g(lam + 2.0 * h) - g(lam - 2.0 * h))) / (12.0 * h)
                };
                let d1 = fd(&|x| scgf(z, l, x).unwrap().value);
                let d2 = fd(&|x| scgf(z, l, x).unwrap().derivative);
                assert!(close(d1, p.derivative, 1e-8), "z={z} l={l} lam={lam}");
                assert!(close(d2, p.second, 1e-7), "z={z} l={l} lam={lam}");
            }
        }
    }
}

#[test]
fn scgf_closed_forms_and_domain() {
    let z = 0.3;
    for lam in [-2.0, -0.2, 0.5, 1.0] {
        let direct = ((1.0 - z) / (1.0 - z * f64::exp(lam))).ln();
        assert!(close(scgf(z, INF, lam).unwrap().value, direct, 1e-14));
        for l in [1u32, 4, 9] {
            let zl = |x: f64| (1.0 - x.powi(l as i32 + 1)) / (1.0 - x);
            let expect = (zl(z * f64::exp(lam)) / zl(z)).ln();
            assert!(close(scgf(z, F(l), lam).unwrap().value, expect, 1e-13));
        }
    }
    assert!(matches!(scgf(z, INF, 1.3), Err(AnalyticsError::DivergentQuantity(_))));
    assert!(scgf(1.2, F(3), 0.0).is_err());
    for lam in [-400.0, -60.0, 60.0, 400.0] {
        let p = scgf(0.3, F(10), lam).unwrap();
        assert!(p.value.is_finite() && p.derivative.is_finite() && p.second >= 0.0);
    }
    let far = scgf(0.3, F(10), 400.0).unwrap();
    assert!(close(far.derivative, 10.0, 1e-12));
}

#[test]
fn third_cumulant_matches_finite_difference() {
    for z in [0.2, 0.6] {
        for l in [F(2), F(10), INF] {
            let [c1, c2, c3] = scaled_cumulants(z, l).unwrap();
            let h = 1e-4;
            let s = |x: f64| scgf(z, l, x).unwrap().second;
            assert!(close((s(h) - s(-h)) / (2.0 * h), c3, 1e-7));
            assert_eq!(c1, scgf(z, l, 0.0).unwrap().derivative);
            assert_eq!(c2, scgf(z, l, 0.0).unwrap().second);
        }
    }
}

#[test]
fn rate_function_endpoints_and_minimum() {
    for z in [0.15, 0.4286, 0.8] {
        for l in [1u32, 3, 10] {
            let g0 = rate(z, F(l), 0.0).unwrap();
            let expect = ((1.0 - z.powi(l as i32 + 1)) / (1.0 - z)).ln();
            assert!(close(g0.value, expect, 1e-14));
            let near = rate(z, F(l), 1e-9).unwrap();
            assert!(close(near.value, expect, 1e-6));
            let mean = scgf(z, F(l), 0.0).unwrap().derivative;
            let at_mean = rate(z, F(l), mean).unwrap();
            assert!(at_mean.value.abs() < 1e-13 && at_mean.multiplier.abs() < 1e-9);
            let top = rate(z, F(l), l as f64).unwrap();
            let below = rate(z, F(l), l as f64 - 1e-9).unwrap();
            assert!(close(below.value, top.value, 1e-6));
            assert!(rate(z, F(l), l as f64 + 0.1).is_err());
            assert!(rate(z, F(l), -0.1).is_err());
        }
        let argmin = z / (1.0 - z);
        assert!(rate(z, INF, argmin).unwrap().value.abs() < 1e-14);
        for d in [-0.05, 0.05] {
            assert!(rate(z, INF, argmin + d).unwrap().value > 0.0);
        }
        assert!(close(rate(z, INF, 0.0).unwrap().value, -(1.0 - z).ln(), 1e-15));
    }
}

#[test]
fn legendre_round_trip_and_multiplier() {
    for z in [0.2, 0.4286] {
        for l in [F(2), F(10), INF] {
            let top = l.as_finite().map_or(6.0, |n| n as f64);
            for k in 1..40 {
                let j = top * k as f64 / 40.0;
                let r = rate(z, l, j).unwrap();
                let f = scgf(z, l, r.multiplier).unwrap();
                assert!(close(f.derivative, j, 1e-11), "z={z} l={l} j={j}");
                assert!((f.value + r.value - j * r.multiplier).abs() < 1e-11 * (1.0 + r.value.abs()));
                assert!(r.value >= -1e-14);
                let h = 1e-6;
                let slope = (rate(z, l, j + h).unwrap().value - rate(z, l, j - h).unwrap().value) / (2.0 * h);
                assert!(close(slope, r.multiplier, 1e-6), "z={z} l={l} j={j}");
            }
        }
    }
}

/// Solves `g(alpha) = target` with `g = sqrt(alpha) - 1/sqrt(alpha)` by plain bisection.
fn alpha_oracle(lambda: f64, mu: f64, a: f64, z: f64) -> f64 {
    let g = |x: f64| x.sqrt() - 1.0 / x.sqrt();
    let zeta = z * lambda.exp();
    let target = g(a) / g(z) * (-mu / 2.0).exp() * g(zeta);
    let (mut lo, mut hi) = (1e-300f64, 1e300f64);
    for _ in 0..4000 {
        let mid = (lo * hi).sqrt();
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

#[test]
fn alpha_against_bisection() {
    let (alpha, zeta) = alpha_of(0.1, 0.2, 0.5, 0.25).unwrap();
    assert!(close(zeta, 0.25 * 0.1f64.exp(), 1e-15));
    assert!(close(alpha, alpha_oracle(0.1, 0.2, 0.5, 0.25), 1e-12));
    for (lam, mu, a, z) in [(-1.0, 0.5, 0.3, 0.6), (2.0, -1.0, 0.7, 0.1), (0.0, 3.0, 0.2, 0.2), (1.6, 0.0, 0.5, 0.25)] {
        assert!(close(alpha_of(lam, mu, a, z).unwrap().0, alpha_oracle(lam, mu, a, z), 1e-12));
    }
    let (alpha, zeta) = alpha_of(0.0, 0.0, 0.5, 0.25).unwrap();
    assert!(close(alpha, 0.5, 1e-15) && close(zeta, 0.25, 1e-15));
    for lam in [-2.0, 0.3, 1.0, 2.5] {
        let (alpha, zeta) = alpha_of(lam, 0.0, 0.4, 0.4).unwrap();
        assert!(close(alpha, zeta, 1e-14), "lam={lam}");
    }
}

#[test]
fn joint_scgf_reduces_and_differentiates() {
    let z = 0.4;
    for l in [F(1), F(4), F(10), INF] {
        for lam in [-1.0, 0.0, 0.3] {
            let joint = scgf_2t(z, z, l, lam, 0.0).unwrap();
            let single = scgf(z, l, lam).unwrap();
            assert!(close(joint.value, single.value, 1e-13), "l={l} lam={lam}");
            assert!(close(joint.gradient.0, single.derivative, 1e-12));
        }
    }
    for (a, z) in [(0.5, 0.25), (0.3, 0.6), (0.8, 0.2)] {
        for l in [F(1), F(3), F(12), INF] {
            assert!(scgf_2t(a, z, l, 0.0, 0.0).unwrap().value.abs() < 1e-15);
            let f = Fugacities::new(a, z).unwrap();
            let base = scgf_2t(a, z, l, 0.0, 0.0).unwrap();
            let cur = mean_currents(f, l);
            assert!(close(base.gradient.0, cur.ball, 1e-12));
            assert!(close(base.gradient.1, cur.soliton, 1e-12));
            for (lam, mu) in [(0.0, 0.0), (-0.4, 0.3), (0.2, -0.5)] {
                let p = scgf_2t(a, z, l, lam, mu).unwrap();
                let h = 1e-5;
                let at = |x: f64, y: f64| scgf_2t(a, z, l, x, y).unwrap();
                let dl = (at(lam + h, mu).value - at(lam - h, mu).value) / (2.0 * h);
                let dm = (at(lam, mu + h).value - at(lam, mu - h).value) / (2.0 * h);
                assert!(close(dl, p.gradient.0, 1e-8), "a={a} z={z} l={l}");
                assert!(close(dm, p.gradient.1, 1e-8), "a={a} z={z} l={l}");
                let cross_a = (at(lam, mu + h).gradient.0 - at(lam, mu - h).gradient.0) / (2.0 * h);
                let cross_b = (at(lam + h, mu).gradient.1 - at(lam - h, mu).gradient.1) / (2.0 * h);
                assert!(close(cross_a, cross_b, 1e-8));
            }
            let k = cumulants_2t(a, z, l).unwrap();
            let h = 1e-5;
            let g = |x: f64, y: f64| scgf_2t(a, z, l, x, y).unwrap().gradient;
            let bb = (g(h, 0.0).0 - g(-h, 0.0).0) / (2.0 * h);
            let bs = (g(h, 0.0).1 - g(-h, 0.0).1) / (2.0 * h);
            let ss = (g(0.0, h).1 - g(0.0, -h).1) / (2.0 * h);
            assert!(close(bb, k.ball_ball, 1e-8), "a={a} z={z} l={l}");
            assert!(close(bs, k.ball_soliton, 1e-8), "a={a} z={z} l={l}");
            assert!(close(ss, k.soliton_soliton, 1e-8), "a={a} z={z} l={l}");
        }
    }
    assert!(scgf_2t(0.5, 0.25, INF, 1.5, 0.0).is_err());
    // Finite capacity passes smoothly through zeta = 1.
    let lam = -(0.25f64).ln();
    let mid = scgf_2t(0.5, 0.25, F(5), lam, 0.0).unwrap().value;
    let side = 0.5 * (scgf_2t(0.5, 0.25, F(5), lam - 1e-6, 0.0).unwrap().value
        + scgf_2t(0.5, 0.25, F(5), lam + 1e-6, 0.0).unwrap().value);
    assert!(close(mid, side, 1e-10));
}

#[test]
fn joint_rate_reductions() {
    let z = 0.35;
    for jb in [0.1, 0.5, 1.2, 4.0] {
        let js = jb / (1.0 + 2.0 * jb);
        let joint = rate_2t_inf(z, z, jb, js).unwrap();
        assert!(close(joint.value, rate(z, INF, jb).unwrap().value, 1e-12), "jb={jb}");
    }
    for (a, z) in [(0.5, 0.25), (0.2, 0.6)] {
        let jb = a * (1.0 + z) / ((1.0 + a) * (1.0 - z));
        let js = a / (1.0 + a);
        let r = rate_2t_inf(a, z, jb, js).unwrap();
        assert!(r.value.abs() < 1e-13 && r.lambda.abs() < 1e-12 && r.mu.abs() < 1e-12);
        let h = 1e-5;
        let g = |x: f64, y: f64| rate_2t_inf(a, z, x, y).unwrap().value;
        assert!(((g(jb + h, js) - g(jb - h, js)) / (2.0 * h)).abs() < 1e-8);
        assert!(((g(jb, js + h) - g(jb, js - h)) / (2.0 * h)).abs() < 1e-8);
    }
    let half = rate_2t_inf(0.5, 0.25, 1.5, 0.5).unwrap();
    assert!(half.value.is_finite() && half.mu.is_infinite());
    let left = rate_2t_inf(0.5, 0.25, 1.5, 0.5 - 1e-9).unwrap().value;
    assert!(close(left, half.value, 1e-6));
    let beyond = rate_2t_inf(0.5, 0.25, 1.5, 0.5 + 1e-9).unwrap();
    assert!(beyond.value == f64::INFINITY);
    assert!(rate_2t_inf(0.5, 0.25, 0.3, 0.4).is_err());
    assert!(rate_2t_inf(0.5, 0.25, 2.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn joint_rate_is_a_legendre_transform(
        a in 0.1f64..0.9, z in 0.1f64..0.8, js in 0.02f64..0.5, extra in 0.05f64..3.0,
    ) {
        prop_assume!(0.5 - js > 1e-3);
        let jb = js + extra;
        let r = rate_2t_inf(a, z, jb, js).unwrap();
        if let Ok(f) = scgf_2t(a, z, INF, r.lambda, r.mu) {
            let legendre = jb * r.lambda + js * r.mu - f.value;
            prop_assert!(close(r.value, legendre, 1e-10), "{} vs {}", r.value, legendre);
            prop_assert!(close(f.gradient.0, jb, 1e-9));
            prop_assert!(close(f.gradient.1, js, 1e-9));
        }
        prop_assert!(r.value >= -1e-12);
    }

    #[test]
    fn rate_is_convex(z in 0.05f64..0.95, l in 1u32..15, u in 0.02f64..0.98) {
        let j = u * l as f64;
        let h = 1e-3 * l as f64;
        let g = |x: f64| rate(z, Capacity::Finite(l), x).unwrap().value;
        prop_assert!(g(j - h) + g(j + h) - 2.0 * g(j) > -1e-9);
    }
}
