use bbs_tba::profile::Fugacities;
use bbs_tba::{profile, velocities, Capacity};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

const GRID: [(f64, f64); 5] = [(0.2, 0.2), (0.5, 0.25), (0.1, 0.7), (0.8, 0.4), (2.0 / 3.0, 2.0 / 3.0)];

#[test]
fn product_state_at_density_four_tenths() {
    let p = profile(2.0 / 3.0, 2.0 / 3.0, 5).unwrap();
    assert!(close(p.sigma[0], 0.52, 1e-14));
    assert!(close(p.rho[0], 78.0 / 475.0, 1e-14));
    let check = (1.0 + p.sigma[0] / p.rho[0]) / p.sigma[0];
    assert!(close(check, 8.0128205, 1e-7), "{check}");
}

#[test]
fn dilute_limit() {
    let f = Fugacities::iid(1e-6).unwrap();
    assert!(close(f.sigma(Capacity::Finite(3)), 1.0, 1e-5));
    assert!(close(f.rho(1), 1e-6, 1e-5));
    for k in 1..6 {
        assert!(close(f.bare_velocity(k), k as f64, 1e-5));
    }
}

#[test]
fn hole_density_consistency() {
    for (a, z) in GRID {
        let f = Fugacities::new(a, z).unwrap();
        for k in 1..=60 {
            let s = f.sigma(Capacity::Finite(k));
            assert!(close(f.sigma_from_rho(k).unwrap(), s, 1e-12), "a={a} z={z} k={k}");
            assert!(f.rho(k) > 0.0 && s > 0.0);
        }
        let ratio = f.rho(41) / f.rho(40);
        assert!(close(ratio, z, 1e-6));
    }
}

#[test]
fn velocities_closed_form_vs_hole_form_and_collision_equation() {
    let caps = [Capacity::Finite(1), Capacity::Finite(2), Capacity::Finite(5), Capacity::Finite(13), Capacity::Infinite];
    for (a, z) in GRID {
        let f = Fugacities::new(a, z).unwrap();
        for l in caps {
            for k in 1..=30 {
                let v = f.velocity(l, k);
                assert!(v > 0.0);
                assert!(close(f.velocity_from_holes(l, k), v, 1e-12), "a={a} z={z} l={l} k={k}");
                assert!(f.velocity_residual(l, k).unwrap().abs() < 1e-10, "a={a} z={z} l={l} k={k}");
            }
            if let Capacity::Finite(n) = l {
                assert!(close(f.velocity(l, n + 7), f.velocity(l, n), 1e-15));
            }
        }
        for k in 1..20 {
            assert!(close(f.velocity(Capacity::Finite(1), k), 1.0, 1e-14));
        }
    }
}

#[test]
fn velocity_table_and_domain() {
    let p = profile(0.3, 0.3, 20).unwrap();
    let t = velocities(&p, Capacity::Finite(4));
    assert_eq!(t.v.len(), 20);
    assert_eq!(t.max(), t.v[19]);
    assert!(profile(1.0, 0.3, 5).is_err());
    assert!(profile(0.3, 0.0, 5).is_err());
    assert!(Fugacities::from_density(0.5).is_err());
}

#[test]
fn two_temperature_reduces_to_product_state() {
    let z = 0.35;
    let f = Fugacities::iid(z).unwrap();
    for k in 1..=5u32 {
        let zk = z.powi(k as i32);
        let rho = zk * (1.0 - z).powi(3) * (1.0 + z * zk)
            / ((1.0 + z) * (1.0 - zk) * (1.0 - zk * z) * (1.0 - zk * z * z));
        assert!(close(f.rho(k), rho, 1e-14));
        let v = (1.0 + z) / (1.0 - z) * k as f64
            - 2.0 * z * (1.0 + z) * (1.0 - zk) / ((1.0 - z).powi(2) * (1.0 + zk * z));
        assert!(close(f.bare_velocity(k), v, 1e-13));
    }
}

#[test]
fn free_energy_helper() {
    let f = Fugacities::new(0.5, 0.25).unwrap();
    let direct: f64 = (1..200).map(|k| -(1.0 + f.y(k)).ln()).sum();
    assert!(close(f.free_energy().unwrap(), direct, 1e-13));
    let y = f.y(2);
    assert!(close(f.occupancy(2), 1.0 / (1.0 + 1.0 / y), 1e-15));
}
