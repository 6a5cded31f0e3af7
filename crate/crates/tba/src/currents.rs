//! Mean currents, second cumulants, Drude weights and four-index correlations.

use crate::capacity::Capacity;
use crate::error::{domain, AnalyticsError};
use crate::profile::{Fugacities, TbaProfile};
use crate::series::sum_from;

/// Mean ball and soliton currents under `T_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCurrents {
    pub ball: f64,
    pub soliton: f64,
}

pub fn mean_currents(f: Fugacities, l: Capacity) -> MeanCurrents {
    MeanCurrents {
        ball: eta(f, l, Capacity::Infinite),
        soliton: eta(f, l, Capacity::Finite(1)),
    }
}

/// `eta^{(l)}_j = sum_k min(j,k) rho_k v^{(l)}_k`, symmetric in `l` and `j`.
pub fn eta(f: Fugacities, l: Capacity, j: Capacity) -> f64 {
    let (a, z) = (f.a(), f.z());
    let base = a * (1.0 + z) / ((1.0 + a) * (1.0 - z));
    match (l.as_finite(), j.as_finite()) {
        (None, None) => base,
        (Some(n), None) | (None, Some(n)) => {
            let azn = a * z.powi(n as i32);
            base * (1.0 - z.powi(n as i32)) / (1.0 - azn) - n as f64 * azn / (1.0 - azn)
        }
        (Some(l), Some(j)) => {
            let (lo, hi) = (l.min(j), l.max(j));
            let (zj, zl) = (z.powi(j as i32), z.powi(l as i32));
            let den = (1.0 - a * zj) * (1.0 - a * zl);
            base * (1.0 - z.powi(lo as i32)) * (1.0 + a * z.powi(hi as i32)) / den
                - lo as f64 * a * (zj + zl) / den
        }
    }
}

/// i.i.d. ball current `z/(1-z) - (l+1) z^{l+1} / (1 - z^{l+1})`.
pub fn iid_ball_current(z: f64, l: Capacity) -> f64 {
    match l {
        Capacity::Infinite => z / (1.0 - z),
        Capacity::Finite(l) => {
            let zl1 = z.powi(l as i32 + 1);
            z / (1.0 - z) - (l + 1) as f64 * zl1 / (1.0 - zl1)
        }
    }
}

/// Scaled variance of the number of balls crossing a bond under `T_l`.
pub fn c2_analytic(f: Fugacities, l: Capacity) -> f64 {
    let (a, z) = (f.a(), f.z());
    let (zl, lf) = match l {
        Capacity::Finite(l) => (z.powi(l as i32), l as f64),
        Capacity::Infinite => (0.0, 0.0),
    };
    let azl = a * zl;
    a * (1.0 - a) * (1.0 + z).powi(2) * (1.0 - zl) * (1.0 + a * a * zl)
        / ((1.0 + a).powi(3) * (1.0 - z).powi(2) * (1.0 - azl).powi(2))
        + 2.0 * a * z * (1.0 - zl) / ((1.0 + a) * (1.0 - z).powi(2) * (1.0 - azl))
        - a * lf * zl / (1.0 - azl).powi(2) * (lf + 2.0 * (1.0 - a) * (1.0 + z) / ((1.0 + a) * (1.0 - z)))
}

/// i.i.d. form `z/(1-z)^2 - (l+1)^2 z^{l+1} / (1 - z^{l+1})^2`.
pub fn iid_c2(z: f64, l: Capacity) -> f64 {
    let head = z / (1.0 - z).powi(2);
    match l {
        Capacity::Infinite => head,
        Capacity::Finite(l) => {
            let zl1 = z.powi(l as i32 + 1);
            head - ((l + 1) as f64).powi(2) * zl1 / (1.0 - zl1).powi(2)
        }
    }
}

/// `rho_k sigma_k (rho_k + sigma_k)`.
pub fn susceptibility(f: Fugacities, k: u32) -> f64 {
    let r = f.rho(k);
    let s = f.sigma(Capacity::Finite(k));
    r * s * (r + s)
}

/// `W_k = rho_k sigma_k (rho_k + sigma_k) v_k^2`.
pub fn drude_weight_density(f: Fugacities, k: u32) -> f64 {
    susceptibility(f, k) * f.bare_velocity(k).powi(2)
}

/// `c_2 = sum_k W_k v^{(l)}_k`, summed directly.
pub fn c2_tba_sum(f: Fugacities, l: Capacity) -> Result<f64, AnalyticsError> {
    sum_from(1, |k| drude_weight_density(f, k) * f.velocity(l, k))
}

/// `D^{(1)} = sum_k W_k`.
pub fn drude_one(f: Fugacities) -> f64 {
    let (a, z) = (f.a(), f.z());
    a * (1.0 - a) * (1.0 + z) / ((1.0 + a).powi(3) * (1.0 - z))
}

/// `sum_{k<l} W_k` by direct summation.
pub fn partial_weight_sum(f: Fugacities, l: u32) -> f64 {
    (1..l).map(|k| drude_weight_density(f, k)).sum()
}

/// `sum_{k<l} W_k` from the closed polynomial `A_l`.
pub fn partial_weight_sum_closed(f: Fugacities, l: u32) -> f64 {
    if l <= 1 {
        return 0.0;
    }
    let (a, z) = (f.a(), f.z());
    let lf = l as f64;
    let p = |n: i64| z.powi(n as i32);
    let li = l as i64;
    let g = |w: f64| (w + (1.0 - lf * (1.0 - w)).powi(2)) / (1.0 + w);
    let h = |w: f64| {
        (1.0 + lf).powi(2) + lf * lf * w + (1.0 - 2.0 * lf + w) * (3.0 + w + 2.0 * lf * w) / (1.0 + w)
    };
    let a2 = a * a;
    let big_a = 1.0 + 2.0 * a * (1.0 + a2) * p(2 * li - 1) + a2 * a2 * p(4 * li - 2)
        + a2 * p(2 * li - 2) * (1.0 + 8.0 * z + z * z)
        - a * p(li - 1) * (2.0 + a2 * a * p(2 * li - 1)) * g(z)
        - p(li) * (1.0 + 2.0 * a2 * a * p(2 * li - 1)) * g(1.0 / z)
        - a2 * p(li - 1) * h(z)
        - a2 * p(3 * li - 1) * h(1.0 / z);
    a * (1.0 - a) * (1.0 + z) * big_a
        / ((1.0 + a).powi(3) * (1.0 - z) * (1.0 - a * p(li - 1)).powi(2) * (1.0 - a * p(li)).powi(2))
}

/// Drude weight `D^{(l)} = sum_k W_k (v^{(l)}_k)^2`, reduced to a finite sum
/// for finite `l`.
pub fn drude_analytic(f: Fugacities, l: Capacity) -> Result<f64, AnalyticsError> {
    match l {
        Capacity::Infinite => sum_from(1, |k| drude_weight_density(f, k) * f.bare_velocity(k).powi(2))
            .map_err(|_| AnalyticsError::DivergentQuantity(format!("D^(inf) at z = {}", f.z()))),
        Capacity::Finite(n) => {
            let head: f64 = (1..n).map(|k| drude_weight_density(f, k) * f.velocity(l, k).powi(2)).sum();
            let vl = f.velocity(l, n);
            Ok(head + vl * vl * (drude_one(f) - partial_weight_sum(f, n)))
        }
    }
}

/// Printed rational forms of `D^{(2)}..D^{(5)}` in the product state.
pub fn drude_rational(z: f64, l: u32) -> Option<f64> {
    let poly = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &ci| acc * z + ci);
    let q = |n: i32| 1.0 - z.powi(n);
    match l {
        2 => Some(z * q(1) * q(2).powi(3) * (1.0 + 11.0 * z + 11.0 * z.powi(3) + z.powi(4))
            / (q(3).powi(3) * q(4))),
        3 => Some(z * q(1) * q(2).powi(2) * q(3) / (q(4).powi(3) * q(6))
            * poly(&[1., 11., 44., 29., 30., 29., 44., 11., 1.])),
        4 => Some(z * q(2).powi(4) * q(3) / (q(5).powi(3) * q(6) * q(8))
            * poly(&[1., 10., 35., 117., 68., 254., 95., 357., 126., 357., 95., 254., 68., 117., 35., 10., 1.])),
        5 => Some(z * q(1) * q(2).powi(2) * q(4) * q(5) / (q(6).powi(3) * q(8) * q(10))
            * poly(&[
                1., 11., 44., 140., 355., 406., 480., 443., 633., 714., 896., 714., 633., 443., 480.,
                406., 355., 140., 44., 11., 1.,
            ])),
        _ => None,
    }
}

/// `lim_{z -> 1} D^{(l)}` in the product state, by Richardson extrapolation
/// of `D^{(l)}(1 - h)` over `h = 2^-6 .. 2^-11`.
pub fn drude_half_filling_limit(l: u32) -> Result<f64, AnalyticsError> {
    if l == 0 {
        return Err(domain("capacity must be at least 1"));
    }
    let mut table: Vec<f64> = Vec::new();
    for n in 6..12 {
        let h = (0.5f64).powi(n);
        let d = drude_analytic(Fugacities::iid(1.0 - h)?, Capacity::Finite(l))?;
        let mut row = vec![d];
        for (m, prev) in table.iter().enumerate() {
            let scale = (2.0f64).powi(m as i32 + 1);
            row.push(row[m] + (row[m] - prev) / (scale - 1.0));
        }
        table = row;
    }
    Ok(*table.last().expect("non-empty table"))
}

/// `C^{l,m}_{i,j} = sum_k rho_k sigma_k (rho_k + sigma_k) v^{(i)}_k v^{(j)}_k v^{(l)}_k v^{(m)}_k`.
///
/// With all four indices finite the tail `k >= max` is closed; otherwise the
/// series is summed.
pub fn four_index_correlation(
    f: Fugacities,
    i: Capacity,
    j: Capacity,
    l: Capacity,
    m: Capacity,
) -> Result<f64, AnalyticsError> {
    let idx = [i, j, l, m];
    let product = |k: u32| idx.iter().map(|&c| f.velocity(c, k)).product::<f64>();
    if idx.iter().any(|c| c.is_infinite()) {
        return sum_from(1, |k| susceptibility(f, k) * product(k));
    }
    let r = idx.iter().filter_map(|c| c.as_finite()).max().expect("four indices");
    let head: f64 = (1..r).map(|k| susceptibility(f, k) * product(k)).sum();
    let corner = idx.iter().map(|&c| f.velocity(c, c.as_finite().expect("finite"))).product::<f64>();
    Ok(head + susceptibility_tail(f, r) * corner)
}

/// `sum_{k >= r} rho_k sigma_k (rho_k + sigma_k)`.
pub fn susceptibility_tail(f: Fugacities, r: u32) -> f64 {
    let (a, z) = (f.a(), f.z());
    let zr1 = z.powi(r as i32 - 1);
    a * (1.0 - a).powi(3) * (1.0 - z) * zr1 * (1.0 + a * a * zr1 * zr1 * z)
        / ((1.0 + a).powi(3) * (1.0 - a * zr1).powi(2) * (1.0 - a * zr1 * z).powi(2))
}

/// Predicted `<d eps_i d eps_i>` = `(1 + e^{eps_i}) / sigma_i`; off-diagonal
/// entries vanish.
pub fn pseudoenergy_cov_prediction(profile: &TbaProfile, i: usize) -> Result<f64, AnalyticsError> {
    if i == 0 || i > profile.truncation() {
        return Err(domain(format!("size {i} outside 1..={}", profile.truncation())));
    }
    let (r, s) = (profile.rho[i - 1], profile.sigma[i - 1]);
    Ok((1.0 + s / r) / s)
}
