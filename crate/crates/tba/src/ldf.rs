//! Scaled cumulant generating functions and rate functions for the number
//! of balls (and solitons) crossing a bond.

use crate::capacity::Capacity;
use crate::error::{domain, AnalyticsError};
use crate::profile::Fugacities;

/// Law of the carrier load: `P(k) ~ e^{k theta}` on `0..=l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadLaw {
    pub capacity: Capacity,
    pub theta: f64,
}

/// Loads above which direct sums near `theta = 0` are replaced by closed forms.
const DIRECT_SUM_MAX: u32 = 200_000;

impl LoadLaw {
    fn direct(&self) -> Option<u32> {
        match self.capacity {
            Capacity::Finite(l) if l <= DIRECT_SUM_MAX && self.theta.abs() * (l as f64 + 1.0) < 1.0 => Some(l),
            _ => None,
        }
    }

    fn check_infinite(&self) -> Result<(), AnalyticsError> {
        if self.capacity.is_infinite() && self.theta >= 0.0 {
            return Err(AnalyticsError::DivergentQuantity(format!(
                "unbounded carrier with fugacity e^{} >= 1",
                self.theta
            )));
        }
        Ok(())
    }

    /// Central moments of the load distribution by direct summation.
    fn sums(&self, l: u32) -> (f64, f64, f64, f64) {
        let w: Vec<f64> = (0..=l).map(|k| ((k as f64 - l as f64 / 2.0) * self.theta).exp()).collect();
        let s: f64 = w.iter().sum();
        let mean = (0..=l).map(|k| k as f64 * w[k as usize]).sum::<f64>() / s;
        let m2 = (0..=l).map(|k| (k as f64 - mean).powi(2) * w[k as usize]).sum::<f64>() / s;
        let m3 = (0..=l).map(|k| (k as f64 - mean).powi(3) * w[k as usize]).sum::<f64>() / s;
        (s, mean, m2, m3)
    }

    /// `ln sum_{k=0}^{l} e^{k theta}`.
    pub fn log_partition(&self) -> Result<f64, AnalyticsError> {
        self.check_infinite()?;
        let t = self.theta;
        if let Some(l) = self.direct() {
            return Ok(self.sums(l).0.ln() + l as f64 * t / 2.0);
        }
        Ok(match self.capacity {
            Capacity::Infinite => -(-t.exp_m1()).ln(),
            Capacity::Finite(l) => {
                let n = l as f64 + 1.0;
                let neg = |t: f64| (-(n * t).exp_m1()).ln() - (-t.exp_m1()).ln();
                if t < 0.0 {
                    neg(t)
                } else {
                    l as f64 * t + neg(-t)
                }
            }
        })
    }

    /// Mean load.
    pub fn mean(&self) -> Result<f64, AnalyticsError> {
        self.check_infinite()?;
        let t = self.theta;
        if let Some(l) = self.direct() {
            return Ok(self.sums(l).1);
        }
        Ok(match self.capacity {
            Capacity::Infinite => 1.0 / (-t).exp_m1(),
            Capacity::Finite(l) => {
                let n = l as f64 + 1.0;
                let neg = |t: f64| 1.0 / (-t).exp_m1() - n / (-n * t).exp_m1();
                if t < 0.0 {
                    neg(t)
                } else {
                    l as f64 - neg(-t)
                }
            }
        })
    }

    /// Load variance.
    pub fn variance(&self) -> Result<f64, AnalyticsError> {
        self.check_infinite()?;
        let t = self.theta;
        if let Some(l) = self.direct() {
            return Ok(self.sums(l).2);
        }
        let term = |n: f64| n * n / (4.0 * (n * t / 2.0).sinh().powi(2));
        Ok(match self.capacity {
            Capacity::Infinite => term(1.0),
            Capacity::Finite(l) => term(1.0) - term(l as f64 + 1.0),
        })
    }

    /// Third cumulant of the load.
    pub fn third_cumulant(&self) -> Result<f64, AnalyticsError> {
        self.check_infinite()?;
        let t = self.theta;
        if let Some(l) = self.direct() {
            return Ok(self.sums(l).3);
        }
        let term = |n: f64| {
            let h = n * t / 2.0;
            -n.powi(3) * h.cosh() / (4.0 * h.sinh().powi(3))
        };
        Ok(match self.capacity {
            Capacity::Infinite => term(1.0),
            Capacity::Finite(l) => term(1.0) - term(l as f64 + 1.0),
        })
    }
}

fn check_z(z: f64) -> Result<(), AnalyticsError> {
    if !(z > 0.0 && z < 1.0) {
        return Err(domain(format!("fugacity {z} must lie in (0,1)")));
    }
    Ok(())
}

/// `F(lambda)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgfPoint {
    pub lambda: f64,
    pub value: f64,
    /// `F'(lambda)`, the mean current in the tilted state.
    pub derivative: f64,
    pub second: f64,
}

/// SCGF of the ball transfer under `T_l` from a product state of fugacity `z`.
pub fn scgf(z: f64, l: Capacity, lambda: f64) -> Result<ScgfPoint, AnalyticsError> {
    check_z(z)?;
    if !lambda.is_finite() {
        return Err(domain("counting field must be finite"));
    }
    let base = LoadLaw { capacity: l, theta: z.ln() };
    let tilted = LoadLaw { capacity: l, theta: z.ln() + lambda };
    Ok(ScgfPoint {
        lambda,
        value: tilted.log_partition()? - base.log_partition()?,
        derivative: tilted.mean()?,
        second: tilted.variance()?,
    })
}

/// Scaled cumulants `c_1, c_2, c_3` of the ball transfer.
pub fn scaled_cumulants(z: f64, l: Capacity) -> Result<[f64; 3], AnalyticsError> {
    check_z(z)?;
    let law = LoadLaw { capacity: l, theta: z.ln() };
    Ok([law.mean()?, law.variance()?, law.third_cumulant()?])
}

/// `G(j)` with the conjugate field `lambda*(j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub j: f64,
    pub value: f64,
    pub multiplier: f64,
}

const J_TOL: f64 = 1e-13;

/// Legendre transform of [`scgf`]. Endpoints `j = 0` and `j = l` are
/// returned in closed form with infinite multipliers.
pub fn rate(z: f64, l: Capacity, j: f64) -> Result<RatePoint, AnalyticsError> {
    check_z(z)?;
    let ln_z = z.ln();
    let g0 = LoadLaw { capacity: l, theta: ln_z }.log_partition()?;
    match l {
        Capacity::Infinite => {
            if !(j >= 0.0 && j.is_finite()) {
                return Err(domain(format!("current {j} must be non-negative")));
            }
            if j == 0.0 {
                return Ok(RatePoint { j, value: g0, multiplier: f64::NEG_INFINITY });
            }
            let value = -(-z).ln_1p() - j * ln_z - (1.0 + j) * j.ln_1p() + j * j.ln();
            Ok(RatePoint { j, value, multiplier: (j / (z * (1.0 + j))).ln() })
        }
        Capacity::Finite(n) => {
            let top = n as f64;
            if !(0.0..=top).contains(&j) {
                return Err(domain(format!("current {j} outside [0, {n}]")));
            }
            if j == 0.0 {
                return Ok(RatePoint { j, value: g0, multiplier: f64::NEG_INFINITY });
            }
            if j == top {
                return Ok(RatePoint { j, value: g0 - top * ln_z, multiplier: f64::INFINITY });
            }
            let lambda = solve_multiplier(z, l, j)?;
            let f = scgf(z, l, lambda)?;
            Ok(RatePoint { j, value: j * lambda - f.value, multiplier: lambda })
        }
    }
}

/// Solves `F'(lambda) = j` by bisection on a geometrically grown bracket,
/// then Newton steps.
fn solve_multiplier(z: f64, l: Capacity, j: f64) -> Result<f64, AnalyticsError> {
    let fprime = |lam: f64| scgf(z, l, lam).map(|p| p.derivative);
    let f0 = fprime(0.0)?;
    if (f0 - j).abs() <= J_TOL {
        return Ok(0.0);
    }
    let dir = if j > f0 { 1.0 } else { -1.0 };
    let (mut lo, mut hi) = (0.0f64, dir);
    let mut step = 1.0;
    while (fprime(hi)? - j) * dir < 0.0 {
        lo = hi;
        step *= 2.0;
        hi += dir * step;
        if step > 1e6 {
            return Err(AnalyticsError::RootNotBracketed { target: j });
        }
    }
    let (mut a, mut b) = if lo < hi { (lo, hi) } else { (hi, lo) };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = fprime(mid)? - j;
        if fm.abs() <= J_TOL || b - a < 1e-15 * (1.0 + mid.abs()) {
            a = mid;
            b = mid;
            break;
        }
        if fm < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut lam = 0.5 * (a + b);
    for _ in 0..3 {
        let p = scgf(z, l, lam)?;
        if p.second <= 0.0 {
            break;
        }
        let next = lam - (p.derivative - j) / p.second;
        if !next.is_finite() {
            break;
        }
        lam = next;
    }
    Ok(lam)
}

/// Tilted fugacities `(alpha, zeta)` for counting fields `(lambda, mu)`.
pub fn alpha_of(lambda: f64, mu: f64, a: f64, z: f64) -> Result<(f64, f64), AnalyticsError> {
    let f = Fugacities::new(a, z)?;
    if !lambda.is_finite() || !mu.is_finite() {
        return Err(domain("counting fields must be finite"));
    }
    let t = TwoTemperature::new(f, lambda, mu);
    Ok((t.alpha(), t.zeta()))
}

/// Shared quantities of the tilted two-temperature state.
struct TwoTemperature {
    /// `ln zeta`.
    theta: f64,
    /// `(sqrt(a) - 1/sqrt(a)) / (sqrt(z) - 1/sqrt(z)) * e^{-mu/2}`.
    c: f64,
    /// `sqrt(alpha)`.
    s: f64,
}

impl TwoTemperature {
    fn new(f: Fugacities, lambda: f64, mu: f64) -> Self {
        let (a, z) = (f.a(), f.z());
        let c = (a.sqrt() - 1.0 / a.sqrt()) / (z.sqrt() - 1.0 / z.sqrt()) * (-mu / 2.0).exp();
        let theta = z.ln() + lambda;
        let r = c * 2.0 * (theta / 2.0).sinh();
        let root = (r * r + 4.0).sqrt();
        let s = if r >= 0.0 { (r + root) / 2.0 } else { 2.0 / (root - r) };
        TwoTemperature { theta, c, s }
    }

    fn alpha(&self) -> f64 {
        self.s * self.s
    }

    fn zeta(&self) -> f64 {
        self.theta.exp()
    }

    /// `(1 - zeta^l) / (1 - alpha)`, continuous through `zeta = 1`.
    fn q(&self, l: u32) -> f64 {
        let lf = l as f64;
        let t = self.theta;
        let ratio = if t.abs() < 1e-8 {
            lf * (1.0 + lf * t / 2.0)
        } else {
            (lf * t).exp_m1() / (2.0 * (t / 2.0).sinh())
        };
        ratio / (self.c * self.s)
    }
}

/// Joint SCGF `F(lambda, mu)` of transferred balls and solitons with its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointScgfPoint {
    pub lambda: f64,
    pub mu: f64,
    pub value: f64,
    /// `(dF/dlambda, dF/dmu)`: ball and soliton currents of the tilted state.
    pub gradient: (f64, f64),
}

pub fn scgf_2t(a: f64, z: f64, l: Capacity, lambda: f64, mu: f64) -> Result<JointScgfPoint, AnalyticsError> {
    let f = Fugacities::new(a, z)?;
    if !lambda.is_finite() || !mu.is_finite() {
        return Err(domain("counting fields must be finite"));
    }
    let t = TwoTemperature::new(f, lambda, mu);
    let (alpha, zeta) = (t.alpha(), t.zeta());
    match l {
        Capacity::Infinite => {
            if zeta >= 1.0 {
                return Err(AnalyticsError::DivergentQuantity(format!(
                    "unbounded carrier with tilted fugacity {zeta} >= 1"
                )));
            }
            let value = ((1.0 - a) / (1.0 - alpha)).ln();
            let ball = alpha * (1.0 + zeta) / ((1.0 + alpha) * (1.0 - zeta));
            Ok(JointScgfPoint { lambda, mu, value, gradient: (ball, alpha / (1.0 + alpha)) })
        }
        Capacity::Finite(n) => {
            let base = TwoTemperature::new(f, 0.0, 0.0);
            let q = t.q(n);
            let value = (alpha * q).ln_1p() - (a * base.q(n)).ln_1p();
            let soliton = alpha * q / ((1.0 + alpha) * (1.0 + alpha * q));
            let zl = (n as f64 * t.theta).exp();
            // (1 - zeta^l) / (1 - zeta) = sum_{k<l} zeta^k
            let geo = if t.theta.abs() < 1e-8 {
                n as f64
            } else {
                (n as f64 * t.theta).exp_m1() / t.theta.exp_m1()
            };
            let denom = 1.0 - alpha * zl;
            let ball = alpha * (1.0 + zeta) * geo / ((1.0 + alpha) * denom) - n as f64 * alpha * zl / denom;
            Ok(JointScgfPoint { lambda, mu, value, gradient: (ball, soliton) })
        }
    }
}

/// Second derivatives of `F(lambda, mu)` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCumulants {
    pub ball_ball: f64,
    pub ball_soliton: f64,
    pub soliton_soliton: f64,
}

pub fn cumulants_2t(a: f64, z: f64, l: Capacity) -> Result<JointCumulants, AnalyticsError> {
    let f = Fugacities::new(a, z)?;
    let (zl, lf) = match l {
        Capacity::Finite(n) => (z.powi(n as i32), n as f64),
        Capacity::Infinite => (0.0, 0.0),
    };
    let azl = a * zl;
    let pre = a * (1.0 - a) / ((1.0 + a).powi(3) * (1.0 - azl).powi(2));
    Ok(JointCumulants {
        ball_ball: crate::currents::c2_analytic(f, l),
        ball_soliton: pre
            * ((1.0 + z) * (1.0 - zl) * (1.0 + a * a * zl) - (1.0 + a).powi(2) * (1.0 - z) * lf * zl)
            / (1.0 - z),
        soliton_soliton: pre * (1.0 - zl) * (1.0 + a * a * zl),
    })
}

/// Joint rate function at `l = oo` with its conjugate fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointRatePoint {
    pub value: f64,
    pub lambda: f64,
    /// Infinite for `J_1 >= 1/2`; the rate is finite at `J_1 = 1/2` and infinite beyond.
    pub mu: f64,
}

pub fn rate_2t_inf(a: f64, z: f64, ball: f64, soliton: f64) -> Result<JointRatePoint, AnalyticsError> {
    Fugacities::new(a, z)?;
    if !(soliton > 0.0 && soliton < 1.0 && soliton < ball && ball.is_finite()) {
        return Err(domain(format!(
            "currents (J_oo, J_1) = ({ball}, {soliton}) outside 0 < J_1 < min(1, J_oo)"
        )));
    }
    let (jb, js) = (ball, soliton);
    let lambda = ((jb - js) / (z * (jb + js))).ln();
    if js > 0.5 {
        // No finite field reaches a soliton current above 1/2; the supremum
        // is approached as mu grows without bound.
        return Ok(JointRatePoint { value: f64::INFINITY, lambda, mu: f64::INFINITY });
    }
    // ln of the mu* argument without its (1 - 2 J_1)^2 factor.
    let mu_core = (4.0 * (1.0 - js) * js.powi(3) * (a + 1.0 / a - 2.0)
        / ((jb * jb - js * js) * (z + 1.0 / z - 2.0)))
        .ln();
    let gap = 1.0 - 2.0 * js;
    let mu = mu_core - 2.0 * gap.ln();
    // (1 - 2 J_1) ln(1 - 2 J_1), which vanishes at J_1 = 1/2.
    let edge = if gap == 0.0 { 0.0 } else { gap * gap.ln() };
    let value = jb * lambda + js * mu_core - ((1.0 - a) * (1.0 - js)).ln() + edge;
    Ok(JointRatePoint { value, lambda, mu })
}
