//! Soliton densities, hole densities and effective velocities.

use crate::capacity::Capacity;
use crate::error::{domain, AnalyticsError};
use crate::series::sum_from;

/// State parameters `(a, z)`: `z = e^{-beta_inf}`, `a` couples to the soliton
/// number. Product (i.i.d.) states have `a = z = p / (1 - p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fugacities {
    a: f64,
    z: f64,
}

impl Fugacities {
    pub fn new(a: f64, z: f64) -> Result<Self, AnalyticsError> {
        let inside = |x: f64| x > 0.0 && x < 1.0;
        if !inside(a) || !inside(z) {
            return Err(domain(format!("fugacities (a, z) = ({a}, {z}) must lie in (0,1)^2")));
        }
        Ok(Fugacities { a, z })
    }

    /// Product state with fugacity `z`.
    pub fn iid(z: f64) -> Result<Self, AnalyticsError> {
        Self::new(z, z)
    }

    /// Product state with ball density `p < 1/2`.
    pub fn from_density(p: f64) -> Result<Self, AnalyticsError> {
        if !(p > 0.0 && p < 0.5) {
            return Err(domain(format!("density {p} must lie in (0, 1/2)")));
        }
        Self::iid(p / (1.0 - p))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn is_iid(&self) -> bool {
        self.a == self.z
    }

    /// Ball density `a / (1 + a)`.
    pub fn ball_density(&self) -> f64 {
        self.a / (1.0 + self.a)
    }

    fn zp(&self, k: u32) -> f64 {
        self.z.powi(k as i32)
    }

    /// Soliton density `rho_k`, `k >= 1`.
    pub fn rho(&self, k: u32) -> f64 {
        let (a, z) = (self.a, self.z);
        let zk = self.zp(k);
        let zk1 = zk / z;
        a * zk1 * (1.0 - a) * (1.0 - z).powi(2) * (1.0 + a * zk)
            / ((1.0 + a) * (1.0 - a * zk1) * (1.0 - a * zk) * (1.0 - a * zk * z))
    }

    /// Hole density `sigma_k`; `sigma_0 = 1` and `sigma_oo = (1 - a)/(1 + a)`.
    pub fn sigma(&self, k: Capacity) -> f64 {
        let a = self.a;
        match k {
            Capacity::Finite(0) => 1.0,
            Capacity::Finite(k) => {
                let azk = a * self.zp(k);
                (1.0 - a) * (1.0 + azk) / ((1.0 + a) * (1.0 - azk))
            }
            Capacity::Infinite => (1.0 - a) / (1.0 + a),
        }
    }

    /// `y_k = rho_k / sigma_k = e^{-eps_k}`.
    pub fn y(&self, k: u32) -> f64 {
        self.rho(k) / self.sigma(Capacity::Finite(k))
    }

    /// Effective velocity `v_k = v^{(oo)}_k`.
    pub fn bare_velocity(&self, k: u32) -> f64 {
        let (a, z) = (self.a, self.z);
        let zk = self.zp(k);
        (1.0 + a) * k as f64 / (1.0 - a)
            - 2.0 * a * (1.0 + z) * (1.0 - zk) / ((1.0 - a) * (1.0 - z) * (1.0 + a * zk))
    }

    /// `v^{(l)}_k`.
    pub fn velocity(&self, l: Capacity, k: u32) -> f64 {
        match l {
            Capacity::Infinite => self.bare_velocity(k),
            Capacity::Finite(l) => {
                let azl = self.a * self.zp(l);
                (1.0 + azl) / (1.0 - azl) * self.bare_velocity(k.min(l))
            }
        }
    }

    /// `v^{(l)}_k` from the hole densities: `sum_{m <= min(l,k)} sigma_l / (sigma_{m-1} sigma_m)`.
    pub fn velocity_from_holes(&self, l: Capacity, k: u32) -> f64 {
        let sl = self.sigma(l);
        (1..=l.clamp(k))
            .map(|m| sl / (self.sigma(Capacity::Finite(m - 1)) * self.sigma(Capacity::Finite(m))))
            .sum()
    }

    /// Residual of the collision-rate equation
    /// `v_i - min(i,l) - sum_k 2 min(i,k) (v_i - v_k) rho_k` for soliton size `i`.
    pub fn velocity_residual(&self, l: Capacity, i: u32) -> Result<f64, AnalyticsError> {
        let vi = self.velocity(l, i);
        let coll = sum_from(1, |k| 2.0 * i.min(k) as f64 * (vi - self.velocity(l, k)) * self.rho(k))?;
        Ok(vi - l.clamp(i) as f64 - coll)
    }

    /// `sigma_k` recomputed as `1 - sum_j 2 min(k,j) rho_j`.
    pub fn sigma_from_rho(&self, k: u32) -> Result<f64, AnalyticsError> {
        Ok(1.0 - sum_from(1, |j| 2.0 * k.min(j) as f64 * self.rho(j))?)
    }

    /// Auxiliary free energy `-sum_k ln(1 + y_k)`.
    pub fn free_energy(&self) -> Result<f64, AnalyticsError> {
        sum_from(1, |k| -self.y(k).ln_1p())
    }

    /// Mode occupancy `n_k = (1 + 1/y_k)^{-1}`.
    pub fn occupancy(&self, k: u32) -> f64 {
        let y = self.y(k);
        y / (1.0 + y)
    }
}

/// Densities truncated to sizes `1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TbaProfile {
    pub fugacities: Fugacities,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub y: Vec<f64>,
}

impl TbaProfile {
    pub fn truncation(&self) -> usize {
        self.rho.len()
    }

    pub fn a(&self) -> f64 {
        self.fugacities.a()
    }

    pub fn z(&self) -> f64 {
        self.fugacities.z()
    }
}

pub fn profile(a: f64, z: f64, truncation: usize) -> Result<TbaProfile, AnalyticsError> {
    if truncation == 0 {
        return Err(domain("truncation must be at least 1"));
    }
    let f = Fugacities::new(a, z)?;
    let sizes = 1..=truncation as u32;
    Ok(TbaProfile {
        fugacities: f,
        rho: sizes.clone().map(|k| f.rho(k)).collect(),
        sigma: sizes.clone().map(|k| f.sigma(Capacity::Finite(k))).collect(),
        y: sizes.map(|k| f.y(k)).collect(),
    })
}

/// `v^{(l)}_1..v^{(l)}_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityTable {
    pub capacity: Capacity,
    pub v: Vec<f64>,
}

impl VelocityTable {
    /// The fastest tabulated velocity.
    pub fn max(&self) -> f64 {
        self.v.iter().copied().fold(0.0, f64::max)
    }
}

pub fn velocities(profile: &TbaProfile, l: Capacity) -> VelocityTable {
    let f = profile.fugacities;
    VelocityTable {
        capacity: l,
        v: (1..=profile.truncation() as u32).map(|k| f.velocity(l, k)).collect(),
    }
}
