//! Truncated dressing, flux-Jacobian and correlation matrices.

use nalgebra::DMatrix;

use crate::capacity::Capacity;
use crate::currents::four_index_correlation;
use crate::error::{domain, AnalyticsError};
use crate::profile::TbaProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    Dressing,
    FluxJacobian { l: u32 },
    Correlation { l: u32, m: u32 },
}

/// `K x K` matrix over soliton sizes `1..=K` (row and column `i` at index `i - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMatrix {
    pub role: MatrixRole,
    pub entries: DMatrix<f64>,
}

impl TruncatedMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry at sizes `(i, j)`, both 1-based.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.entries[(i - 1, j - 1)]
    }
}

fn check_size(profile: &TbaProfile, size: usize) -> Result<(), AnalyticsError> {
    if size == 0 || size > profile.truncation() {
        return Err(domain(format!("matrix size {size} outside 1..={}", profile.truncation())));
    }
    Ok(())
}

/// `M_{ij} = 2 min(i, j)`.
pub fn collision_matrix(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| 2.0 * (i.min(j) + 1) as f64)
}

/// `G = (1 + M y)^{-1}`.
pub fn dressing_matrix(profile: &TbaProfile, size: usize) -> Result<TruncatedMatrix, AnalyticsError> {
    check_size(profile, size)?;
    let y = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&profile.y[..size]));
    let system = DMatrix::identity(size, size) + collision_matrix(size) * y;
    let entries = system.try_inverse().ok_or(AnalyticsError::SingularSystem)?;
    Ok(TruncatedMatrix { role: MatrixRole::Dressing, entries })
}

/// `V = (v^{(i)}_j)`, rows indexed by capacity.
pub fn velocity_matrix(profile: &TbaProfile, size: usize) -> DMatrix<f64> {
    let f = profile.fugacities;
    DMatrix::from_fn(size, size, |i, j| f.velocity(Capacity::Finite(i as u32 + 1), j as u32 + 1))
}

/// `A^{(l)j}_i = sum_{k <= min(l,i)} d/d sigma_j (sigma_i sigma_l / (sigma_{k-1} sigma_k))`
/// for hole densities `sigma[0..K] = sigma_1..sigma_K` (`sigma_0 = 1`).
pub fn flux_jacobian_from_sigma(sigma: &[f64], l: u32) -> Result<DMatrix<f64>, AnalyticsError> {
    let size = sigma.len();
    let l = l as usize;
    if l == 0 || l > size {
        return Err(domain(format!("capacity {l} outside 1..={size}")));
    }
    let s = |n: usize| if n == 0 { 1.0 } else { sigma[n - 1] };
    let mut out = DMatrix::zeros(size, size);
    for i in 1..=size {
        for k in 1..=l.min(i) {
            let term = s(i) * s(l) / (s(k - 1) * s(k));
            // Exponent of each sigma in the monomial; sigma_0 is a constant.
            let mut powers: Vec<(usize, i32)> = vec![(i, 1), (l, 1), (k, -1)];
            if k > 1 {
                powers.push((k - 1, -1));
            }
            let mut merged: Vec<(usize, i32)> = Vec::new();
            for (n, e) in powers {
                match merged.iter_mut().find(|(m, _)| *m == n) {
                    Some(slot) => slot.1 += e,
                    None => merged.push((n, e)),
                }
            }
            for (n, e) in merged {
                if e != 0 {
                    out[(i - 1, n - 1)] += e as f64 * term / s(n);
                }
            }
        }
    }
    Ok(out)
}

pub fn flux_jacobian(profile: &TbaProfile, l: u32, size: usize) -> Result<TruncatedMatrix, AnalyticsError> {
    check_size(profile, size)?;
    let entries = flux_jacobian_from_sigma(&profile.sigma[..size], l)?;
    Ok(TruncatedMatrix { role: MatrixRole::FluxJacobian { l }, entries })
}

/// `C^{(l,m)}_{i,j} = C^{l,m}_{i,j}` for `i, j <= K`; `(1,1)` is the static
/// covariance, `(1,l)` the current-charge and `(l,l)` the Drude matrix.
pub fn correlation_matrix(
    profile: &TbaProfile,
    l: u32,
    m: u32,
    size: usize,
) -> Result<TruncatedMatrix, AnalyticsError> {
    check_size(profile, size)?;
    if l == 0 || m == 0 {
        return Err(domain("capacities must be at least 1"));
    }
    let f = profile.fugacities;
    let mut entries = DMatrix::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            entries[(i, j)] = four_index_correlation(
                f,
                Capacity::Finite(i as u32 + 1),
                Capacity::Finite(j as u32 + 1),
                Capacity::Finite(l),
                Capacity::Finite(m),
            )?;
        }
    }
    Ok(TruncatedMatrix { role: MatrixRole::Correlation { l, m }, entries })
}

/// `max_ij |x_ij|`.
pub fn max_abs(x: &DMatrix<f64>) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
