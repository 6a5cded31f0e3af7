//! Carrier transfer matrix and the equal-time current variance.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::capacity::Capacity;
use crate::error::{domain, AnalyticsError};
use crate::ldf::LoadLaw;

/// `(l+1) x (l+1)` matrix `L^z(y)`; row = load entering a site, column = load leaving it.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierMatrix {
    pub capacity: u32,
    pub z: f64,
    pub y: f64,
    pub entries: DMatrix<f64>,
}

fn check(l: u32, z: f64, y: f64) -> Result<(), AnalyticsError> {
    if l == 0 {
        return Err(domain("capacity must be at least 1"));
    }
    if !(z > 0.0 && z.is_finite() && y > 0.0 && y.is_finite()) {
        return Err(domain(format!("weights z = {z}, y = {y} must be positive")));
    }
    Ok(())
}

pub fn build_carrier_matrix(l: u32, z: f64, y: f64) -> Result<CarrierMatrix, AnalyticsError> {
    check(l, z, y)?;
    let n = l as usize;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = 1.0;
    m[(0, 1)] = z;
    for k in 1..=n {
        let yk = y.powi(k as i32);
        m[(k, k - 1)] = yk;
        if k < n {
            m[(k, k + 1)] = z * yk;
        } else {
            m[(k, k)] = z * yk;
        }
    }
    Ok(CarrierMatrix { capacity: l, z, y, entries: m })
}

/// Mean carrier load in the stationary product state.
pub fn stationary_current(l: u32, z: f64) -> Result<f64, AnalyticsError> {
    check(l, z, 1.0)?;
    LoadLaw { capacity: Capacity::Finite(l), theta: z.ln() }.mean()
}

/// Leading eigenvalue of `L^z(y)` and its log-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronData {
    pub eigenvalue: f64,
    /// `y d/dy ln lambda`.
    pub d_y: f64,
    /// `(y d/dy)^2 ln lambda`.
    pub d_yy: f64,
    /// `(z d/dz)(y d/dy) ln lambda`.
    pub d_zy: f64,
}

/// Symmetric form `D L D^{-1}` (tridiagonal, similar to `L`) and its
/// derivatives in `ln y` and `ln z`.
struct Symmetrized {
    s: DMatrix<f64>,
    s_y: DMatrix<f64>,
    s_yy: DMatrix<f64>,
    s_z: DMatrix<f64>,
    s_zy: DMatrix<f64>,
}

fn symmetrized(l: u32, z: f64, y: f64) -> Symmetrized {
    let n = l as usize + 1;
    let mut out = Symmetrized {
        s: DMatrix::zeros(n, n),
        s_y: DMatrix::zeros(n, n),
        s_yy: DMatrix::zeros(n, n),
        s_z: DMatrix::zeros(n, n),
        s_zy: DMatrix::zeros(n, n),
    };
    let mut put = |i: usize, j: usize, v: f64, ey: f64, ez: f64| {
        for (i, j) in [(i, j), (j, i)] {
            out.s[(i, j)] = v;
            out.s_y[(i, j)] = ey * v;
            out.s_yy[(i, j)] = ey * ey * v;
            out.s_z[(i, j)] = ez * v;
            out.s_zy[(i, j)] = ez * ey * v;
        }
    };
    put(0, 0, 1.0, 0.0, 0.0);
    for k in 0..l as usize {
        let e = k as f64 + 0.5;
        put(k, k + 1, z.sqrt() * y.powf(e), e, 0.5);
    }
    let lf = l as f64;
    put(n - 1, n - 1, z * y.powi(l as i32), lf, 1.0);
    out
}

pub fn perron_data(l: u32, z: f64, y: f64) -> Result<PerronData, AnalyticsError> {
    check(l, z, y)?;
    let m = symmetrized(l, z, y);
    let eig = SymmetricEigen::new(m.s.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = order[0];
    let lam = eig.eigenvalues[top];
    if let Some(&next) = order.get(1) {
        let gap = lam - eig.eigenvalues[next];
        if gap < 1e-12 {
            return Err(AnalyticsError::DegenerateLeadingEigenvalue { gap });
        }
    }
    let v0 = eig.eigenvectors.column(top);
    let bilinear = |a: &DMatrix<f64>, u: usize| eig.eigenvectors.column(u).dot(&(a * v0));
    let first_y = bilinear(&m.s_y, top);
    let first_z = bilinear(&m.s_z, top);
    let mut yy = bilinear(&m.s_yy, top);
    let mut zy = bilinear(&m.s_zy, top);
    for &k in &order[1..] {
        let denom = lam - eig.eigenvalues[k];
        let py = bilinear(&m.s_y, k);
        yy += 2.0 * py * py / denom;
        zy += 2.0 * bilinear(&m.s_z, k) * py / denom;
    }
    Ok(PerronData {
        eigenvalue: lam,
        d_y: first_y / lam,
        d_yy: yy / lam - (first_y / lam).powi(2),
        d_zy: zy / lam - first_z * first_y / (lam * lam),
    })
}

/// `f`: scaled variance of the spatially integrated current at equal times.
pub fn equal_time_variance(l: u32, z: f64) -> Result<f64, AnalyticsError> {
    Ok(perron_data(l, z, 1.0)?.d_yy)
}

/// Second cumulant of the transferred balls from the mixed log-derivative.
pub fn c2_via_tm(l: u32, z: f64) -> Result<f64, AnalyticsError> {
    Ok(perron_data(l, z, 1.0)?.d_zy)
}

/// Closed-form expression for `f`, found by fitting the transfer-matrix values.
///
/// Evaluated as `N(z) / ((1-z)^7 S(z)^3)` with `S = sum_{k<=l} z^k`; the
/// integer polynomial `N` is divided by `(1-z)^7` exactly before evaluation,
/// which removes the cancellation near `z = 1`.
pub fn conjectured_f(l: u32, z: f64) -> Result<f64, AnalyticsError> {
    check(l, z, 1.0)?;
    let n = l as usize;
    let lf = l as f64;
    let mut num = Poly::default();
    // z(1 + 6z + z^2)(1 - z^{3l+3})
    for (k, c) in [(1, 1.0), (2, 6.0), (3, 1.0)] {
        num.add(k, c);
        num.add(k + 3 * n + 3, -c);
    }
    // -24 z^{l+5}(1 - z^{l-3}) = -24 z^{l+5} + 24 z^{2l+2}
    num.add(n + 5, -24.0);
    num.add(2 * n + 2, 24.0);
    // -3 z^{l+2}(g_{l+2} + 7z g_l + 8z^2 g_{l-2})(1 - z)
    let mut third = Poly::default();
    for (k, c) in [(0, 1.0), (n + 2, 1.0), (1, 7.0), (n + 1, 7.0), (2, 8.0), (n, 8.0)] {
        third.add(n + 2 + k, -3.0 * c);
    }
    num.extend(&third.times_one_minus_z(1));
    // -(l+1)^2 z^{l+1}(g_{l+2} + 2l(1+z)g_{l+1} + 3z g_l)(1 - z)^3
    let mut fourth = Poly::default();
    let w = -(lf + 1.0).powi(2);
    for (k, c) in [
        (0, 1.0),
        (n + 2, 1.0),
        (0, 2.0 * lf),
        (n + 1, 2.0 * lf),
        (1, 2.0 * lf),
        (n + 2, 2.0 * lf),
        (1, 3.0),
        (n + 1, 3.0),
    ] {
        fourth.add(n + 1 + k, w * c);
    }
    num.extend(&fourth.times_one_minus_z(3));
    let reduced = num.divide_one_minus_z(7);
    let s: f64 = (0..=n).rev().fold(0.0, |acc, _| acc * z + 1.0);
    Ok(reduced.eval(z) / s.powi(3))
}

/// Polynomial with integer-valued coefficients, lowest degree first.
#[derive(Debug, Default, Clone)]
struct Poly(Vec<f64>);

impl Poly {
    fn add(&mut self, degree: usize, c: f64) {
        if self.0.len() <= degree {
            self.0.resize(degree + 1, 0.0);
        }
        self.0[degree] += c;
    }

    fn extend(&mut self, other: &Poly) {
        for (k, &c) in other.0.iter().enumerate() {
            self.add(k, c);
        }
    }

    fn times_one_minus_z(&self, times: u32) -> Poly {
        let mut p = self.clone();
        for _ in 0..times {
            let mut next = Poly::default();
            for (k, &c) in p.0.iter().enumerate() {
                next.add(k, c);
                next.add(k + 1, -c);
            }
            p = next;
        }
        p
    }

    /// Exact quotient by `(1 - z)^times`; the remainder must vanish.
    fn divide_one_minus_z(&self, times: u32) -> Poly {
        let mut p = self.0.clone();
        for _ in 0..times {
            // p(z) = (1 - z) q(z): q_k = sum_{i<=k} p_i.
            let mut acc = 0.0;
            let mut q = Vec::with_capacity(p.len());
            for &c in &p[..p.len().saturating_sub(1)] {
                acc += c;
                q.push(acc);
            }
            debug_assert_eq!(acc + p.last().copied().unwrap_or(0.0), 0.0);
            p = q;
        }
        Poly(p)
    }

    fn eval(&self, z: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}
