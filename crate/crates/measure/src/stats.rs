//! Mergeable accumulators with exact integer sums, and jackknife errors.
//!
//! Every accumulator stores integers (real inputs are quantized to a fixed
//! binary point first), so merging is associative and commutative bit for
//! bit and the result never depends on how samples were split across workers.

use std::collections::BTreeMap;

/// Value with a one-sigma statistical error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    /// `(value - target) / error`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.error
    }

    /// Whether `target` lies within `sigmas` errors.
    pub fn covers(&self, target: f64, sigmas: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.error
    }
}

pub trait Accumulator: Clone {
    fn count(&self) -> u64;
    fn merge(&mut self, other: &Self);
    /// Inverse of [`Accumulator::merge`]; `other` must be a part of `self`.
    fn remove(&mut self, other: &Self);
}

/// Count and power sums `sum x^k`, `k = 1..=4`, of an integer observable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PowerSums {
    count: u64,
    sums: [i128; 4],
}

impl PowerSums {
    pub fn push(&mut self, x: i64) {
        let x = x as i128;
        let mut p = 1i128;
        self.count += 1;
        for s in self.sums.iter_mut() {
            p *= x;
            *s += p;
        }
    }

    pub fn sums(&self) -> [i128; 4] {
        self.sums
    }

    pub fn mean(&self) -> f64 {
        self.sums[0] as f64 / self.count as f64
    }

    /// Central moments `mu_2, mu_3, mu_4`. The sums are first re-centred on
    /// the nearest integer to the mean in exact arithmetic.
    pub fn central_moments(&self) -> [f64; 3] {
        let n = self.count as i128;
        let c = if n == 0 { 0 } else { (self.sums[0] + n / 2).div_euclid(n) };
        let [s1, s2, s3, s4] = self.sums;
        // sum (x - c)^k by the binomial expansion; exact in i128.
        let t1 = s1 - c * n;
        let t2 = s2 - 2 * c * s1 + c * c * n;
        let t3 = s3 - 3 * c * s2 + 3 * c * c * s1 - c * c * c * n;
        let t4 = s4 - 4 * c * s3 + 6 * c * c * s2 - 4 * c * c * c * s1 + c * c * c * c * n;
        let nf = self.count as f64;
        let (m1, m2, m3, m4) = (t1 as f64 / nf, t2 as f64 / nf, t3 as f64 / nf, t4 as f64 / nf);
        [
            m2 - m1 * m1,
            m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3),
            m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4),
        ]
    }

    /// Cumulants `kappa_1..kappa_4`.
    pub fn cumulants(&self) -> [f64; 4] {
        let [m2, m3, m4] = self.central_moments();
        [self.mean(), m2, m3, m4 - 3.0 * m2 * m2]
    }
}

impl Accumulator for PowerSums {
    fn count(&self) -> u64 {
        self.count
    }

    fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
    }

    fn remove(&mut self, other: &Self) {
        self.count -= other.count;
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a -= b;
        }
    }
}

/// First moments and pairwise products of a vector observable held in fixed
/// point with `frac_bits` fractional bits (0 for integer data).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossMoments {
    frac_bits: u32,
    count: u64,
    sums: Vec<i128>,
    /// Upper triangle, row-major.
    products: Vec<i128>,
}

impl CrossMoments {
    pub fn new(dim: usize, frac_bits: u32) -> Self {
        CrossMoments { frac_bits, count: 0, sums: vec![0; dim], products: vec![0; dim * (dim + 1) / 2] }
    }

    pub fn dim(&self) -> usize {
        self.sums.len()
    }

    fn tri(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * self.dim() - a * (a + 1) / 2 + b
    }

    /// Adds one already-quantized sample.
    pub fn push_fixed(&mut self, x: &[i128]) {
        assert_eq!(x.len(), self.dim());
        self.count += 1;
        let mut k = 0;
        for a in 0..x.len() {
            self.sums[a] += x[a];
            for &xb in &x[a..] {
                self.products[k] += x[a].checked_mul(xb).expect("cross-moment overflow");
                k += 1;
            }
        }
    }

    pub fn push_ints(&mut self, x: &[i64]) {
        debug_assert_eq!(self.frac_bits, 0);
        let q: Vec<i128> = x.iter().map(|&v| v as i128).collect();
        self.push_fixed(&q);
    }

    pub fn push_reals(&mut self, x: &[f64]) {
        let scale = (self.frac_bits as f64).exp2();
        let q: Vec<i128> = x.iter().map(|&v| (v * scale).round() as i128).collect();
        self.push_fixed(&q);
    }

    fn unit(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn mean(&self, a: usize) -> f64 {
        self.sums[a] as f64 * self.unit() / self.count as f64
    }

    /// Sample mean of `x_a x_b`.
    pub fn product_mean(&self, a: usize, b: usize) -> f64 {
        self.products[self.tri(a, b)] as f64 * self.unit() * self.unit() / self.count as f64
    }

    /// Population covariance of components `a` and `b`, formed from sums
    /// re-centred on the (quantized) mean to limit cancellation.
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        let n = self.count as i128;
        if n == 0 {
            return f64::NAN;
        }
        let (sa, sb) = (self.sums[a], self.sums[b]);
        let ca = (sa + n / 2).div_euclid(n);
        let cb = (sb + n / 2).div_euclid(n);
        let p = self.products[self.tri(a, b)];
        // sum (x_a - ca)(x_b - cb)
        let centred = p - ca * sb - cb * sa + ca * cb * n;
        let (da, db) = ((sa - ca * n) as f64, (sb - cb * n) as f64);
        let nf = self.count as f64;
        (centred as f64 / nf - da * db / (nf * nf)) * self.unit() * self.unit()
    }
}

impl Accumulator for CrossMoments {
    fn count(&self) -> u64 {
        self.count
    }

    fn merge(&mut self, other: &Self) {
        assert_eq!((self.dim(), self.frac_bits), (other.dim(), other.frac_bits));
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.products.iter_mut().zip(&other.products) {
            *a += b;
        }
    }

    fn remove(&mut self, other: &Self) {
        self.count -= other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a -= b;
        }
        for (a, b) in self.products.iter_mut().zip(&other.products) {
            *a -= b;
        }
    }
}

/// Integer-binned counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counts {
    bins: BTreeMap<u64, u64>,
    total: u64,
}

impl Counts {
    pub fn push(&mut self, x: u64) {
        *self.bins.entry(x).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn bins(&self) -> &BTreeMap<u64, u64> {
        &self.bins
    }

    pub fn get(&self, x: u64) -> u64 {
        self.bins.get(&x).copied().unwrap_or(0)
    }
}

impl Accumulator for Counts {
    fn count(&self) -> u64 {
        self.total
    }

    fn merge(&mut self, other: &Self) {
        for (&x, &c) in &other.bins {
            *self.bins.entry(x).or_insert(0) += c;
        }
        self.total += other.total;
    }

    fn remove(&mut self, other: &Self) {
        for (&x, &c) in &other.bins {
            let slot = self.bins.get_mut(&x).expect("removing a bin that was never merged");
            *slot -= c;
            if *slot == 0 {
                self.bins.remove(&x);
            }
        }
        self.total -= other.total;
    }
}

/// Number of jackknife blocks for `samples` samples.
pub const MAX_BLOCKS: usize = 256;

pub fn block_count(samples: u64) -> usize {
    (samples.min(MAX_BLOCKS as u64) as usize).max(1)
}

/// Block of sample `index`: contiguous runs of sample indices, so the
/// assignment is fixed by the plan alone.
pub fn block_of(index: u64, samples: u64, blocks: usize) -> usize {
    ((index as u128 * blocks as u128) / samples as u128) as usize
}

/// One accumulator per jackknife block.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocked<A> {
    blocks: Vec<A>,
}

impl<A: Accumulator> Blocked<A> {
    pub fn new(empty: &A, blocks: usize) -> Self {
        Blocked { blocks: vec![empty.clone(); blocks.max(1)] }
    }

    pub fn blocks(&self) -> &[A] {
        &self.blocks
    }

    pub fn block_mut(&mut self, b: usize) -> &mut A {
        &mut self.blocks[b]
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.merge(b);
        }
    }

    pub fn total(&self) -> A {
        let mut out = self.blocks[0].clone();
        for b in &self.blocks[1..] {
            out.merge(b);
        }
        out
    }

    /// `f` on all samples, with the delete-one-block jackknife error.
    /// Empty blocks are ignored; fewer than two filled blocks give an
    /// infinite error.
    pub fn estimate(&self, f: impl Fn(&A) -> f64) -> Estimate {
        let total = self.total();
        let value = f(&total);
        let partial: Vec<f64> = self
            .blocks
            .iter()
            .filter(|b| b.count() > 0)
            .map(|b| {
                let mut rest = total.clone();
                rest.remove(b);
                f(&rest)
            })
            .collect();
        let n = partial.len();
        if n < 2 {
            return Estimate { value, error: f64::INFINITY };
        }
        let mean = partial.iter().sum::<f64>() / n as f64;
        let ss: f64 = partial.iter().map(|p| (p - mean).powi(2)).sum();
        Estimate { value, error: (ss * (n - 1) as f64 / n as f64).sqrt() }
    }
}
