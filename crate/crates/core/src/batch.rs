//! Bit-sliced evolution of 256 independent rings at once.
//!
//! Site `x` of all samples is one [`Mask`]; lane `k` belongs to sample `k`.
//! Carrier loads are kept as binary bit planes, plane `i` holding bit `i` of
//! every lane's load. Results agree bit for bit with [`crate::carrier`].

use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, BitXor, BitXorAssign, Not};

use crate::config::Configuration;

pub const LANES: usize = 256;
const WORDS: usize = LANES / 64;
/// Largest supported number of load planes (capacities below `2^16`).
pub const MAX_PLANES: usize = 16;

#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
#[repr(align(32))]
pub struct Mask(pub [u64; WORDS]);

impl Mask {
    pub const ZERO: Mask = Mask([0; WORDS]);
    pub const ONES: Mask = Mask([!0; WORDS]);

    #[inline(always)]
    pub fn splat(bit: bool) -> Mask {
        if bit {
            Mask::ONES
        } else {
            Mask::ZERO
        }
    }

    #[inline(always)]
    pub fn is_zero(&self) -> bool {
        self.0.iter().fold(0, |acc, w| acc | w) == 0
    }

    #[inline]
    pub fn lane(&self, k: usize) -> bool {
        (self.0[k / 64] >> (k % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_lane(&mut self, k: usize, v: bool) {
        let bit = 1u64 << (k % 64);
        if v {
            self.0[k / 64] |= bit;
        } else {
            self.0[k / 64] &= !bit;
        }
    }

    /// First `n` lanes set.
    pub fn first(n: usize) -> Mask {
        let mut m = Mask::ZERO;
        for k in 0..n.min(LANES) {
            m.set_lane(k, true);
        }
        m
    }

    pub fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    /// Calls `f(lane)` for every set lane in increasing order.
    #[inline]
    pub fn for_each_lane(&self, mut f: impl FnMut(usize)) {
        for (g, &w) in self.0.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                f(g * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
    }
}

macro_rules! lanewise {
    ($tr:ident, $f:ident, $atr:ident, $af:ident, $op:tt) => {
        impl $tr for Mask {
            type Output = Mask;
            #[inline(always)]
            fn $f(self, rhs: Mask) -> Mask {
                let mut out = [0u64; WORDS];
                for k in 0..WORDS {
                    out[k] = self.0[k] $op rhs.0[k];
                }
                Mask(out)
            }
        }
        impl $atr for Mask {
            #[inline(always)]
            fn $af(&mut self, rhs: Mask) {
                *self = *self $op rhs;
            }
        }
    };
}
lanewise!(BitAnd, bitand, BitAndAssign, bitand_assign, &);
lanewise!(BitOr, bitor, BitOrAssign, bitor_assign, |);
lanewise!(BitXor, bitxor, BitXorAssign, bitxor_assign, ^);

impl Not for Mask {
    type Output = Mask;
    #[inline(always)]
    fn not(self) -> Mask {
        let mut out = [0u64; WORDS];
        for k in 0..WORDS {
            out[k] = !self.0[k];
        }
        Mask(out)
    }
}

/// In-place transpose of a 64x64 bit matrix (bit `c` of row `r` moves to bit
/// `r` of row `c`).
pub fn transpose64(a: &mut [u64; 64]) {
    let mut j = 32usize;
    let mut m: u64 = 0x0000_0000_FFFF_FFFF;
    while j != 0 {
        let mut k = 0usize;
        while k < 64 {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k + j] ^= t;
            a[k] ^= t << j;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// Number of binary planes needed for loads up to `capacity`.
pub fn planes_for(capacity: u32) -> usize {
    (32 - capacity.leading_zeros()) as usize
}

/// Bit-sliced constant.
pub fn constant_planes(value: u32, width: usize) -> [Mask; MAX_PLANES] {
    let mut out = [Mask::ZERO; MAX_PLANES];
    for (i, p) in out.iter_mut().enumerate().take(width) {
        *p = Mask::splat((value >> i) & 1 == 1);
    }
    out
}

/// Per-lane integer values of bit-sliced numbers.
pub fn lane_values(planes: &[Mask]) -> [u64; LANES] {
    let mut out = [0u64; LANES];
    for (i, p) in planes.iter().enumerate() {
        p.for_each_lane(|k| out[k] += 1 << i);
    }
    out
}

/// Bit-sliced planes of per-lane values.
pub fn planes_of(values: &[u64], width: usize) -> [Mask; MAX_PLANES] {
    let mut out = [Mask::ZERO; MAX_PLANES];
    for (k, &v) in values.iter().enumerate().take(LANES) {
        for (i, p) in out.iter_mut().enumerate().take(width) {
            if (v >> i) & 1 == 1 {
                p.set_lane(k, true);
            }
        }
    }
    out
}

/// `c - v` for a constant `c >= v`, on `width` planes.
pub fn sub_from_constant(c: u32, v: &[Mask], width: usize) -> [Mask; MAX_PLANES] {
    let mut out = [Mask::ZERO; MAX_PLANES];
    let mut borrow = Mask::ZERO;
    for i in 0..width {
        let a = Mask::splat((c >> i) & 1 == 1);
        let b = v.get(i).copied().unwrap_or(Mask::ZERO);
        out[i] = a ^ b ^ borrow;
        borrow = (!a & b) | (!(a ^ b) & borrow);
    }
    out
}

/// Lanes where `a < b`.
pub fn less_than(a: &[Mask], b: &[Mask], width: usize) -> Mask {
    let mut borrow = Mask::ZERO;
    for i in 0..width {
        let x = a.get(i).copied().unwrap_or(Mask::ZERO);
        let y = b.get(i).copied().unwrap_or(Mask::ZERO);
        borrow = (!x & y) | (!(x ^ y) & borrow);
    }
    borrow
}

/// Lane-wise minimum.
pub fn min_planes(a: &[Mask], b: &[Mask], width: usize) -> [Mask; MAX_PLANES] {
    let lt = less_than(a, b, width);
    let mut out = [Mask::ZERO; MAX_PLANES];
    for i in 0..width {
        let x = a.get(i).copied().unwrap_or(Mask::ZERO);
        let y = b.get(i).copied().unwrap_or(Mask::ZERO);
        out[i] = (lt & x) | (!lt & y);
    }
    out
}

/// Per-lane counts of set bits over many masks, via an 8-plane bit-sliced
/// counter flushed into integers every 255 additions.
#[derive(Clone)]
pub struct LaneCounter {
    planes: [Mask; 8],
    pending: u32,
    totals: Box<[u64; LANES]>,
}

impl Default for LaneCounter {
    fn default() -> Self {
        LaneCounter { planes: [Mask::ZERO; 8], pending: 0, totals: Box::new([0; LANES]) }
    }
}

impl LaneCounter {
    #[inline(always)]
    pub fn add(&mut self, m: Mask) {
        let mut carry = m;
        for p in self.planes.iter_mut() {
            let t = *p & carry;
            *p ^= carry;
            carry = t;
            if carry.is_zero() {
                break;
            }
        }
        self.pending += 1;
        if self.pending == 255 {
            self.flush();
        }
    }

    fn flush(&mut self) {
        for (i, p) in self.planes.iter_mut().enumerate() {
            let totals = &mut self.totals;
            p.for_each_lane(|k| totals[k] += 1 << i);
            *p = Mask::ZERO;
        }
        self.pending = 0;
    }

    pub fn totals(mut self) -> [u64; LANES] {
        self.flush();
        *self.totals
    }
}

/// Per-lane sums of bit-sliced values.
#[derive(Clone, Default)]
pub struct PlaneSums {
    counters: Vec<LaneCounter>,
}

impl PlaneSums {
    pub fn add(&mut self, value: &[Mask]) {
        if self.counters.len() < value.len() {
            self.counters.resize_with(value.len(), LaneCounter::default);
        }
        for (c, &p) in self.counters.iter_mut().zip(value) {
            c.add(p);
        }
    }

    pub fn totals(self) -> [u64; LANES] {
        let mut out = [0u64; LANES];
        for (i, c) in self.counters.into_iter().enumerate() {
            for (o, t) in out.iter_mut().zip(c.totals().iter()) {
                *o += t << i;
            }
        }
        out
    }
}

/// Receives each site exactly once per sweep, with the load entering it and
/// the lanes where the carrier picks a ball up.
pub trait SiteObserver {
    fn site(&mut self, x: usize, load: &[Mask], pick: Mask);
}

impl SiteObserver for () {
    #[inline(always)]
    fn site(&mut self, _x: usize, _load: &[Mask], _pick: Mask) {}
}

/// Counts pickups per lane.
#[derive(Default)]
pub struct PickupCounter(pub LaneCounter);

impl SiteObserver for PickupCounter {
    #[inline(always)]
    fn site(&mut self, _x: usize, _load: &[Mask], pick: Mask) {
        self.0.add(pick);
    }
}

/// Stores every entering load, `planes` masks per site.
pub struct LoadRecorder {
    pub planes: usize,
    pub loads: Vec<Mask>,
}

impl LoadRecorder {
    pub fn new(len: usize, capacity: u32) -> Self {
        let planes = planes_for(capacity);
        LoadRecorder { planes, loads: vec![Mask::ZERO; len * planes] }
    }

    pub fn at(&self, x: usize) -> &[Mask] {
        &self.loads[x * self.planes..(x + 1) * self.planes]
    }
}

impl SiteObserver for LoadRecorder {
    #[inline(always)]
    fn site(&mut self, x: usize, load: &[Mask], _pick: Mask) {
        let p = self.planes;
        self.loads[x * p..(x + 1) * p].copy_from_slice(&load[..p]);
    }
}

/// Adds the entering load of every site into a per-site bit-sliced counter
/// of `width` planes (time-integrated currents).
pub struct LoadIntegrator {
    pub width: usize,
    pub sums: Vec<Mask>,
}

impl LoadIntegrator {
    pub fn new(len: usize, width: usize) -> Self {
        LoadIntegrator { width, sums: vec![Mask::ZERO; len * width] }
    }

    /// Per-lane value at site `x`.
    pub fn values_at(&self, x: usize) -> [u64; LANES] {
        lane_values(&self.sums[x * self.width..(x + 1) * self.width])
    }
}

impl SiteObserver for LoadIntegrator {
    #[inline(always)]
    fn site(&mut self, x: usize, load: &[Mask], _pick: Mask) {
        let w = self.width;
        let acc = &mut self.sums[x * w..(x + 1) * w];
        let mut carry = Mask::ZERO;
        for (i, a) in acc.iter_mut().enumerate() {
            let b = load.get(i).copied().unwrap_or(Mask::ZERO);
            let s = *a ^ b;
            let next = (*a & b) | (s & carry);
            *a = s ^ carry;
            carry = next;
        }
        debug_assert!(carry.is_zero(), "integrated load overflowed its planes");
    }
}

/// Outcome of one sweep of all lanes.
#[derive(Clone, Copy, Debug)]
pub struct Sweep {
    /// Load entering site 0 (the periodic fixed point), as bit planes.
    pub origin: [Mask; MAX_PLANES],
    pub planes: usize,
    /// Lanes whose periodic carrier was not unique in this sweep.
    pub ambiguous: Mask,
}

impl Sweep {
    pub fn origin_values(&self) -> [u64; LANES] {
        lane_values(&self.origin[..self.planes])
    }
}

macro_rules! dispatch {
    ($self:ident, $cap:expr, $write:literal, $obs:ident) => {{
        let capacity: u32 = $cap;
        assert!(capacity >= 1, "carrier capacity must be at least 1");
        match planes_for(capacity) {
            1 => $self.sweep::<1, $write, O>(capacity, $obs),
            2 => $self.sweep::<2, $write, O>(capacity, $obs),
            3 => $self.sweep::<3, $write, O>(capacity, $obs),
            4 => $self.sweep::<4, $write, O>(capacity, $obs),
            5 => $self.sweep::<5, $write, O>(capacity, $obs),
            6 => $self.sweep::<6, $write, O>(capacity, $obs),
            7 => $self.sweep::<7, $write, O>(capacity, $obs),
            8 => $self.sweep::<8, $write, O>(capacity, $obs),
            9 => $self.sweep::<9, $write, O>(capacity, $obs),
            10 => $self.sweep::<10, $write, O>(capacity, $obs),
            11 => $self.sweep::<11, $write, O>(capacity, $obs),
            12 => $self.sweep::<12, $write, O>(capacity, $obs),
            13 => $self.sweep::<13, $write, O>(capacity, $obs),
            14 => $self.sweep::<14, $write, O>(capacity, $obs),
            15 => $self.sweep::<15, $write, O>(capacity, $obs),
            16 => $self.sweep::<16, $write, O>(capacity, $obs),
            _ => panic!("capacity {capacity} exceeds the bit-sliced range"),
        }
    }};
}

/// 256 rings of equal length evolving in lockstep.
#[derive(Clone)]
pub struct Batch {
    len: usize,
    sites: Vec<Mask>,
    lanes: usize,
    invalid: Mask,
}

impl Batch {
    /// Packs up to 256 configurations of equal length; unused lanes are empty.
    pub fn from_configs(configs: &[Configuration]) -> Self {
        assert!(!configs.is_empty() && configs.len() <= LANES);
        let len = configs[0].len();
        assert!(configs.iter().all(|c| c.len() == len), "lanes need equal lengths");
        let mut sites = vec![Mask::ZERO; len];
        let mut block = [0u64; 64];
        for b in 0..len.div_ceil(64) {
            for g in 0..WORDS {
                for (r, row) in block.iter_mut().enumerate() {
                    *row = configs.get(g * 64 + r).map_or(0, |c| c.words()[b]);
                }
                transpose64(&mut block);
                for (s, &row) in block.iter().enumerate() {
                    if let Some(site) = sites.get_mut(b * 64 + s) {
                        site.0[g] = row;
                    }
                }
            }
        }
        Batch { len, sites, lanes: configs.len(), invalid: Mask::ZERO }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of lanes carrying real samples.
    pub fn lanes(&self) -> usize {
        self.lanes
    }

    /// Lanes that met an ambiguous periodic carrier in some sweep.
    pub fn invalid(&self) -> Mask {
        self.invalid
    }

    pub fn sites(&self) -> &[Mask] {
        &self.sites
    }

    /// Unpacks all lanes.
    pub fn configs(&self) -> Vec<Configuration> {
        let nw = self.len.div_ceil(64);
        let mut words = vec![vec![0u64; nw]; LANES];
        let mut block = [0u64; 64];
        for b in 0..nw {
            for g in 0..WORDS {
                for (s, row) in block.iter_mut().enumerate() {
                    *row = self.sites.get(b * 64 + s).map_or(0, |m| m.0[g]);
                }
                transpose64(&mut block);
                for (r, &row) in block.iter().enumerate() {
                    words[g * 64 + r][b] = row;
                }
            }
        }
        words
            .into_iter()
            .take(self.lanes)
            .map(|w| Configuration::from_words(self.len, w))
            .collect()
    }

    pub fn lane_config(&self, k: usize) -> Configuration {
        Configuration::from_bits(self.sites.iter().map(|m| m.lane(k)))
    }

    fn lane_balls(&self, k: usize) -> i64 {
        self.sites.iter().filter(|m| m.lane(k)).count() as i64
    }

    /// Applies `T_capacity` to every lane.
    pub fn evolve(&mut self, capacity: u32) -> Sweep {
        self.evolve_observed(capacity, &mut ())
    }

    /// Applies `T_capacity`, reporting every site to `obs`.
    pub fn evolve_observed<O: SiteObserver>(&mut self, capacity: u32, obs: &mut O) -> Sweep {
        dispatch!(self, capacity, true, obs)
    }

    /// Runs the periodic carrier without changing the lanes.
    pub fn observe<O: SiteObserver>(&mut self, capacity: u32, obs: &mut O) -> Sweep {
        dispatch!(self, capacity, false, obs)
    }

    /// `E_capacity` of every lane.
    pub fn energies(&mut self, capacity: u32) -> [u64; LANES] {
        let mut counter = PickupCounter::default();
        self.observe(capacity, &mut counter);
        counter.0.totals()
    }

    fn sweep<const NB: usize, const WRITE: bool, O: SiteObserver>(
        &mut self,
        capacity: u32,
        obs: &mut O,
    ) -> Sweep {
        let cap_full = constant_planes(capacity, MAX_PLANES);
        let mut cap = [Mask::ZERO; NB];
        cap.copy_from_slice(&cap_full[..NB]);
        let len = self.len;

        // Carriers entering with loads 0 and `capacity` until they agree in all lanes.
        let mut lo = [Mask::ZERO; NB];
        let mut hi = cap;
        let mut meet = len;
        for x in 0..len {
            let occ = self.sites[x];
            step(&mut lo, occ, &cap);
            step(&mut hi, occ, &cap);
            let mut diff = Mask::ZERO;
            for i in 0..NB {
                diff |= lo[i] ^ hi[i];
            }
            if diff.is_zero() {
                meet = x + 1;
                break;
            }
        }

        let coalesced = lo;
        let mut ambiguous = Mask::ZERO;
        let start: [Mask; NB] = if meet < len || planes_equal(&lo, &hi) {
            for x in meet..len {
                let entering = lo;
                let (new, pick) = step(&mut lo, self.sites[x], &cap);
                if WRITE {
                    self.sites[x] = new;
                }
                obs.site(x, &entering, pick);
            }
            lo
        } else {
            // The pass map is clamp(u + 2Q - L, lo, hi); pick its fixed point per lane.
            let mut open = Mask::ZERO;
            for i in 0..NB {
                open |= lo[i] ^ hi[i];
            }
            let mut take_hi = Mask::ZERO;
            let len_i = len as i64;
            open.for_each_lane(|k| match (2 * self.lane_balls(k) - len_i).signum() {
                1 => take_hi.set_lane(k, true),
                0 => ambiguous.set_lane(k, true),
                _ => {}
            });
            let mut s = [Mask::ZERO; NB];
            for i in 0..NB {
                s[i] = (take_hi & hi[i]) | (!take_hi & lo[i]);
            }
            meet = len;
            s
        };

        let mut u = start;
        for x in 0..meet {
            let entering = u;
            let (new, pick) = step(&mut u, self.sites[x], &cap);
            if WRITE {
                self.sites[x] = new;
            }
            obs.site(x, &entering, pick);
        }
        debug_assert!(meet == len || planes_equal(&u, &coalesced));

        self.invalid |= ambiguous;
        let mut origin = [Mask::ZERO; MAX_PLANES];
        origin[..NB].copy_from_slice(&start);
        Sweep { origin, planes: NB, ambiguous }
    }
}

#[inline(always)]
fn planes_equal<const NB: usize>(a: &[Mask; NB], b: &[Mask; NB]) -> bool {
    let mut diff = Mask::ZERO;
    for i in 0..NB {
        diff |= a[i] ^ b[i];
    }
    diff.is_zero()
}

/// One carrier step on all lanes; returns the new site and the pickup lanes.
#[inline(always)]
fn step<const NB: usize>(load: &mut [Mask; NB], occ: Mask, cap: &[Mask; NB]) -> (Mask, Mask) {
    let mut full = Mask::ONES;
    let mut loaded = Mask::ZERO;
    for i in 0..NB {
        full &= !(load[i] ^ cap[i]);
        loaded |= load[i];
    }
    let pick = occ & !full;
    let drop = !occ & loaded;
    let new = (occ & full) | drop;
    let mut carry = pick;
    let mut borrow = drop;
    for plane in load.iter_mut() {
        let b = *plane;
        *plane = b ^ (carry | borrow);
        carry &= b;
        borrow &= !b;
    }
    (new, pick)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_matches_naive() {
        let mut a = [0u64; 64];
        let mut x = 0x1234_5678_9ABC_DEF1u64;
        for row in a.iter_mut() {
            x = crate::ensemble::mix64(x);
            *row = x;
        }
        let orig = a;
        transpose64(&mut a);
        for r in 0..64 {
            for c in 0..64 {
                assert_eq!((orig[r] >> c) & 1, (a[c] >> r) & 1);
            }
        }
    }

    #[test]
    fn arithmetic_helpers() {
        let vals: Vec<u64> = (0..LANES as u64).map(|k| k % 11).collect();
        let other: Vec<u64> = (0..LANES as u64).map(|k| (k * 7) % 11).collect();
        let a = planes_of(&vals, 4);
        let b = planes_of(&other, 4);
        let d = sub_from_constant(10, &a, 4);
        let m = min_planes(&a, &b, 4);
        let dv = lane_values(&d[..4]);
        let mv = lane_values(&m[..4]);
        for k in 0..LANES {
            assert_eq!(dv[k], 10 - vals[k]);
            assert_eq!(mv[k], vals[k].min(other[k]));
        }
    }

    #[test]
    fn lane_counter_counts() {
        let mut c = LaneCounter::default();
        for i in 0..1000usize {
            let mut m = Mask::ZERO;
            for k in 0..LANES {
                m.set_lane(k, (i + k) % 3 == 0);
            }
            c.add(m);
        }
        let t = c.totals();
        for k in 0..LANES {
            assert_eq!(t[k], (0..1000).filter(|i| (i + k) % 3 == 0).count() as u64);
        }
    }
}
