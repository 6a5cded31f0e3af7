//! The capacity-`l` carrier and the time evolutions `T_l`.
//!
//! A carrier sweeps left to right. On an occupied site with spare room it picks
//! the ball up; on an empty site while loaded it drops one; otherwise it passes.

use crate::config::Configuration;
use crate::error::DynamicsError;

/// A carrier state of capacity `l`: `load` balls and `l - load` holes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CarrierElement {
    capacity: u32,
    load: u32,
}

impl CarrierElement {
    pub fn new(capacity: u32, load: u32) -> Result<Self, DynamicsError> {
        if capacity == 0 {
            return Err(DynamicsError::ZeroCapacity);
        }
        if load > capacity {
            return Err(DynamicsError::LoadOutOfRange { load, capacity });
        }
        Ok(CarrierElement { capacity, load })
    }

    /// Builds the element from its (holes, balls) pair.
    pub fn from_pair(holes: u32, balls: u32) -> Result<Self, DynamicsError> {
        CarrierElement::new(holes + balls, balls)
    }

    pub fn capacity(self) -> u32 {
        self.capacity
    }

    pub fn load(self) -> u32 {
        self.load
    }

    /// Number of empty slots.
    pub fn holes(self) -> u32 {
        self.capacity - self.load
    }

    /// The pair `(holes, balls)`; index 0 counts holes, index 1 balls.
    pub fn pair(self) -> [u32; 2] {
        [self.holes(), self.load]
    }

    /// Enumerates all elements of the given capacity, ordered by load.
    pub fn all(capacity: u32) -> impl Iterator<Item = CarrierElement> {
        (0..=capacity).map(move |load| CarrierElement { capacity, load })
    }
}

/// Carrier loads of one sweep. `loads()[x]` is the load entering site `x`;
/// the exit load is kept separately. For a periodic sweep `exit == loads()[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarrierTrace {
    capacity: u32,
    loads: Vec<u32>,
    exit: u32,
}

impl CarrierTrace {
    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn loads(&self) -> &[u32] {
        &self.loads
    }

    pub fn exit(&self) -> u32 {
        self.exit
    }

    pub fn element(&self, x: usize) -> CarrierElement {
        CarrierElement { capacity: self.capacity, load: self.loads[x] }
    }

    /// Sum of loads over all bonds: the total ball current of the sweep.
    pub fn total(&self) -> u64 {
        self.loads.iter().map(|&u| u as u64).sum()
    }

    pub fn into_loads(self) -> Vec<u32> {
        self.loads
    }
}

#[inline]
fn check_capacity(capacity: u32) -> Result<(), DynamicsError> {
    if capacity == 0 {
        Err(DynamicsError::ZeroCapacity)
    } else {
        Ok(())
    }
}

/// One carrier step on a site. Returns the new site value and the new load.
#[inline(always)]
pub fn site_step(occupied: bool, load: u32, capacity: u32) -> (bool, u32) {
    if occupied {
        if load < capacity {
            (false, load + 1)
        } else {
            (true, load)
        }
    } else if load > 0 {
        (true, load - 1)
    } else {
        (false, 0)
    }
}

/// Single left-to-right pass starting from `initial_load`.
pub fn evolve_open(
    config: &Configuration,
    capacity: u32,
    initial_load: u32,
) -> Result<(Configuration, CarrierTrace), DynamicsError> {
    check_capacity(capacity)?;
    if initial_load > capacity {
        return Err(DynamicsError::LoadOutOfRange { load: initial_load, capacity });
    }
    let mut out = config.clone();
    let mut loads = Vec::with_capacity(config.len());
    let mut u = initial_load;
    for x in 0..config.len() {
        loads.push(u);
        let (site, next) = site_step(config.get(x), u, capacity);
        out.set(x, site);
        u = next;
    }
    Ok((out, CarrierTrace { capacity, loads, exit: u }))
}

/// Exit load of an open pass, without building the output.
pub fn exit_load(config: &Configuration, capacity: u32, initial_load: u32) -> u32 {
    let mut u = initial_load;
    for x in 0..config.len() {
        u = site_step(config.get(x), u, capacity).1;
    }
    u
}

/// Entering load of the periodic carrier.
///
/// The pass map has the form `u -> clamp(u + 2Q - L, f(0), f(l))`, so one
/// simultaneous pass from loads `0` and `l` determines it. The result is the
/// least fixed point, the same value iteration from `u = 0` converges to. When
/// `2Q = L` and `f(0) < f(l)` every load in between is a fixed point and the
/// evolution is not defined.
pub fn periodic_load(config: &Configuration, capacity: u32) -> Result<u32, DynamicsError> {
    check_capacity(capacity)?;
    let mut lo = 0u32;
    let mut hi = capacity;
    for x in 0..config.len() {
        let occ = config.get(x);
        lo = site_step(occ, lo, capacity).1;
        hi = site_step(occ, hi, capacity).1;
    }
    if lo == hi {
        return Ok(lo);
    }
    let drift = 2 * config.ball_count() as i64 - config.len() as i64;
    match drift.signum() {
        1 => Ok(hi),
        -1 => Ok(lo),
        _ => Err(DynamicsError::CarrierNonConvergent { capacity }),
    }
}

/// Applies `T_l` on the ring.
pub fn evolve_periodic(
    config: &Configuration,
    capacity: u32,
) -> Result<(Configuration, CarrierTrace), DynamicsError> {
    let u = periodic_load(config, capacity)?;
    let (out, trace) = evolve_open(config, capacity, u)?;
    debug_assert_eq!(trace.exit, u);
    Ok((out, trace))
}

/// `T_l` applied `steps` times.
pub fn evolve_steps(
    config: &Configuration,
    capacity: u32,
    steps: usize,
) -> Result<Configuration, DynamicsError> {
    let mut c = config.clone();
    for _ in 0..steps {
        c = evolve_periodic(&c, capacity)?.0;
    }
    Ok(c)
}
