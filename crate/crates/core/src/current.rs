//! Generalized current fields built from two carriers.

use crate::carrier::evolve_periodic;
use crate::config::Configuration;
use crate::error::DynamicsError;

/// Values of the `(l, i)` current on every bond plus the closing value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurrentField {
    pub dyn_capacity: u32,
    pub probe_capacity: u32,
    values: Vec<u32>,
    closure: u32,
}

impl CurrentField {
    /// Value on the bond entering each site.
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Value on the bond after the last site.
    pub fn closure(&self) -> u32 {
        self.closure
    }

    pub fn total(&self) -> u64 {
        self.values.iter().map(|&v| v as u64).sum()
    }
}

/// `min(i - u'(x), u(x))` where `u` is the periodic capacity-`l` carrier on
/// `config` and `u'` the periodic capacity-`i` carrier on `T_l(config)`.
pub fn generalized_current_field(
    config: &Configuration,
    l: u32,
    i: u32,
) -> Result<CurrentField, DynamicsError> {
    let (evolved, first) = evolve_periodic(config, l)?;
    let (_, second) = evolve_periodic(&evolved, i)?;
    let cell = |u: u32, v: u32| (i - v).min(u);
    let values = first.loads().iter().zip(second.loads()).map(|(&u, &v)| cell(u, v)).collect();
    Ok(CurrentField {
        dyn_capacity: l,
        probe_capacity: i,
        values,
        closure: cell(first.exit(), second.exit()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_two_field() {
        let s: Configuration = "00011100110".parse().unwrap();
        let f = generalized_current_field(&s, 3, 2).unwrap();
        assert_eq!(f.values(), &[1, 0, 0, 0, 1, 2, 2, 1, 0, 1, 2]);
        assert_eq!(f.closure(), 1);
        let g = generalized_current_field(&s, 2, 3).unwrap();
        assert_eq!(g.values(), f.values());
    }

    #[test]
    fn large_probe_gives_the_ball_current() {
        let s: Configuration = "0011010011100000100000".parse().unwrap();
        let f = generalized_current_field(&s, 3, 40).unwrap();
        let (_, trace) = evolve_periodic(&s, 3).unwrap();
        assert_eq!(f.values(), trace.loads());
    }
}
