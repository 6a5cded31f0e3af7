//! Conserved energies `E_k`, soliton content and pseudoenergies.

use crate::carrier::{periodic_load, site_step};
use crate::config::Configuration;
use crate::error::DynamicsError;

/// Number of pickups made by the periodic capacity-`k` carrier.
pub fn energy(config: &Configuration, k: u32) -> Result<u64, DynamicsError> {
    let mut u = periodic_load(config, k)?;
    let mut pickups = 0u64;
    for x in 0..config.len() {
        let occ = config.get(x);
        if occ && u < k {
            pickups += 1;
        }
        u = site_step(occ, u, k).1;
    }
    Ok(pickups)
}

/// Energies `E_1..E_K` of one configuration together with its length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergySpectrum {
    length: usize,
    energies: Vec<u64>,
}

impl EnergySpectrum {
    /// Wraps precomputed energies `E_1..E_K`.
    pub fn new(length: usize, energies: Vec<u64>) -> Self {
        EnergySpectrum { length, energies }
    }

    /// Computes `E_1..E_max_k`.
    pub fn of(config: &Configuration, max_k: u32) -> Result<Self, DynamicsError> {
        let energies = (1..=max_k).map(|k| energy(config, k)).collect::<Result<_, _>>()?;
        Ok(EnergySpectrum { length: config.len(), energies })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// `E_1..E_K`.
    pub fn energies(&self) -> &[u64] {
        &self.energies
    }

    /// `E_k` with the convention `E_0 = 0`; `None` beyond the computed range.
    pub fn get(&self, k: usize) -> Option<u64> {
        if k == 0 {
            Some(0)
        } else {
            self.energies.get(k - 1).copied()
        }
    }

    /// True when the last two computed energies coincide.
    pub fn is_saturated(&self) -> bool {
        match self.energies.as_slice() {
            [.., a, b] => a == b,
            [e] => *e == 0,
            [] => false,
        }
    }
}

/// Multiplicities `m_1..m_K` of solitons of each size.
///
/// Needs a saturated spectrum so that `E_{K+1} = E_K` is known.
pub fn soliton_content(spec: &EnergySpectrum) -> Result<Vec<u64>, DynamicsError> {
    let e = spec.energies();
    if !spec.is_saturated() {
        return Err(DynamicsError::NonSaturatedSpectrum { k: e.len() });
    }
    let at = |k: usize| -> i64 {
        if k == 0 {
            0
        } else {
            e[(k - 1).min(e.len() - 1)] as i64
        }
    };
    (1..=e.len())
        .map(|k| {
            let m = 2 * at(k) - at(k - 1) - at(k + 1);
            u64::try_from(m).map_err(|_| DynamicsError::NonSaturatedSpectrum { k })
        })
        .collect()
}

/// Like [`soliton_content`] but checks saturation against the ball count.
pub fn soliton_content_checked(
    spec: &EnergySpectrum,
    balls: u64,
) -> Result<Vec<u64>, DynamicsError> {
    if let Some(&last) = spec.energies().last() {
        if last != balls {
            return Err(DynamicsError::NonSaturatedSpectrum { k: spec.energies().len() });
        }
    }
    soliton_content(spec)
}

/// `eps_i = -ln((2E_i - E_{i+1} - E_{i-1}) / (L - 2E_i))` for `i = 1..K-1`.
pub fn pseudoenergies(spec: &EnergySpectrum) -> Result<Vec<f64>, DynamicsError> {
    let k_max = spec.energies().len().saturating_sub(1);
    (1..=k_max).map(|i| pseudoenergy(spec, i)).collect()
}

/// A single pseudoenergy; requires `E_{i+1}` in the spectrum.
pub fn pseudoenergy(spec: &EnergySpectrum, i: usize) -> Result<f64, DynamicsError> {
    let undefined = DynamicsError::UndefinedPseudoenergy { size: i };
    if i == 0 {
        return Err(undefined);
    }
    let (prev, cur, next) = match (spec.get(i - 1), spec.get(i), spec.get(i + 1)) {
        (Some(a), Some(b), Some(c)) => (a as i64, b as i64, c as i64),
        _ => return Err(undefined),
    };
    let multiplicity = 2 * cur - prev - next;
    let holes = spec.length() as i64 - 2 * cur;
    if multiplicity <= 0 || holes <= 0 {
        return Err(undefined);
    }
    Ok(-((multiplicity as f64) / (holes as f64)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_spectrum() {
        let s: Configuration = "00011100110".parse().unwrap();
        let spec = EnergySpectrum::of(&s, 4).unwrap();
        assert_eq!(spec.energies(), &[2, 4, 5, 5]);
        assert_eq!(soliton_content(&spec).unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(soliton_content_checked(&spec, 5).unwrap(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn pseudoenergies_of_the_figure_state() {
        let s: Configuration = "00011100110".parse().unwrap();
        let spec = EnergySpectrum::of(&s, 4).unwrap();
        // No soliton of size one: the first second difference vanishes.
        assert_eq!(pseudoenergy(&spec, 1), Err(DynamicsError::UndefinedPseudoenergy { size: 1 }));
        assert!((pseudoenergy(&spec, 2).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((pseudoenergy(&spec, 3).unwrap() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn single_run() {
        let mut s = Configuration::empty(40);
        for x in 10..17 {
            s.set(x, true);
        }
        let spec = EnergySpectrum::of(&s, 9).unwrap();
        let m = soliton_content(&spec).unwrap();
        assert_eq!(m[6], 1);
        assert_eq!(m.iter().sum::<u64>(), 1);
    }

    #[test]
    fn unsaturated_spectrum_is_rejected() {
        let s: Configuration = "00011100110".parse().unwrap();
        let spec = EnergySpectrum::of(&s, 2).unwrap();
        assert!(soliton_content(&spec).is_err());
        let empty = EnergySpectrum::of(&Configuration::empty(5), 3).unwrap();
        assert_eq!(soliton_content(&empty).unwrap(), vec![0, 0, 0]);
    }
}
