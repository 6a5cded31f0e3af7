//! Random initial states: i.i.d. product measures and the two-temperature
//! generalized Gibbs ensemble (GGE) sampled by Metropolis single-site flips.
//!
//! Seeding: every sample index gets its own stream, see [`derive_seed`].
//! Streams are `Xoshiro256PlusPlus` generators seeded with `seed_from_u64`,
//! which is specified bit-for-bit and therefore portable.
//!
//! Specs serialize to plain `key = value` lines. Keys: `length`, `seed`, and
//! either `density` (i.i.d.) or `beta1`, `beta_inf`, `burn_in`, `thinning`
//! (GGE). Lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::config::Configuration;
use crate::error::{EnsembleError, ParseError};

pub type StreamRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of sample `index` under `master`: `mix64(master + (index + 1) * GOLDEN)`
/// with wrapping arithmetic and `GOLDEN = 0x9E3779B97F4A7C15`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// `floor(p * 2^64)`, the integer threshold used for Bernoulli draws.
pub fn bernoulli_threshold(p: f64) -> u64 {
    assert!((0.0..1.0).contains(&p));
    (p * 18_446_744_073_709_551_616.0) as u64
}

/// Sixty-four independent Bernoulli bits with success probability
/// `threshold / 2^64`: each bit compares a lazily drawn uniform fraction
/// with the threshold, most significant bit first.
#[inline]
pub fn bernoulli_word<R: RngCore>(rng: &mut R, threshold: u64) -> u64 {
    let mut hits = 0u64;
    let mut open = !0u64;
    for bit in (0..64).rev() {
        let r = rng.next_u64();
        if (threshold >> bit) & 1 == 1 {
            hits |= open & !r;
            open &= r;
        } else {
            open &= !r;
        }
        if open == 0 {
            break;
        }
    }
    hits
}

/// Product state with ball density `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidSpec {
    pub length: usize,
    pub density: f64,
    pub seed: u64,
}

impl IidSpec {
    pub fn new(length: usize, density: f64, seed: u64) -> Result<Self, EnsembleError> {
        let spec = IidSpec { length, density, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.length == 0 {
            return Err(EnsembleError::EmptyRing);
        }
        if !(0.0..0.5).contains(&self.density) {
            return Err(EnsembleError::InvalidDensity(self.density));
        }
        Ok(())
    }

    /// `z = p / (1 - p)`.
    pub fn fugacity(&self) -> f64 {
        self.density / (1.0 - self.density)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        IidSpec { seed, ..self }
    }
}

/// Packed words of an i.i.d. configuration, drawn from `rng`.
pub fn iid_words<R: RngCore>(rng: &mut R, length: usize, density: f64) -> Vec<u64> {
    let threshold = bernoulli_threshold(density);
    let n = length.div_ceil(64);
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        words.push(if threshold == 0 { 0 } else { bernoulli_word(rng, threshold) });
    }
    if length % 64 != 0 {
        words[n - 1] &= (1u64 << (length % 64)) - 1;
    }
    words
}

pub fn sample_iid(spec: &IidSpec) -> Configuration {
    let mut rng = stream(spec.seed);
    Configuration::from_words(spec.length, iid_words(&mut rng, spec.length, spec.density))
}

/// Number of maximal ball runs on the ring (zero for the full ring).
pub fn ball_runs(config: &Configuration) -> u64 {
    let n = config.len();
    (0..n).filter(|&x| config.get(x) && !config.get((x + n - 1) % n)).count() as u64
}

/// Fugacities `(a, z)` implied by the temperatures, or an error when they leave
/// the unit square.
pub fn fugacities_of(beta1: f64, beta_inf: f64) -> Result<(f64, f64), EnsembleError> {
    let z = (-beta_inf).exp();
    let bad = |a: f64| EnsembleError::InvalidTemperature { beta1, beta_inf, a };
    if !(z > 0.0 && z < 1.0) || !beta1.is_finite() {
        return Err(bad(f64::NAN));
    }
    // sqrt(a) - 1/sqrt(a) = -c with c = e^{beta1/2} (1/sqrt(z) - sqrt(z)) > 0.
    let c = (beta1 / 2.0).exp() * (1.0 / z.sqrt() - z.sqrt());
    let s = 2.0 / (c + (c * c + 4.0).sqrt());
    let a = s * s;
    if !(a > 0.0 && a < 1.0) {
        return Err(bad(a));
    }
    Ok((a, z))
}

/// Temperatures `(beta1, beta_inf)` for given fugacities in the unit square.
pub fn temperatures_of(a: f64, z: f64) -> (f64, f64) {
    let ratio = (a.sqrt() - 1.0 / a.sqrt()) / (z.sqrt() - 1.0 / z.sqrt());
    (2.0 * ratio.ln(), -z.ln())
}

/// Two-temperature GGE with weight `exp(-beta1 E_1 - beta_inf Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gge2tSpec {
    pub length: usize,
    pub beta1: f64,
    pub beta_inf: f64,
    /// Flips before the first returned state; defaults to `20 L`.
    pub burn_in: u64,
    /// Flips between successive chain samples; defaults to `5 L`.
    pub thinning: u64,
    pub seed: u64,
}

impl Gge2tSpec {
    pub fn new(length: usize, beta1: f64, beta_inf: f64, seed: u64) -> Result<Self, EnsembleError> {
        let spec = Gge2tSpec {
            length,
            beta1,
            beta_inf,
            burn_in: 20 * length as u64,
            thinning: 5 * length as u64,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_fugacities(length: usize, a: f64, z: f64, seed: u64) -> Result<Self, EnsembleError> {
        if !(a > 0.0 && a < 1.0 && z > 0.0 && z < 1.0) {
            return Err(EnsembleError::InvalidTemperature { beta1: f64::NAN, beta_inf: f64::NAN, a });
        }
        let (beta1, beta_inf) = temperatures_of(a, z);
        Gge2tSpec::new(length, beta1, beta_inf, seed)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.length == 0 {
            return Err(EnsembleError::EmptyRing);
        }
        if self.burn_in == 0 || self.thinning == 0 {
            return Err(EnsembleError::BadChainParameters);
        }
        fugacities_of(self.beta1, self.beta_inf).map(|_| ())
    }

    pub fn fugacities(&self) -> (f64, f64) {
        fugacities_of(self.beta1, self.beta_inf).expect("validated spec")
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Gge2tSpec { seed, ..self }
    }
}

/// Metropolis chain with uniformly chosen single-site flip proposals.
pub struct Gge2tChain {
    state: Configuration,
    beta1: f64,
    beta_inf: f64,
    rng: StreamRng,
}

/// Change of the run count when site `x` is flipped.
pub fn runs_delta(config: &Configuration, x: usize) -> i64 {
    let n = config.len();
    let term = |c: &dyn Fn(usize) -> bool, y: usize| -> i64 {
        (c(y) && !c((y + n - 1) % n)) as i64
    };
    let before = |y: usize| config.get(y);
    let after = |y: usize| if y == x { !config.get(y) } else { config.get(y) };
    let right = (x + 1) % n;
    let mut delta = term(&after, x) - term(&before, x);
    if right != x {
        delta += term(&after, right) - term(&before, right);
    }
    delta
}

impl Gge2tChain {
    /// Starts from an i.i.d. state at the target ball density `a / (1 + a)`.
    pub fn new(spec: &Gge2tSpec) -> Result<Self, EnsembleError> {
        spec.validate()?;
        let (a, _) = spec.fugacities();
        let mut rng = stream(spec.seed);
        let words = iid_words(&mut rng, spec.length, a / (1.0 + a));
        Ok(Gge2tChain {
            state: Configuration::from_words(spec.length, words),
            beta1: spec.beta1,
            beta_inf: spec.beta_inf,
            rng,
        })
    }

    /// Starts from a given state.
    pub fn from_state(spec: &Gge2tSpec, state: Configuration) -> Result<Self, EnsembleError> {
        spec.validate()?;
        if state.len() != spec.length {
            return Err(EnsembleError::BadChainParameters);
        }
        Ok(Gge2tChain { state, beta1: spec.beta1, beta_inf: spec.beta_inf, rng: stream(spec.seed) })
    }

    /// Acceptance probability of flipping site `x` from the current state.
    pub fn acceptance(&self, x: usize) -> f64 {
        let dq = if self.state.get(x) { -1.0 } else { 1.0 };
        let de = runs_delta(&self.state, x) as f64;
        (-self.beta1 * de - self.beta_inf * dq).exp().min(1.0)
    }

    pub fn step(&mut self) {
        let x = self.rng.random_range(0..self.state.len());
        let acc = self.acceptance(x);
        if acc >= 1.0 || self.rng.random::<f64>() < acc {
            let v = self.state.get(x);
            self.state.set(x, !v);
        }
    }

    pub fn advance(&mut self, flips: u64) {
        for _ in 0..flips {
            self.step();
        }
    }

    pub fn state(&self) -> &Configuration {
        &self.state
    }
}

/// State after the burn-in of a fresh chain.
pub fn sample_gge2t(spec: &Gge2tSpec) -> Result<Configuration, EnsembleError> {
    let mut chain = Gge2tChain::new(spec)?;
    chain.advance(spec.burn_in);
    Ok(chain.state)
}

/// Either ensemble, as used by measurement plans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSpec {
    Iid(IidSpec),
    Gge2t(Gge2tSpec),
}

impl EnsembleSpec {
    pub fn length(&self) -> usize {
        match self {
            EnsembleSpec::Iid(s) => s.length,
            EnsembleSpec::Gge2t(s) => s.length,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            EnsembleSpec::Iid(s) => s.seed,
            EnsembleSpec::Gge2t(s) => s.seed,
        }
    }

    /// Fugacities `(a, z)`; `a = z` for product states.
    pub fn fugacities(&self) -> (f64, f64) {
        match self {
            EnsembleSpec::Iid(s) => (s.fugacity(), s.fugacity()),
            EnsembleSpec::Gge2t(s) => s.fugacities(),
        }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        match self {
            EnsembleSpec::Iid(s) => s.validate(),
            EnsembleSpec::Gge2t(s) => s.validate(),
        }
    }

    /// The `index`-th independent sample under this spec's master seed.
    pub fn sample(&self, index: u64) -> Configuration {
        let seed = derive_seed(self.seed(), index);
        match self {
            EnsembleSpec::Iid(s) => sample_iid(&s.with_seed(seed)),
            EnsembleSpec::Gge2t(s) => sample_gge2t(&s.with_seed(seed)).expect("validated spec"),
        }
    }
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ParseError> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ParseError::BadValue {
            key: line.to_string(),
            value: String::new(),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn take<T: FromStr>(
    map: &mut BTreeMap<String, String>,
    key: &'static str,
) -> Result<Option<T>, ParseError> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| ParseError::BadValue { key: key.to_string(), value: v }),
    }
}

fn require<T: FromStr>(
    map: &mut BTreeMap<String, String>,
    key: &'static str,
) -> Result<T, ParseError> {
    take(map, key)?.ok_or(ParseError::MissingKey(key))
}

impl FromStr for EnsembleSpec {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut map = parse_kv(text)?;
        let length: usize = require(&mut map, "length")?;
        let seed: u64 = take(&mut map, "seed")?.unwrap_or(0);
        let spec = if let Some(density) = take::<f64>(&mut map, "density")? {
            EnsembleSpec::Iid(IidSpec { length, density, seed })
        } else {
            let beta1 = require(&mut map, "beta1")?;
            let beta_inf = require(&mut map, "beta_inf")?;
            let burn_in = take(&mut map, "burn_in")?.unwrap_or(20 * length as u64);
            let thinning = take(&mut map, "thinning")?.unwrap_or(5 * length as u64);
            EnsembleSpec::Gge2t(Gge2tSpec { length, beta1, beta_inf, burn_in, thinning, seed })
        };
        if let Some(k) = map.keys().next() {
            return Err(ParseError::UnknownKey(k.clone()));
        }
        Ok(spec)
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSpec::Iid(s) => {
                writeln!(f, "length = {}", s.length)?;
                writeln!(f, "density = {:?}", s.density)?;
                writeln!(f, "seed = {}", s.seed)
            }
            EnsembleSpec::Gge2t(s) => {
                writeln!(f, "length = {}", s.length)?;
                writeln!(f, "beta1 = {:?}", s.beta1)?;
                writeln!(f, "beta_inf = {:?}", s.beta_inf)?;
                writeln!(f, "burn_in = {}", s.burn_in)?;
                writeln!(f, "thinning = {}", s.thinning)?;
                writeln!(f, "seed = {}", s.seed)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_is_empty() {
        let c = sample_iid(&IidSpec::new(300, 0.0, 7).unwrap());
        assert_eq!(c.ball_count(), 0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = IidSpec::new(1000, 0.3, 11).unwrap();
        assert_eq!(sample_iid(&spec), sample_iid(&spec));
        assert_ne!(sample_iid(&spec), sample_iid(&spec.with_seed(12)));
    }

    #[test]
    fn threshold_bits_are_exact_for_dyadic_densities() {
        assert_eq!(bernoulli_threshold(0.25), 1u64 << 62);
        let mut rng = stream(3);
        let n = 20_000;
        let ones: u32 = (0..n).map(|_| bernoulli_word(&mut rng, 1u64 << 62).count_ones()).sum();
        let mean = ones as f64 / (64.0 * n as f64);
        assert!((mean - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / (64.0 * n as f64)).sqrt());
    }

    #[test]
    fn temperatures_round_trip() {
        let (b1, binf) = temperatures_of(0.5, 0.25);
        let (a, z) = fugacities_of(b1, binf).unwrap();
        assert!((a - 0.5).abs() < 1e-14 && (z - 0.25).abs() < 1e-14);
        assert!(fugacities_of(0.3, -0.1).is_err());
    }

    #[test]
    fn kv_round_trip() {
        let iid = EnsembleSpec::Iid(IidSpec::new(100, 0.3, 5).unwrap());
        assert_eq!(iid.to_string().parse::<EnsembleSpec>().unwrap(), iid);
        let gge = EnsembleSpec::Gge2t(Gge2tSpec::from_fugacities(64, 0.5, 0.25, 9).unwrap());
        assert_eq!(gge.to_string().parse::<EnsembleSpec>().unwrap(), gge);
        assert!("length = 4\ncolour = 3\ndensity = 0.1".parse::<EnsembleSpec>().is_err());
    }
}
