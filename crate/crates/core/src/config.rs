//! Ring configurations stored as packed bits.
//!
//! Text format: a single line of `0`/`1` characters, site 0 first.
//!
//! Binary format: an 8-byte little-endian `u64` length `L`, followed by
//! `ceil(L/8)` bytes. Site `x` lives in byte `x / 8` at bit `x % 8`
//! (least significant bit first). Padding bits in the last byte must be zero.

use std::fmt;
use std::str::FromStr;

use crate::error::ParseError;

/// Occupancies of a periodic lattice of `L >= 1` boxes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    len: usize,
    words: Vec<u64>,
}

impl Configuration {
    /// The empty lattice of length `len`.
    pub fn empty(len: usize) -> Self {
        assert!(len >= 1, "a ring needs at least one site");
        Configuration { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        assert!(len >= 1, "a ring needs at least one site");
        Configuration { len, words }
    }

    /// Builds a configuration from raw words; bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        assert!(len >= 1, "a ring needs at least one site");
        words.resize(len.div_ceil(64), 0);
        if len % 64 != 0 {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % 64)) - 1;
        }
        Configuration { len, words }
    }

    /// Low `len` bits of `pattern` (site 0 = bit 0).
    pub fn from_pattern(len: usize, pattern: u64) -> Self {
        assert!(len <= 64);
        Configuration::from_words(len, vec![pattern])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; present for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        debug_assert!(x < self.len);
        (self.words[x / 64] >> (x % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, value: bool) {
        debug_assert!(x < self.len);
        let mask = 1u64 << (x % 64);
        if value {
            self.words[x / 64] |= mask;
        } else {
            self.words[x / 64] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Number of balls `Q`.
    pub fn ball_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |x| self.get(x))
    }

    /// Cyclic shift to the right by `k` sites: site `x` moves to `x + k`.
    pub fn rotate_right(&self, k: usize) -> Self {
        let k = k % self.len;
        Configuration::from_bits((0..self.len).map(|x| self.get((x + self.len - k) % self.len)))
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.len.div_ceil(8));
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        for b in 0..self.len.div_ceil(8) {
            out.push((self.words[b / 8] >> (8 * (b % 8))) as u8);
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self, ParseError> {
        let header: [u8; 8] = bytes
            .get(..8)
            .and_then(|h| h.try_into().ok())
            .ok_or(ParseError::Truncated)?;
        let len = u64::from_le_bytes(header) as usize;
        if len == 0 {
            return Err(ParseError::EmptyRing);
        }
        let body = &bytes[8..];
        if body.len() != len.div_ceil(8) {
            return Err(ParseError::LengthMismatch { declared: len, bytes: body.len() });
        }
        let mut words = vec![0u64; len.div_ceil(64)];
        for (b, &byte) in body.iter().enumerate() {
            words[b / 8] |= (byte as u64) << (8 * (b % 8));
        }
        if len % 8 != 0 && body[body.len() - 1] >> (len % 8) != 0 {
            return Err(ParseError::NonZeroPadding);
        }
        Ok(Configuration { len, words })
    }
}

impl FromStr for Configuration {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseError::EmptyRing);
        }
        let mut bits = Vec::with_capacity(s.len());
        for (pos, c) in s.chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(ParseError::BadCharacter { pos, found: other }),
            }
        }
        Ok(Configuration::from_bits(bits))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}
