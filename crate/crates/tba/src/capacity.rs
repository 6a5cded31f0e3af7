use std::fmt;
use std::str::FromStr;

use crate::error::{domain, AnalyticsError};

/// Carrier capacity or soliton-size index; `Infinite` is the `l -> oo` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capacity {
    Finite(u32),
    Infinite,
}

impl Capacity {
    pub fn finite(l: u32) -> Result<Self, AnalyticsError> {
        if l == 0 {
            return Err(domain("capacity must be at least 1"));
        }
        Ok(Capacity::Finite(l))
    }

    /// `min(self, k)` as a size index.
    pub fn clamp(self, k: u32) -> u32 {
        match self {
            Capacity::Finite(l) => l.min(k),
            Capacity::Infinite => k,
        }
    }

    pub fn as_finite(self) -> Option<u32> {
        match self {
            Capacity::Finite(l) => Some(l),
            Capacity::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Capacity::Infinite
    }
}

impl From<u32> for Capacity {
    fn from(l: u32) -> Self {
        Capacity::Finite(l)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(l) => write!(f, "{l}"),
            Capacity::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Capacity {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Capacity::Infinite),
            t => t
                .parse::<u32>()
                .map_err(|_| domain(format!("bad capacity {t:?}")))
                .and_then(Capacity::finite),
        }
    }
}
