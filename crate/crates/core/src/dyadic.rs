//! Dyadic scales `2^-k` and distances reported at a finite comparison depth.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The number `2^-exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    pub exp: u32,
}

impl Dyadic {
    pub const ONE: Dyadic = Dyadic { exp: 0 };

    pub fn pow2_neg(exp: u32) -> Self {
        Dyadic { exp }
    }

    pub fn to_f64(self) -> f64 {
        (-(self.exp as f64)).exp2()
    }

    /// `2 * self`, saturating at 1.
    pub fn double(self) -> Self {
        Dyadic {
            exp: self.exp.saturating_sub(1),
        }
    }

    pub fn half(self) -> Self {
        Dyadic { exp: self.exp + 1 }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        other.exp.cmp(&self.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "1")
        } else {
            write!(f, "2^-{}", self.exp)
        }
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" || s == "2^0" || s == "2^-0" {
            return Ok(Dyadic::ONE);
        }
        let rest = s
            .strip_prefix("2^-")
            .ok_or_else(|| Error::Parse(format!("expected 2^-k, got {s:?}")))?;
        let exp = rest
            .parse::<u32>()
            .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
        Ok(Dyadic { exp })
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A distance computed by comparing two patterns on `Σ^D`.
///
/// `Exact` is the true distance; `AtMost` means the patterns agree on the
/// whole comparison ball, so only the bound `2^-D` is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DyadicDistance {
    Exact(Dyadic),
    AtMost(Dyadic),
}

impl DyadicDistance {
    pub fn bound(self) -> Dyadic {
        match self {
            DyadicDistance::Exact(d) | DyadicDistance::AtMost(d) => d,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, DyadicDistance::Exact(_))
    }

    /// Whether the distance is certainly below `eps`. An `AtMost(2^-D)` value
    /// counts as below `eps = 2^-k` exactly when `D > k`.
    pub fn is_below(self, eps: Dyadic) -> bool {
        self.bound() < eps
    }

    /// Whether the distance is certainly at most `eps`.
    pub fn is_at_most(self, eps: Dyadic) -> bool {
        self.bound() <= eps
    }

    fn key(self) -> (std::cmp::Reverse<u32>, u8) {
        match self {
            DyadicDistance::Exact(d) => (std::cmp::Reverse(d.exp), 1),
            DyadicDistance::AtMost(d) => (std::cmp::Reverse(d.exp), 0),
        }
    }
}

impl Ord for DyadicDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for DyadicDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DyadicDistance::Exact(d) => write!(f, "{d}"),
            DyadicDistance::AtMost(d) => write!(f, "<={d}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!("2^-3".parse::<Dyadic>().unwrap(), Dyadic::pow2_neg(3));
        assert_eq!("1".parse::<Dyadic>().unwrap(), Dyadic::ONE);
        assert_eq!(Dyadic::pow2_neg(4).to_string(), "2^-4");
        assert!("0.5".parse::<Dyadic>().is_err());
    }

    #[test]
    fn ordering_is_by_value() {
        assert!(Dyadic::pow2_neg(1) > Dyadic::pow2_neg(2));
        let e2 = DyadicDistance::Exact(Dyadic::pow2_neg(2));
        let a4 = DyadicDistance::AtMost(Dyadic::pow2_neg(4));
        assert!(e2 > a4);
        assert!(a4.is_below(Dyadic::pow2_neg(3)));
        assert!(!a4.is_below(Dyadic::pow2_neg(4)));
        assert!(e2.is_at_most(Dyadic::pow2_neg(2)));
    }
}
