//! Nonnegative integers extended with symbolic towers of twos.
//!
//! A [`HyperInt`] is either an exact arbitrary-precision integer or a tower
//! `2_k^x`, the `k`-th iterate of `x -> 2^x` applied to `x`. Towers are kept
//! canonical: every tower whose value lies below `2^64` is stored exactly, and
//! the top of a stored tower is always at least 64. Comparison is exact on the
//! denoted integers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Values with fewer bits than this are always stored exactly.
pub const CANONICAL_BITS: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperError {
    #[error("operand {0} is not exact")]
    NotExact(String),
    #[error("cannot parse hyperint `{0}`")]
    Parse(String),
}

#[derive(Clone, Debug)]
pub enum HyperInt {
    Exact(BigUint),
    /// `2_height^top`; `height >= 1` and `top >= 64` in canonical form.
    Tower { height: u64, top: BigUint },
}

/// Result of an operation that may have absorbed a small factor or summand
/// into a tower instead of representing it exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flagged {
    pub value: HyperInt,
    pub saturated: bool,
}

impl Flagged {
    fn exact(value: HyperInt) -> Self {
        Flagged { value, saturated: false }
    }
}

impl HyperInt {
    pub fn zero() -> Self {
        HyperInt::Exact(BigUint::zero())
    }

    pub fn one() -> Self {
        HyperInt::Exact(BigUint::one())
    }

    /// Builds `2_height^top` and canonicalizes it.
    pub fn tower_of(height: u64, top: BigUint) -> Self {
        let mut h = height;
        let mut x = top;
        while h > 0 && x < BigUint::from(CANONICAL_BITS) {
            let shift = x.to_u64().expect("below 64");
            x = BigUint::one() << shift;
            h -= 1;
        }
        if h == 0 {
            HyperInt::Exact(x)
        } else {
            HyperInt::Tower { height: h, top: x }
        }
    }

    /// `2^n` for a machine-sized exponent.
    pub fn pow2(n: u64) -> Self {
        HyperInt::Exact(BigUint::from(n)).exp2()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, HyperInt::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            HyperInt::Exact(v) => Some(v),
            HyperInt::Tower { .. } => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.as_exact().and_then(|v| v.to_u64())
    }

    /// Denotation of `2^self`.
    pub fn exp2(&self) -> Self {
        match self {
            HyperInt::Exact(x) => HyperInt::tower_of(1, x.clone()),
            HyperInt::Tower { height, top } => HyperInt::Tower {
                height: height.checked_add(1).expect("tower height overflow"),
                top: top.clone(),
            },
        }
    }

    /// `k`-fold application of [`HyperInt::exp2`]. Runs in time independent of
    /// `k` once the value has left the exact regime.
    pub fn tower(k: u64, m: &HyperInt) -> Self {
        let mut remaining = k;
        let mut cur = m.clone();
        while remaining > 0 {
            match cur {
                HyperInt::Exact(_) => {
                    cur = cur.exp2();
                    remaining -= 1;
                }
                HyperInt::Tower { height, top } => {
                    let height = height.checked_add(remaining).expect("tower height overflow");
                    return HyperInt::Tower { height, top };
                }
            }
        }
        cur
    }

    pub fn max_h(a: &HyperInt, b: &HyperInt) -> HyperInt {
        if a.cmp(b) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }

    pub fn min_h(a: &HyperInt, b: &HyperInt) -> HyperInt {
        if b.cmp(a) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }

    pub fn add_exact(a: &HyperInt, b: &HyperInt) -> Result<HyperInt, HyperError> {
        match (a, b) {
            (HyperInt::Exact(x), HyperInt::Exact(y)) => Ok(HyperInt::Exact(x + y)),
            (HyperInt::Exact(_), t) | (t, _) => Err(HyperError::NotExact(t.to_string())),
        }
    }

    /// Sum that falls back to the larger operand when a tower is involved.
    pub fn add_saturating(a: &HyperInt, b: &HyperInt) -> Flagged {
        match (a, b) {
            (HyperInt::Exact(x), HyperInt::Exact(y)) => Flagged::exact(HyperInt::Exact(x + y)),
            (HyperInt::Exact(x), t) | (t, HyperInt::Exact(x)) if x.is_zero() => {
                Flagged::exact(t.clone())
            }
            _ => Flagged { value: HyperInt::max_h(a, b), saturated: true },
        }
    }

    /// Multiplication by a machine-sized factor. A tower absorbs any factor
    /// `c < 2^64` (its dominance slack) and the result is flagged.
    pub fn mul_small(&self, c: u64) -> Flagged {
        match self {
            HyperInt::Exact(x) => Flagged::exact(HyperInt::Exact(x * BigUint::from(c))),
            HyperInt::Tower { .. } if c == 0 => Flagged::exact(HyperInt::zero()),
            HyperInt::Tower { .. } => Flagged { value: self.clone(), saturated: c > 1 },
        }
    }

    /// `self^d`. Towers are returned unchanged (flagged), which underestimates
    /// the power and so keeps `cost <= c * f^d` checks conservative.
    pub fn pow_small(&self, d: u32) -> Flagged {
        match self {
            HyperInt::Exact(x) => Flagged::exact(HyperInt::Exact(x.pow(d))),
            HyperInt::Tower { .. } if d == 0 => Flagged::exact(HyperInt::one()),
            HyperInt::Tower { .. } => Flagged { value: self.clone(), saturated: d > 1 },
        }
    }

    /// Bit length for exact values, `None` for towers.
    pub fn exact_bits(&self) -> Option<u64> {
        self.as_exact().map(|v| v.bits())
    }

    fn lowered(height: u64, top: &BigUint) -> HyperInt {
        if height == 0 {
            HyperInt::Exact(top.clone())
        } else {
            HyperInt::Tower { height, top: top.clone() }
        }
    }
}

fn cmp_exact_tower(a: &BigUint, height: u64, top: &BigUint) -> Ordering {
    // Canonical towers are at least 2^64.
    if a.bits() <= CANONICAL_BITS {
        return Ordering::Less;
    }
    let exponent = HyperInt::lowered(height - 1, top);
    let len = a.bits();
    let below = HyperInt::Exact(BigUint::from(len - 1));
    let power_of_two = (a & (a - BigUint::one())).is_zero();
    if power_of_two {
        below.cmp(&exponent)
    } else if below.cmp(&exponent) != Ordering::Less {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

impl Ord for HyperInt {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (HyperInt::Exact(a), HyperInt::Exact(b)) => a.cmp(b),
            (HyperInt::Exact(a), HyperInt::Tower { height, top }) => cmp_exact_tower(a, *height, top),
            (HyperInt::Tower { height, top }, HyperInt::Exact(b)) => {
                cmp_exact_tower(b, *height, top).reverse()
            }
            (
                HyperInt::Tower { height: h1, top: x1 },
                HyperInt::Tower { height: h2, top: x2 },
            ) => {
                let d = (*h1).min(*h2);
                HyperInt::lowered(h1 - d, x1).cmp(&HyperInt::lowered(h2 - d, x2))
            }
        }
    }
}

impl PartialOrd for HyperInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Equality of denoted values, so `Exact(2^100)` equals `T:1:100`.
impl PartialEq for HyperInt {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HyperInt {}

impl From<u64> for HyperInt {
    fn from(v: u64) -> Self {
        HyperInt::Exact(BigUint::from(v))
    }
}

impl From<BigUint> for HyperInt {
    fn from(v: BigUint) -> Self {
        HyperInt::Exact(v)
    }
}

impl fmt::Display for HyperInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperInt::Exact(v) => write!(f, "E:{v}"),
            HyperInt::Tower { height, top } => write!(f, "T:{height}:{top}"),
        }
    }
}

impl FromStr for HyperInt {
    type Err = HyperError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HyperError::Parse(s.to_string());
        let parse_big = |t: &str| -> Result<BigUint, HyperError> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse::<BigUint>().map_err(|_| bad())
        };
        if let Some(rest) = s.strip_prefix("E:") {
            Ok(HyperInt::Exact(parse_big(rest)?))
        } else if let Some(rest) = s.strip_prefix("T:") {
            let (h, x) = rest.split_once(':').ok_or_else(bad)?;
            if h.is_empty() || !h.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let height: u64 = h.parse().map_err(|_| bad())?;
            if height == 0 {
                return Err(bad());
            }
            Ok(HyperInt::tower_of(height, parse_big(x)?))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for HyperInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HyperInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
