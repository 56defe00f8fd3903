//! Exact rationals and the extended line ℝ ∪ {−∞, +∞} used for arc endpoints.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational number.
pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational `{0}`")]
pub struct RationalParseError(pub String);

/// Shorthand for the integer `n` as a rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for `n / d`. Panics when `d == 0`.
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_q(text: &str) -> Result<Q, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num = num.strip_prefix('+').unwrap_or(num);
    if num.is_empty() || den.is_empty() || den.starts_with(['+', '-']) {
        return Err(err());
    }
    let n = BigInt::from_str(num).map_err(|_| err())?;
    let d = BigInt::from_str(den).map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Q::new(n, d))
}

pub fn fmt_q(value: &Q) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Lossy conversion for the floating-point layers.
pub fn to_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact conversion of a finite float.
pub fn from_f64(value: f64) -> Option<Q> {
    Q::from_float(value)
}

pub fn half() -> Q {
    qf(1, 2)
}

pub fn floor_i64(value: &Q) -> i64 {
    value.floor().to_integer().to_i64().expect("fiber index out of range")
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `2^k` as a rational.
pub fn pow2(k: u32) -> Q {
    Q::from_integer(BigInt::one() << k)
}

/// A point of the extended line. The derived order puts `NegInf` first and `PosInf` last.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtRat {
    NegInf,
    Finite(Q),
    PosInf,
}

impl ExtRat {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtRat::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRat::Finite(_))
    }

    pub fn neg(&self) -> ExtRat {
        match self {
            ExtRat::NegInf => ExtRat::PosInf,
            ExtRat::PosInf => ExtRat::NegInf,
            ExtRat::Finite(v) => ExtRat::Finite(-v),
        }
    }

    /// `self < x` for a finite `x`.
    pub fn lt_q(&self, x: &Q) -> bool {
        match self {
            ExtRat::NegInf => true,
            ExtRat::Finite(v) => v < x,
            ExtRat::PosInf => false,
        }
    }

    /// `x < self` for a finite `x`.
    pub fn gt_q(&self, x: &Q) -> bool {
        match self {
            ExtRat::NegInf => false,
            ExtRat::Finite(v) => x < v,
            ExtRat::PosInf => true,
        }
    }
}

impl From<Q> for ExtRat {
    fn from(value: Q) -> Self {
        ExtRat::Finite(value)
    }
}

impl From<i64> for ExtRat {
    fn from(value: i64) -> Self {
        ExtRat::Finite(q(value))
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::NegInf => f.write_str("-inf"),
            ExtRat::PosInf => f.write_str("+inf"),
            ExtRat::Finite(v) => f.write_str(&fmt_q(v)),
        }
    }
}

impl FromStr for ExtRat {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-inf" => Ok(ExtRat::NegInf),
            "+inf" | "inf" => Ok(ExtRat::PosInf),
            other => parse_q(other).map(ExtRat::Finite),
        }
    }
}

impl Serialize for ExtRat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing a rational as `"p/q"`.
pub mod q_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Q, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&fmt_q(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Q, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_q(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `(Q, Q)` pairs.
pub mod q_pair {
    use super::*;

    pub fn serialize<S: Serializer>(value: &(Q, Q), serializer: S) -> Result<S::Ok, S::Error> {
        (fmt_q(&value.0), fmt_q(&value.1)).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<(Q, Q), D::Error> {
        let (a, b) = <(String, String)>::deserialize(deserializer)?;
        Ok((
            parse_q(&a).map_err(serde::de::Error::custom)?,
            parse_q(&b).map_err(serde::de::Error::custom)?,
        ))
    }
}

/// Serde adapter for `Vec<(Q, Q)>`.
pub mod q_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(value: &[(Q, Q)], serializer: S) -> Result<S::Ok, S::Error> {
        let text: Vec<(String, String)> = value.iter().map(|(a, b)| (fmt_q(a), fmt_q(b))).collect();
        text.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<(Q, Q)>, D::Error> {
        let raw = Vec::<(String, String)>::deserialize(deserializer)?;
        raw.into_iter()
            .map(|(a, b)| {
                Ok((
                    parse_q(&a).map_err(serde::de::Error::custom)?,
                    parse_q(&b).map_err(serde::de::Error::custom)?,
                ))
            })
            .collect()
    }
}
