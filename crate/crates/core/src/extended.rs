//! Reals extended with `+∞`, the codomain of every rate and exponent.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

pub use ExtendedReal::{Finite, Infinite};

impl ExtendedReal {
    pub const ZERO: ExtendedReal = Finite(0.0);

    /// `f64::INFINITY` maps to the infinite marker; NaN is a bug upstream.
    pub fn from_f64(v: f64) -> Self {
        debug_assert!(!v.is_nan(), "NaN reached ExtendedReal");
        if v == f64::INFINITY {
            Infinite
        } else {
            Finite(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Finite(v) => v,
            Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(v) => Some(v),
            Infinite => None,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `|a - b|` with `∞ - ∞ = 0`; used for oracle gaps.
    pub fn gap(self, other: Self) -> f64 {
        match (self, other) {
            (Finite(a), Finite(b)) => (a - b).abs(),
            (Infinite, Infinite) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), Infinite) => Some(Ordering::Less),
            (Infinite, Finite(_)) => Some(Ordering::Greater),
            (Infinite, Infinite) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        ExtendedReal::from_f64(v)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(v) => write!(f, "{v}"),
            Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity; the string "inf" mirrors the CSV literal.
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Finite(v) => s.serialize_f64(*v),
            Infinite => s.serialize_str("inf"),
        }
    }
}
