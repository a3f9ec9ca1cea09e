//! Fixed-precision time units.
//!
//! All processing times, station lengths and the cycle time are multiples of
//! 0.1 TU. [`Tu`] stores the value in tenths as an `i64`, so every overload
//! computation is exact integer arithmetic.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// A duration in time units, stored in tenths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tu(i64);

impl Tu {
    pub const ZERO: Tu = Tu(0);

    #[inline]
    pub const fn from_tenths(tenths: i64) -> Self {
        Tu(tenths)
    }

    #[inline]
    pub const fn tenths(self) -> i64 {
        self.0
    }

    /// Rounds to the nearest tenth.
    pub fn from_f64(value: f64) -> Self {
        Tu((value * 10.0).round() as i64)
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }

    #[inline]
    pub fn max(self, other: Tu) -> Tu {
        Tu(self.0.max(other.0))
    }

    #[inline]
    pub fn min(self, other: Tu) -> Tu {
        Tu(self.0.min(other.0))
    }

    /// `max(0, self)`.
    #[inline]
    pub fn pos(self) -> Tu {
        Tu(self.0.max(0))
    }
}

impl Add for Tu {
    type Output = Tu;
    #[inline]
    fn add(self, rhs: Tu) -> Tu {
        Tu(self.0 + rhs.0)
    }
}

impl Sub for Tu {
    type Output = Tu;
    #[inline]
    fn sub(self, rhs: Tu) -> Tu {
        Tu(self.0 - rhs.0)
    }
}

impl Neg for Tu {
    type Output = Tu;
    fn neg(self) -> Tu {
        Tu(-self.0)
    }
}

impl AddAssign for Tu {
    #[inline]
    fn add_assign(&mut self, rhs: Tu) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Tu {
    #[inline]
    fn sub_assign(&mut self, rhs: Tu) {
        self.0 -= rhs.0;
    }
}

impl Sum for Tu {
    fn sum<I: Iterator<Item = Tu>>(iter: I) -> Tu {
        Tu(iter.map(|t| t.0).sum())
    }
}

impl fmt::Display for Tu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{}", sign, abs / 10, abs % 10)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTuError(pub String);

impl fmt::Display for ParseTuError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid time value {:?} (expected at most one decimal digit)",
            self.0
        )
    }
}

impl std::error::Error for ParseTuError {}

impl FromStr for Tu {
    type Err = ParseTuError;

    /// Accepts `12`, `12.3` and `-0.5`. More than one decimal digit is rejected
    /// rather than rounded.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseTuError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if frac_part.len() > 1 || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let whole: i64 = int_part.parse().map_err(|_| err())?;
        let tenth: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| err())?
        };
        let v = whole * 10 + tenth;
        Ok(Tu(if neg { -v } else { v }))
    }
}
