//! Arbitrary-precision scalars.
//!
//! [`BigReal`] is a binary floating-point number whose significand carries
//! exactly `bits` bits, rounded to nearest (ties to even) after every
//! operation. [`BigComplex`] pairs two of them at equal precision.
//! [`ExactRational`] and [`ComplexRational`] are the exact counterparts used
//! by oracle computations at rational points.
//!
//! Code that must run in both modes (the walk sums) is written against the
//! [`Scalar`] trait.

mod complex;
mod rational;
mod real;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use complex::BigComplex;
pub use rational::{factorial_squared, parse_complex_rational, ComplexRational, ExactRational};
pub use real::{euler_gamma, BigReal};
pub(crate) use real::parse_real;

/// Lowest precision accepted by [`with_precision`].
pub const MIN_BITS: u32 = 64;

/// Binary precision of a significand.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Precision {
    bits: u32,
}

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_BITS {
            return Err(Error::PrecisionTooLow(bits));
        }
        Ok(Precision { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Twice the precision, used for agreement checks.
    pub fn doubled(self) -> Self {
        Precision {
            bits: self.bits.saturating_mul(2),
        }
    }

    /// A precision `extra` bits wider.
    pub fn widened(self, extra: u32) -> Self {
        Precision {
            bits: self.bits.saturating_add(extra),
        }
    }

    /// Number of significant decimal digits that identifies every value of
    /// this precision uniquely.
    pub fn decimal_digits(self) -> usize {
        (f64::from(self.bits) * std::f64::consts::LOG10_2).ceil() as usize + 2
    }

    /// `2^-bits`, the relative spacing of representable values.
    pub fn epsilon(self) -> BigReal {
        BigReal::one(self).mul_pow2(-i64::from(self.bits))
    }
}

impl TryFrom<u32> for Precision {
    type Error = Error;
    fn try_from(bits: u32) -> Result<Self> {
        Precision::new(bits)
    }
}

impl From<Precision> for u32 {
    fn from(p: Precision) -> u32 {
        p.bits
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.bits)
    }
}

/// Builds a precision context; rejects anything below 64 bits.
pub fn with_precision(bits: u32) -> Result<Precision> {
    Precision::new(bits)
}

/// Field operations shared by exact and floating scalars.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// What is needed to build constants of this type (a precision for
    /// floating types, nothing for exact ones).
    type Ctx: Copy + fmt::Debug + Send + Sync;

    fn context(&self) -> Self::Ctx;
    fn from_int(v: i64, ctx: Self::Ctx) -> Self;
    fn is_zero(&self) -> bool;
    /// Multiplicative inverse, `None` for zero.
    fn recip(&self) -> Option<Self>;
    fn conj(&self) -> Self;
    /// `|self| <= 1`.
    fn in_unit_disc(&self) -> bool;

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_int(0, ctx)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_int(1, ctx)
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.context());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor() {
        assert_eq!(with_precision(256).unwrap().bits(), 256);
        assert_eq!(with_precision(64).unwrap().bits(), 64);
        assert_eq!(with_precision(32), Err(Error::PrecisionTooLow(32)));
        assert!(with_precision(32)
            .unwrap_err()
            .to_string()
            .contains("precision too low"));
    }

    #[test]
    fn decimal_digits_cover_the_significand() {
        let p = with_precision(256).unwrap();
        assert_eq!(p.decimal_digits(), 80);
        assert_eq!(p.doubled().bits(), 512);
    }
}
