use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::rational::parse_complex_rational;
use super::{BigReal, ComplexRational, Precision, Scalar};
use crate::error::Result;

/// Complex number with both parts at the same precision.
#[derive(Clone, PartialEq, Eq)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Self {
        debug_assert_eq!(re.precision(), im.precision());
        BigComplex { re, im }
    }

    pub fn from_real(re: BigReal) -> Self {
        let im = BigReal::zero(re.precision());
        BigComplex { re, im }
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        BigComplex::new(BigReal::from_f64(re, prec), BigReal::from_f64(im, prec))
    }

    pub fn from_rational(c: &ComplexRational, prec: Precision) -> Self {
        BigComplex::new(
            BigReal::from_ratio(c.re.as_ratio(), prec),
            BigReal::from_ratio(c.im.as_ratio(), prec),
        )
    }

    /// Parses `"1+2i"`-style input, rounding each part once.
    pub fn parse(s: &str, prec: Precision) -> Result<Self> {
        parse_complex_rational(s).map(|c| BigComplex::from_rational(&c, prec))
    }

    pub fn precision(&self) -> Precision {
        self.re.precision()
    }

    pub fn with_prec(&self, prec: Precision) -> Self {
        BigComplex::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> BigReal {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> BigReal {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &BigReal) -> Self {
        BigComplex::new(&self.re * k, &self.im * k)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        BigComplex::new(self.re.mul_pow2(k), self.im.mul_pow2(k))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.recip_inner().map(|r| self * &r)
    }

    fn recip_inner(&self) -> Option<Self> {
        if self.im.is_zero() {
            return self.re.recip().map(BigComplex::from_real);
        }
        let inv = self.norm_sqr().recip()?;
        Some(BigComplex::new(&self.re * &inv, -(&self.im * &inv)))
    }

    /// `(re, im)` rounded to the nearest doubles.
    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Argument in `(-pi, pi]`, double precision.
    pub fn arg_f64(&self) -> f64 {
        // scale first so tiny or huge parts do not flush to zero/inf
        let t = self.re.log2_abs().max(self.im.log2_abs());
        if !t.is_finite() {
            return 0.0;
        }
        let s = self.mul_pow2(-(t as i64));
        let (x, y) = s.to_f64();
        y.atan2(x)
    }

    pub fn to_sci_string(&self, digits: usize) -> String {
        let re = self.re.to_sci_string(digits);
        if self.im.is_zero() {
            return re;
        }
        let im = self.im.abs().to_sci_string(digits);
        let sign = if self.im.is_negative() { '-' } else { '+' };
        format!("{re}{sign}{im}i")
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.re, self.im)
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(self.precision().decimal_digits());
        f.write_str(&self.to_sci_string(digits))
    }
}

macro_rules! complex_binop {
    ($tr:ident, $m:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $tr<&BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $m(self, $b: &BigComplex) -> BigComplex {
                let $a = self;
                $body
            }
        }
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                $tr::$m(&self, &rhs)
            }
        }
        impl $tr<&BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: &BigComplex) -> BigComplex {
                $tr::$m(&self, rhs)
            }
        }
        impl $tr<BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                $tr::$m(self, &rhs)
            }
        }
    };
}

complex_binop!(Add, add, |a, b| BigComplex::new(&a.re + &b.re, &a.im + &b.im));
complex_binop!(Sub, sub, |a, b| BigComplex::new(&a.re - &b.re, &a.im - &b.im));
complex_binop!(Mul, mul, |a, b| {
    // keep real inputs exact on the imaginary side
    if a.im.is_zero() {
        BigComplex::new(&a.re * &b.re, &a.re * &b.im)
    } else if b.im.is_zero() {
        BigComplex::new(&a.re * &b.re, &a.im * &b.re)
    } else {
        BigComplex::new(
            &a.re * &b.re - &a.im * &b.im,
            &a.re * &b.im + &a.im * &b.re,
        )
    }
});

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-self.re, -self.im)
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -self.clone()
    }
}

impl Scalar for BigComplex {
    type Ctx = Precision;

    fn context(&self) -> Precision {
        self.precision()
    }
    fn from_int(v: i64, ctx: Precision) -> Self {
        BigComplex::from_real(BigReal::from_i64(v, ctx))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn recip(&self) -> Option<Self> {
        self.recip_inner()
    }
    fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), -&self.im)
    }
    fn in_unit_disc(&self) -> bool {
        self.norm_sqr() <= BigReal::one(self.precision())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    #[test]
    fn field_identities() {
        let pr = p(128);
        let z = BigComplex::parse("1.5-2i", pr).unwrap();
        let w = z.recip().unwrap();
        let one = &z * &w;
        let err = (&one - &BigComplex::one(pr)).abs();
        assert!(err.log2_abs() < -120.0);
        assert_eq!(z.conj().im.to_f64(), 2.0);
        assert_eq!(z.norm_sqr().to_f64(), 6.25);
        assert_eq!(z.abs().to_f64(), 2.5);
    }

    #[test]
    fn parsing_and_printing() {
        let pr = p(64);
        let z = BigComplex::parse("-i", pr).unwrap();
        assert_eq!(z.to_f64(), (0.0, -1.0));
        assert_eq!(z.to_sci_string(5), "0-1e0i");
        let w = BigComplex::parse("2.5+0.5i", pr).unwrap();
        assert_eq!(w.to_sci_string(5), "2.5e0+5e-1i");
        assert!(BigComplex::parse("1+", pr).is_err());
    }

    #[test]
    fn argument_of_tiny_values() {
        let pr = p(64);
        let z = BigComplex::new(
            BigReal::one(pr).mul_pow2(-5000),
            BigReal::one(pr).mul_pow2(-5000),
        );
        assert!((z.arg_f64() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }
}
