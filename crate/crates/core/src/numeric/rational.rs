use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Scalar;
use crate::error::{Error, Result};

/// Reduced fraction with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactRational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(v: BigInt) -> Self {
        ExactRational(BigRational::from_integer(v))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        ExactRational(r)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        ExactRational(self.0.abs())
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_decimal(s).map(ExactRational)
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! rational_binop {
    ($t:ty, $tr:ident, $m:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                $tr::$m(&self, &rhs)
            }
        }
        impl $tr<&$t> for &$t {
            type Output = $t;
            fn $m(self, $b: &$t) -> $t {
                let $a = self;
                $body
            }
        }
    };
}

rational_binop!(ExactRational, Add, add, |a, b| ExactRational(&a.0 + &b.0));
rational_binop!(ExactRational, Sub, sub, |a, b| ExactRational(&a.0 - &b.0));
rational_binop!(ExactRational, Mul, mul, |a, b| ExactRational(&a.0 * &b.0));

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl Scalar for ExactRational {
    type Ctx = ();

    fn context(&self) {}
    fn from_int(v: i64, _: ()) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(v)))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn recip(&self) -> Option<Self> {
        (!self.0.is_zero()).then(|| ExactRational(self.0.recip()))
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn in_unit_disc(&self) -> bool {
        self.0.abs() <= BigRational::one()
    }
}

/// Gaussian rational `re + i*im`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ComplexRational {
    pub re: ExactRational,
    pub im: ExactRational,
}

impl ComplexRational {
    pub fn new(re: ExactRational, im: ExactRational) -> Self {
        ComplexRational { re, im }
    }

    pub fn real(re: ExactRational) -> Self {
        ComplexRational {
            re,
            im: ExactRational::default(),
        }
    }

    pub fn i() -> Self {
        ComplexRational::new(ExactRational::new(0, 1), ExactRational::new(1, 1))
    }

    pub fn norm_sqr(&self) -> ExactRational {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im.0.is_zero()
    }
}

impl fmt::Debug for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.0.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.0.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.0.is_negative() {
            write!(f, "{}-{}i", self.re, self.im.abs())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

rational_binop!(ComplexRational, Add, add, |a, b| ComplexRational::new(
    &a.re + &b.re,
    &a.im + &b.im
));
rational_binop!(ComplexRational, Sub, sub, |a, b| ComplexRational::new(
    &a.re - &b.re,
    &a.im - &b.im
));
rational_binop!(ComplexRational, Mul, mul, |a, b| ComplexRational::new(
    &(&a.re * &b.re) - &(&a.im * &b.im),
    &(&a.re * &b.im) + &(&a.im * &b.re)
));

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-self.re, -self.im)
    }
}

impl Scalar for ComplexRational {
    type Ctx = ();

    fn context(&self) {}
    fn from_int(v: i64, _: ()) -> Self {
        ComplexRational::real(ExactRational::from_int(v, ()))
    }
    fn is_zero(&self) -> bool {
        self.re.0.is_zero() && self.im.0.is_zero()
    }
    fn recip(&self) -> Option<Self> {
        let n = self.norm_sqr().recip()?;
        Some(ComplexRational::new(&self.re * &n, -(&self.im * &n)))
    }
    fn conj(&self) -> Self {
        ComplexRational::new(self.re.clone(), -self.im.clone())
    }
    fn in_unit_disc(&self) -> bool {
        self.norm_sqr().0 <= BigRational::one()
    }
}

/// `((n-1)!)^2` as an exact integer.
pub fn factorial_squared(n: u32) -> ExactRational {
    assert!(n >= 1, "factorial_squared needs n >= 1");
    let f = (1..n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    ExactRational::from_integer(&f * &f)
}

/// Exact value of a decimal literal such as `-12.5e-3`.
pub(crate) fn parse_decimal(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a decimal number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let mut n: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| bad())?
    };
    if neg {
        n = -n;
    }
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Parses `"1"`, `"-0.5"`, `"2i"`, `"i"`, `"1+2i"`, `"1.5e-3-2i"`, `"3/7"`.
pub fn parse_complex_rational(s: &str) -> Result<ComplexRational> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("not a complex number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let imag = |part: &str| -> Result<ExactRational> {
        let body = part.strip_suffix(['i', 'j']).ok_or_else(bad)?;
        match body {
            "" | "+" => Ok(ExactRational::new(1, 1)),
            "-" => Ok(ExactRational::new(-1, 1)),
            b => parse_decimal(b).map(ExactRational),
        }
    };
    if !t.ends_with(['i', 'j']) {
        return Ok(ComplexRational::real(ExactRational(parse_decimal(&t)?)));
    }
    // split at the last sign that is not part of an exponent
    let bytes = t.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => Ok(ComplexRational::new(
            ExactRational(parse_decimal(&t[..i])?),
            imag(&t[i..])?,
        )),
        None => Ok(ComplexRational::new(ExactRational::new(0, 1), imag(&t)?)),
    }
}
