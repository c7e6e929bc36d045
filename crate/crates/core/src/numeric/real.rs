use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Precision, Scalar};
use crate::error::{Error, Result};

/// Binary floating-point value `(-1)^neg * mag * 2^exp`.
///
/// Nonzero values keep `mag` at exactly `prec.bits()` bits. Zero is stored
/// as `mag == 0, exp == 0, neg == false`.
#[derive(Clone)]
pub struct BigReal {
    neg: bool,
    mag: BigUint,
    exp: i64,
    prec: Precision,
}

impl BigReal {
    pub fn zero(prec: Precision) -> Self {
        BigReal {
            neg: false,
            mag: BigUint::zero(),
            exp: 0,
            prec,
        }
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: Precision) -> Self {
        Self::round(v < 0, BigUint::from(v.unsigned_abs()), 0, prec)
    }

    pub fn from_bigint(v: &BigInt, prec: Precision) -> Self {
        Self::round(v.is_negative(), v.magnitude().clone(), 0, prec)
    }

    /// Exact conversion of a finite `f64`, then rounding to `prec`.
    pub fn from_f64(v: f64, prec: Precision) -> Self {
        assert!(v.is_finite(), "cannot convert non-finite f64");
        if v == 0.0 {
            return Self::zero(prec);
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Self::round(neg, BigUint::from(mant), exp, prec)
    }

    /// Correctly rounded value of a rational number.
    pub fn from_ratio(r: &BigRational, prec: Precision) -> Self {
        if r.is_zero() {
            return Self::zero(prec);
        }
        let neg = r.is_negative();
        let num = r.numer().magnitude();
        let den = r.denom().magnitude();
        Self::quotient(neg, num, 0, den, 0, prec)
    }

    /// Exact rational value.
    pub fn to_ratio(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let m = BigInt::from_biguint(if self.neg { Sign::Minus } else { Sign::Plus }, self.mag.clone());
        if self.exp >= 0 {
            BigRational::from_integer(m << self.exp as usize)
        } else {
            BigRational::new(m, BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    /// `-1`, `0` or `1`.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    /// Smallest `t` with `|self| < 2^t` (undefined for zero; returns `i64::MIN`).
    pub fn top(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mag.bits() as i64
        }
    }

    /// Same value rounded to another precision.
    pub fn with_prec(&self, prec: Precision) -> Self {
        Self::round(self.neg, self.mag.clone(), self.exp, prec)
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        r.neg = false;
        r
    }

    /// `self * 2^k`, exact.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut r = self.clone();
        r.exp += k;
        r
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(Self::one(self.prec).checked_div(self).expect("nonzero divisor"))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        let prec = self.prec.max(rhs.prec);
        if self.is_zero() {
            return Some(Self::zero(prec));
        }
        Some(Self::quotient(
            self.neg ^ rhs.neg,
            &self.mag,
            self.exp,
            &rhs.mag,
            rhs.exp,
            prec,
        ))
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.neg || self.is_zero(), "sqrt of negative value");
        if self.is_zero() {
            return self.clone();
        }
        let p = u64::from(self.prec.bits());
        let len = self.mag.bits();
        let mut shift = (2 * p + 2).saturating_sub(len) as i64;
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = &self.mag << shift as usize;
        let r = m.sqrt();
        let e = (self.exp - shift) / 2;
        if &r * &r == m {
            Self::round(false, r, e, self.prec)
        } else {
            Self::round(false, (r << 1usize) | BigUint::one(), e - 1, self.prec)
        }
    }

    pub fn powi(&self, e: i64) -> Self {
        let base = if e < 0 {
            self.recip().expect("negative power of zero")
        } else {
            self.clone()
        };
        Scalar::pow(&base, e.unsigned_abs() as u32)
    }

    /// Nearest `f64` (may underflow to zero or overflow to infinity).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.with_prec(Precision { bits: 64 });
        let top = r.mag.bits() as i64;
        let hi = (&r.mag >> (top - 53).max(0) as usize).to_u64().unwrap_or(0) as f64;
        let e = r.exp + (top - 53).max(0);
        let v = scale_f64(hi, e);
        if r.neg {
            -v
        } else {
            v
        }
    }

    /// `log2 |self|` in double precision, valid far outside the `f64` range.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let top = self.mag.bits() as i64;
        let lead = (&self.mag >> (top - 53).max(0) as usize).to_u64().unwrap_or(1) as f64;
        lead.log2() + (self.exp + (top - 53).max(0)) as f64
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> Self {
        assert!(!self.neg && !self.is_zero(), "ln of non-positive value");
        let wp = self.prec.widened(32);
        let x = self.with_prec(wp);
        // x = m * 2^k with m in [1/sqrt2, sqrt2)
        let mut k = x.top();
        let mut m = x.mul_pow2(-k);
        let inv_sqrt2 = BigReal::from_f64(std::f64::consts::FRAC_1_SQRT_2, wp);
        if m < inv_sqrt2 {
            m = m.mul_pow2(1);
            k -= 1;
        }
        let one = BigReal::one(wp);
        let t = (&m - &one).checked_div(&(&m + &one)).expect("m > 0");
        let ln_m = atanh_series(&t).mul_pow2(1);
        let ln2 = ln2(wp);
        (ln_m + ln2 * BigReal::from_i64(k, wp)).with_prec(self.prec)
    }

    pub fn exp(&self) -> Self {
        let wp = self.prec.widened(48);
        let x = self.with_prec(wp);
        let ln2 = ln2(wp);
        let k = x
            .checked_div(&ln2)
            .expect("ln2 > 0")
            .to_f64()
            .round();
        assert!(k.abs() < 1e15, "exp argument out of range");
        let k = k as i64;
        let r = &x - &(&ln2 * &BigReal::from_i64(k, wp));
        let squarings = 16;
        let r = r.mul_pow2(-squarings);
        let one = BigReal::one(wp);
        let mut term = one.clone();
        let mut sum = one.clone();
        let cutoff = -(i64::from(wp.bits()) + 8);
        for i in 1..10_000i64 {
            term = (&term * &r).checked_div(&BigReal::from_i64(i, wp)).expect("i > 0");
            sum = &sum + &term;
            if term.is_zero() || term.top() < cutoff {
                break;
            }
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum.mul_pow2(k).with_prec(self.prec)
    }

    /// Scientific notation with at most `digits` significant digits,
    /// correctly rounded (ties to even). Trailing zeros are dropped.
    pub fn to_sci_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let r = self.to_ratio().abs();
        let mut e10 = ((self.top() - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let ten = BigInt::from(10);
        let lo = num_traits::pow(ten.clone(), digits - 1);
        let hi = &lo * &ten;
        let scaled = loop {
            let s = digits as i64 - 1 - e10;
            let v = if s >= 0 {
                &r * BigRational::from_integer(num_traits::pow(ten.clone(), s as usize))
            } else {
                &r / BigRational::from_integer(num_traits::pow(ten.clone(), (-s) as usize))
            };
            let q = round_half_even(&v);
            if q >= hi {
                e10 += 1;
            } else if q < lo {
                e10 -= 1;
            } else {
                break q;
            }
        };
        let mut ds = scaled.to_string();
        while ds.len() > 1 && ds.ends_with('0') {
            ds.pop();
        }
        let sign = if self.neg { "-" } else { "" };
        if ds.len() == 1 {
            format!("{sign}{ds}e{e10}")
        } else {
            format!("{sign}{}.{}e{e10}", &ds[..1], &ds[1..])
        }
    }

    /// Decimal string with enough digits to round-trip at this precision.
    pub fn to_exact_string(&self) -> String {
        self.to_sci_string(self.prec.decimal_digits())
    }

    /// Parses a decimal literal (`-1.25e-3`, `7`, `.5`) and rounds it.
    pub fn parse(s: &str, prec: Precision) -> Result<Self> {
        let r = super::rational::parse_decimal(s)?;
        Ok(Self::from_ratio(&r, prec))
    }

    fn round(neg: bool, mag: BigUint, exp: i64, prec: Precision) -> Self {
        let p = u64::from(prec.bits());
        let len = mag.bits();
        if len == 0 {
            return Self::zero(prec);
        }
        if len <= p {
            let s = (p - len) as usize;
            return BigReal {
                neg,
                mag: mag << s,
                exp: exp - s as i64,
                prec,
            };
        }
        let shift = len - p;
        let mut q = &mag >> shift as usize;
        let half = mag.bit(shift - 1);
        let sticky = mag.trailing_zeros().unwrap_or(0) < shift - 1;
        let mut e = exp + shift as i64;
        if half && (sticky || q.bit(0)) {
            q += 1u32;
            if q.bits() > p {
                q >>= 1usize;
                e += 1;
            }
        }
        BigReal {
            neg,
            mag: q,
            exp: e,
            prec,
        }
    }

    /// Correctly rounded `(num * 2^ne) / (den * 2^de)`.
    fn quotient(neg: bool, num: &BigUint, ne: i64, den: &BigUint, de: i64, prec: Precision) -> Self {
        let p = u64::from(prec.bits());
        let s = (p + 2 + den.bits()).saturating_sub(num.bits());
        let (q, rem) = (num << s as usize).div_rem(den);
        let e = ne - s as i64 - de;
        if rem.is_zero() {
            Self::round(neg, q, e, prec)
        } else {
            Self::round(neg, (q << 1usize) | BigUint::one(), e - 1, prec)
        }
    }

    fn add_signed(&self, rhs: &Self, rhs_neg: bool) -> Self {
        let prec = self.prec.max(rhs.prec);
        if rhs.is_zero() {
            return self.with_prec(prec);
        }
        if self.is_zero() {
            return Self::round(rhs_neg, rhs.mag.clone(), rhs.exp, prec);
        }
        let (big, big_neg, small, small_neg) = if self.top() >= rhs.top() {
            (self, self.neg, rhs, rhs_neg)
        } else {
            (rhs, rhs_neg, self, self.neg)
        };
        let p = i64::from(prec.bits());
        let cutoff = (big.top() - p - 3).min(big.exp);
        let (bm, sm, e) = if small.top() <= big.top() - 2 && small.exp < cutoff {
            // the small operand only matters through its leading bits and a sticky bit
            let sh = (cutoff - small.exp) as usize;
            let t = &small.mag >> sh;
            let sticky = small.mag.trailing_zeros().unwrap_or(0) < sh as u64;
            let bm = &big.mag << ((big.exp - cutoff) as usize + 1);
            let mut sm = t << 1usize;
            if sticky {
                sm |= BigUint::one();
            }
            (bm, sm, cutoff - 1)
        } else {
            let e = big.exp.min(small.exp);
            (
                &big.mag << (big.exp - e) as usize,
                &small.mag << (small.exp - e) as usize,
                e,
            )
        };
        if big_neg == small_neg {
            Self::round(big_neg, bm + sm, e, prec)
        } else {
            match bm.cmp(&sm) {
                Ordering::Greater => Self::round(big_neg, bm - sm, e, prec),
                Ordering::Less => Self::round(small_neg, sm - bm, e, prec),
                Ordering::Equal => Self::zero(prec),
            }
        }
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        let prec = self.prec.max(rhs.prec);
        if self.is_zero() || rhs.is_zero() {
            return Self::zero(prec);
        }
        Self::round(self.neg ^ rhs.neg, &self.mag * &rhs.mag, self.exp + rhs.exp, prec)
    }

    fn cmp_abs(&self, rhs: &Self) -> Ordering {
        match (self.is_zero(), rhs.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.top().cmp(&rhs.top()) {
            Ordering::Equal => {}
            o => return o,
        }
        let e = self.exp.min(rhs.exp);
        let a = &self.mag << (self.exp - e) as usize;
        let b = &rhs.mag << (rhs.exp - e) as usize;
        a.cmp(&b)
    }

    /// `max(|self|, |other|)`.
    pub fn max_abs(&self, other: &Self) -> Self {
        if self.cmp_abs(other) == Ordering::Less {
            other.abs()
        } else {
            self.abs()
        }
    }
}

fn scale_f64(v: f64, e: i64) -> f64 {
    let mut v = v;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

fn round_half_even(v: &BigRational) -> BigInt {
    let fl = v.floor();
    let frac = v - &fl;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let base = fl.to_integer();
    match frac.cmp(&half) {
        Ordering::Less => base,
        Ordering::Greater => base + 1,
        Ordering::Equal => {
            if base.is_even() {
                base
            } else {
                base + 1
            }
        }
    }
}

/// `sum t^(2i+1)/(2i+1)`, for `|t| <= 1/3`.
fn atanh_series(t: &BigReal) -> BigReal {
    let prec = t.prec;
    let t2 = t * t;
    let mut pow = t.clone();
    let mut sum = t.clone();
    let cutoff = -(i64::from(prec.bits()) + 8);
    for i in 1..100_000i64 {
        pow = &pow * &t2;
        if pow.is_zero() || pow.top() < cutoff {
            break;
        }
        let term = pow.checked_div(&BigReal::from_i64(2 * i + 1, prec)).expect("odd > 0");
        sum = &sum + &term;
    }
    sum
}

fn ln2(prec: Precision) -> BigReal {
    let third = BigReal::one(prec)
        .checked_div(&BigReal::from_i64(3, prec))
        .expect("3 != 0");
    atanh_series(&third).mul_pow2(1)
}

/// Euler's constant to the requested precision (Brent-McMillan).
pub fn euler_gamma(prec: Precision) -> BigReal {
    let wp = prec.widened(64);
    // error of the truncated Bessel-function formula is about pi * e^(-4N)
    let n = (f64::from(wp.bits()) * std::f64::consts::LN_2 / 4.0).ceil() as i64 + 2;
    let n2 = BigReal::from_i64(n * n, wp);
    let mut a = -BigReal::from_i64(n, wp).ln();
    let mut b = BigReal::one(wp);
    let mut u = a.clone();
    let mut v = b.clone();
    let cutoff = -(i64::from(wp.bits()) + 8);
    let mut k = 1i64;
    loop {
        let kr = BigReal::from_i64(k, wp);
        let k2 = BigReal::from_i64(k * k, wp);
        b = (&b * &n2).checked_div(&k2).expect("k > 0");
        a = (&(&a * &n2).checked_div(&kr).expect("k > 0") + &b)
            .checked_div(&kr)
            .expect("k > 0");
        u = &u + &a;
        v = &v + &b;
        if k > n && (a.is_zero() || a.top() - u.top() < cutoff) && b.top() - v.top() < cutoff {
            break;
        }
        k += 1;
    }
    u.checked_div(&v).expect("v > 0").with_prec(prec)
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigReal {}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.signum(), other.signum()) {
            (a, b) if a != b => a.cmp(&b),
            (0, 0) => Ordering::Equal,
            (1, _) => self.cmp_abs(other),
            _ => other.cmp_abs(self),
        }
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.to_sci_string(20), self.prec.bits())
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(self.prec.decimal_digits());
        f.write_str(&self.to_sci_string(digits))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $tr<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, $b: &BigReal) -> BigReal {
                let $a = self;
                $body
            }
        }
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                $tr::$m(&self, &rhs)
            }
        }
        impl $tr<&BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                $tr::$m(&self, rhs)
            }
        }
        impl $tr<BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                $tr::$m(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_signed(b, b.neg));
forward_binop!(Sub, sub, |a, b| a.add_signed(b, !b.neg && !b.is_zero()));
forward_binop!(Mul, mul, |a, b| a.mul_ref(b));
forward_binop!(Div, div, |a, b| a.checked_div(b).expect("division by zero"));

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(mut self) -> BigReal {
        if !self.is_zero() {
            self.neg = !self.neg;
        }
        self
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -self.clone()
    }
}

impl Scalar for BigReal {
    type Ctx = Precision;

    fn context(&self) -> Precision {
        self.prec
    }
    fn from_int(v: i64, ctx: Precision) -> Self {
        BigReal::from_i64(v, ctx)
    }
    fn is_zero(&self) -> bool {
        BigReal::is_zero(self)
    }
    fn recip(&self) -> Option<Self> {
        BigReal::recip(self)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn in_unit_disc(&self) -> bool {
        self.cmp_abs(&BigReal::one(self.prec)) != Ordering::Greater
    }
}

/// Parses a precision-tagged decimal string, failing on malformed input.
pub(crate) fn parse_real(s: &str, prec: Precision) -> Result<BigReal> {
    BigReal::parse(s, prec).map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}
