//! Finite trigonometric potentials `v(x) = sum_m V(m) e^{imx}`.
//!
//! Only even frequencies are admitted and `V(0)` is always zero. The Mathieu
//! potential `2a cos 2x` is the table `{-2: a, +2: a}`.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::numeric::{parse_complex_rational, BigComplex, ComplexRational, Precision, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPotential<S: Scalar> {
    coeffs: BTreeMap<i64, S>,
    ctx: S::Ctx,
}

impl<S: Scalar> TrigPotential<S> {
    /// Builds a potential from `(m, V(m))` pairs. Zero amplitudes are
    /// dropped; odd or zero frequencies carrying a nonzero amplitude are
    /// rejected.
    pub fn from_coeffs<I>(entries: I, ctx: S::Ctx) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, S)>,
    {
        let mut coeffs = BTreeMap::new();
        for (m, v) in entries {
            if v.is_zero() {
                continue;
            }
            if m == 0 {
                return Err(Error::InvalidPotential("V(0) must vanish".into()));
            }
            if m % 2 != 0 {
                return Err(Error::InvalidPotential(format!(
                    "frequency {m} is odd; only even frequencies are allowed"
                )));
            }
            if coeffs.insert(m, v).is_some() {
                return Err(Error::InvalidPotential(format!("frequency {m} given twice")));
            }
        }
        Ok(TrigPotential { coeffs, ctx })
    }

    /// `2a cos 2x`.
    pub fn mathieu(a: S) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroAmplitude);
        }
        let ctx = a.context();
        Self::from_coeffs([(-2, a.clone()), (2, a)], ctx)
    }

    pub fn context(&self) -> S::Ctx {
        self.ctx
    }

    /// `V(m)`, zero off the support.
    pub fn coefficient(&self, m: i64) -> S {
        self.coeffs
            .get(&m)
            .cloned()
            .unwrap_or_else(|| S::zero(self.ctx))
    }

    /// Frequencies with nonzero amplitude, ascending.
    pub fn support(&self) -> impl Iterator<Item = (i64, &S)> + '_ {
        self.coeffs.iter().map(|(m, v)| (*m, v))
    }

    pub fn max_frequency(&self) -> i64 {
        self.coeffs.keys().map(|m| m.abs()).max().unwrap_or(0)
    }

    /// `V(-m) = V(m)` for all `m`.
    pub fn is_even_potential(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(m, v)| self.coefficient(-m) == *v)
    }

    /// `V(-m) = conj(V(m))` for all `m`, i.e. `v` is real valued.
    pub fn is_hermitian(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(m, v)| self.coefficient(-m) == v.conj())
    }

    /// Applies `f` to every amplitude.
    pub fn map<T: Scalar>(&self, ctx: T::Ctx, f: impl Fn(&S) -> T) -> Result<TrigPotential<T>> {
        TrigPotential::from_coeffs(self.coeffs.iter().map(|(m, v)| (*m, f(v))), ctx)
    }
}

impl TrigPotential<ComplexRational> {
    /// Parses `{"2": "1", "-2": "1", "4": "0.5+i"}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("potential json: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("potential json must be an object".into()))?;
        let mut entries = Vec::with_capacity(obj.len());
        for (k, v) in obj {
            let m: i64 = k
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("frequency {k:?} is not an integer")))?;
            let amp = match v {
                Value::String(s) => parse_complex_rational(s)?,
                Value::Number(x) => parse_complex_rational(&x.to_string())?,
                _ => return Err(Error::Parse(format!("amplitude for {k} must be a string"))),
            };
            entries.push((m, amp));
        }
        Self::from_coeffs(entries, ())
    }

    /// Rounds every amplitude to `prec`.
    pub fn to_big(&self, prec: Precision) -> TrigPotential<BigComplex> {
        self.map(prec, |c| BigComplex::from_rational(c, prec))
            .expect("rounding keeps the support valid")
    }
}
