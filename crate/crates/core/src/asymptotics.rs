//! Closed-form large-`n` predictions and an empirical remainder-order fit.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    euler_gamma, factorial_squared, BigComplex, BigReal, ExactRational, Precision, Scalar,
};
use crate::walks::{self, WalkKind};

/// A predicted value together with the power of `1/n` its error is
/// claimed to decay with.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub name: &'static str,
    pub value: BigComplex,
    pub claimed_remainder_order: u32,
}

fn real(v: i64, prec: Precision) -> BigComplex {
    BigComplex::from_int(v, prec)
}

fn inv_pow(n: u32, k: i64, prec: Precision) -> BigComplex {
    BigComplex::from_real(BigReal::from_i64(i64::from(n), prec).powi(-k))
}

/// `8 (a/4)^n / ((n-1)!)²`.
pub fn gap_leading_value(n: u32, a: &BigComplex) -> BigComplex {
    let prec = a.precision();
    let f = BigReal::from_ratio(factorial_squared(n).as_ratio(), prec);
    let quarter = a.mul_pow2(-2).pow(n);
    quarter
        .scale(&f.recip().expect("factorial is positive"))
        .mul_pow2(3)
}

/// `1 - a²/4n³`.
pub fn gap_correction(n: u32, a: &BigComplex) -> BigComplex {
    let prec = a.precision();
    let a2 = a * a;
    real(1, prec) - (a2 * inv_pow(n, 3, prec)).mul_pow2(-2)
}

pub fn predict_gap_leading(n: u32, a: &BigComplex) -> Prediction {
    assert!(n >= 1, "n must be positive");
    Prediction {
        name: "gap_leading",
        value: gap_leading_value(n, a),
        claimed_remainder_order: 2,
    }
}

/// Leading gap times `1 - a²/4n³`; the claimed order is relative.
pub fn predict_gap_refined(n: u32, a: &BigComplex) -> Prediction {
    assert!(n >= 1, "n must be positive");
    Prediction {
        name: "gap_refined",
        value: gap_leading_value(n, a) * gap_correction(n, a),
        claimed_remainder_order: 4,
    }
}

/// `a²/2n² + a²/2n⁴`.
pub fn predict_deviation(n: u32, a: &BigComplex) -> Prediction {
    let prec = a.precision();
    let a2 = a * a;
    Prediction {
        name: "deviation",
        value: (&a2 * &(inv_pow(n, 2, prec) + inv_pow(n, 4, prec))).mul_pow2(-1),
        claimed_remainder_order: 6,
    }
}

/// `a²/2n²` alone.
pub fn predict_deviation_leading(n: u32, a: &BigComplex) -> Prediction {
    let prec = a.precision();
    Prediction {
        name: "deviation_leading",
        value: (a * a * inv_pow(n, 2, prec)).mul_pow2(-1),
        claimed_remainder_order: 4,
    }
}

/// `a²/8n² + a² log n/4n³ + a²(γ - 1)/4n³`.
pub fn predict_phi(n: u32, a: &BigComplex) -> Prediction {
    let prec = a.precision();
    let a2 = a * a;
    let log_n = BigReal::from_i64(i64::from(n), prec).ln();
    let g = euler_gamma(prec);
    let cubic = BigComplex::from_real((log_n + g - BigReal::one(prec)).mul_pow2(-2));
    Prediction {
        name: "phi",
        value: a2 * (inv_pow(n, 2, prec).mul_pow2(-3) + cubic * inv_pow(n, 3, prec)),
        claimed_remainder_order: 4,
    }
}

/// `beta(z_n^±) / sigma_0(n, 0) ≈ 1 + a²/8n² - a²/4n³`.
pub fn predict_beta_ratio(n: u32, a: &BigComplex) -> Prediction {
    let prec = a.precision();
    let a2 = a * a;
    let corr = inv_pow(n, 2, prec).mul_pow2(-3) - inv_pow(n, 3, prec).mul_pow2(-2);
    Prediction {
        name: "beta_ratio",
        value: real(1, prec) + a2 * corr,
        claimed_remainder_order: 4,
    }
}

/// `sigma_0(n, z_n^±) / sigma_0(n, 0) ≈ 1 - a²(log n + γ)/4n³`.
pub fn predict_sigma0_ratio(n: u32, a: &BigComplex) -> Prediction {
    let prec = a.precision();
    let log_n = BigReal::from_i64(i64::from(n), prec).ln();
    let c = BigComplex::from_real((log_n + euler_gamma(prec)).mul_pow2(-2));
    Prediction {
        name: "sigma0_ratio",
        value: real(1, prec) - a * a * c * inv_pow(n, 3, prec),
        claimed_remainder_order: 4,
    }
}

/// `(alpha(z⁺) - alpha(z⁻)) / gamma_n ≈ -a²/8n²`.
pub fn predict_alpha_difference(n: u32, a: &BigComplex) -> Prediction {
    let prec = a.precision();
    Prediction {
        name: "alpha_difference",
        value: -(a * a * inv_pow(n, 2, prec)).mul_pow2(-3),
        claimed_remainder_order: 4,
    }
}

/// The exact harmonic number and its four-term expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct Harmonic {
    pub exact: ExactRational,
    pub asymptotic: BigReal,
}

pub fn harmonic_exact(n: u32) -> ExactRational {
    let mut s = BigRational::from_integer(0.into());
    for k in 1..=n {
        s += BigRational::new(1.into(), k.into());
    }
    ExactRational::from_ratio(s)
}

/// `log n + γ + 1/2n - 1/12n²`.
pub fn harmonic_asymptotic(n: u32, prec: Precision) -> BigReal {
    let nr = BigReal::from_i64(i64::from(n), prec);
    let inv = nr.recip().expect("n > 0");
    let inv2 = &inv * &inv;
    let twelfth = inv2
        .checked_div(&BigReal::from_i64(12, prec))
        .expect("nonzero");
    nr.ln() + euler_gamma(prec) + inv.mul_pow2(-1) - twelfth
}

pub fn harmonic(n: u32, prec: Precision) -> Harmonic {
    assert!(n >= 1, "n must be positive");
    Harmonic {
        exact: harmonic_exact(n),
        asymptotic: harmonic_asymptotic(n, prec),
    }
}

/// The four partial-fraction sums whose total is `16 n² Phi(n,0) / a²`.
pub fn d_terms(n: u32) -> [ExactRational; 4] {
    let n = i64::from(n);
    let mut d = [0i64; 4].map(|_| BigRational::from_integer(0.into()));
    let r = |num: i64, den: i64| BigRational::new(num.into(), den.into());
    for k in 2..n {
        d[0] += r(1, k * (k - 1));
        d[1] += r(1, (n - k) * (n + 1 - k));
        d[2] += r(1, k * (n + 1 - k));
        d[3] += r(1, (k - 1) * (n - k));
    }
    d.map(ExactRational::from_ratio)
}

/// `Phi(n,0) = sigma_1(n,0)/sigma_0(n,0)` in exact arithmetic.
pub fn phi_at_zero_exact(n: u32, a: &ExactRational) -> Result<ExactRational> {
    let z = ExactRational::new(0, 1);
    let s = walks::crossing_sums(n, WalkKind::CrossingUp, &z, a, 1)?;
    let inv = s[0]
        .recip()
        .ok_or_else(|| Error::Config("sigma_0 vanished".into()))?;
    Ok(s[1].clone() * inv)
}

/// Outcome of a log-log least-squares fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    /// `n` values dropped because the remainder was zero or not finite.
    pub dropped: Vec<u32>,
}

/// Least-squares slope of `log |R|` against `log n`.
pub fn fit_remainder_order(points: &[(u32, f64)]) -> Result<SlopeFit> {
    let mut dropped = Vec::new();
    let mut xy = Vec::with_capacity(points.len());
    for &(n, r) in points {
        let m = r.abs();
        if n == 0 || m == 0.0 || !m.is_finite() {
            dropped.push(n);
        } else {
            xy.push((f64::from(n).ln(), m.ln()));
        }
    }
    if xy.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable points, need at least 4",
            xy.len()
        )));
    }
    let len = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / len;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share one n".into()));
    }
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        points_used: xy.len(),
        dropped,
    })
}
