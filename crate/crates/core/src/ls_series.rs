//! The reduced series `alpha_n(z)`, `beta_n(z)` and the deviations `z_n^±`.
//!
//! `alpha_n = sum_k A_{2k-1}` comes from loops at `n`, `beta_n = sum_p sigma_p`
//! from crossings `-n -> n`. Both are truncated with explicit tail bounds.
//! The deviations are the fixed points of `z = alpha_n(z) ± beta_n(z)`.
//!
//! Tail bounds for `alpha` take the smaller of two geometric majorants:
//! the logarithmic one `|a|^{2k} (4 log 6n / n)^{2k-1}`, and a transfer
//! operator bound `|a|² W (|a| rho)^{2k-2}` where `rho` is a row-sum bound
//! on the symmetrised walk operator. The first needs `n` in the hundreds
//! for moderate `a`; the second already works for `n` of order `|a|`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{BigComplex, BigReal, Precision, Scalar};
use crate::walks::{self, WalkKind};

/// A truncated series value with a bound on the omitted tail.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: BigComplex,
    pub tail_bound: BigReal,
    pub terms_used: u32,
}

/// `Phi(n,z)` and the sum of the absolute values of its terms.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiValue {
    pub value: BigComplex,
    pub star_value: BigReal,
}

/// Which split equation a root solves.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `z = alpha + beta`
    E1,
    /// `z = alpha - beta`
    E2,
}

impl Branch {
    fn sign(self) -> i64 {
        match self {
            Branch::E1 => 1,
            Branch::E2 => -1,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::E1 => "E1",
            Branch::E2 => "E2",
        })
    }
}

/// One solved root of a split equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub z: BigComplex,
    pub branch: Branch,
    /// `|z - alpha(z) ∓ beta(z)|` with the truncated series.
    pub residual: BigReal,
    /// Bound on the distance to the exact fixed point.
    pub error_bound: BigReal,
    pub alpha: SeriesValue,
    pub beta: SeriesValue,
    pub iterations: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationPair {
    pub n: u32,
    pub a: BigComplex,
    pub minus: Root,
    pub plus: Root,
    /// Lipschitz constant of `alpha ± beta` on the disc that holds the roots.
    pub lipschitz: f64,
    /// Both split equations returned the same value.
    pub degenerate: bool,
}

impl DeviationPair {
    pub fn z_minus(&self) -> &BigComplex {
        &self.minus.z
    }

    pub fn z_plus(&self) -> &BigComplex {
        &self.plus.z
    }

    /// `(branch of z⁻, branch of z⁺)`.
    pub fn branch_map(&self) -> (Branch, Branch) {
        (self.minus.branch, self.plus.branch)
    }
}

/// `gamma_n = z⁺ - z⁻` with an error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct GapSeries {
    pub value: BigComplex,
    pub bound: BigReal,
    pub pair: DeviationPair,
}

fn require_n(n: u32, min: u32) -> Result<()> {
    if n < min {
        return Err(Error::Config(format!("n = {n} is below the minimum {min}")));
    }
    Ok(())
}

fn require_disc(z: &BigComplex) -> Result<()> {
    if z.in_unit_disc() {
        Ok(())
    } else {
        Err(Error::OutsideDisc(format!("{z}")))
    }
}

fn real(v: f64, prec: Precision) -> BigReal {
    BigReal::from_f64(v, prec)
}

/// Upper bound on `1/|n² - j² + z|` for `|z| <= z_abs`.
fn uniform_weight(n: i64, j: i64, z_abs: f64) -> f64 {
    1.0 / ((n * n - j * j).abs() as f64 - z_abs)
}

/// Geometric majorants for the tail of the `alpha` series.
struct AlphaTail {
    prec: Precision,
    a_abs: BigReal,
    /// `|a| · 4 log(6n)/n`, when below one.
    log_ratio: Option<f64>,
    /// `|a| · rho`, when below one.
    operator_ratio: Option<f64>,
    /// `w(n-2) + w(n+2)`.
    w_sum: f64,
}

const UP: f64 = 1.0 + 1e-12;

impl AlphaTail {
    fn new(n: u32, a_abs: &BigReal, z_abs: f64) -> Self {
        let ni = i64::from(n);
        let a = a_abs.to_f64();
        let q = 4.0 * (6.0 * f64::from(n)).ln() / f64::from(n) * UP;
        let w = |j: i64| {
            if j == ni || j == -ni {
                0.0
            } else {
                uniform_weight(ni, j, z_abs)
            }
        };
        let reach = ni + 8;
        let mut rho: f64 = 0.0;
        let mut j = -reach;
        while j <= reach {
            if j.abs() != ni {
                let row = w(j).sqrt() * (w(j - 2).sqrt() + w(j + 2).sqrt());
                rho = rho.max(row);
            }
            j += 2;
        }
        // rows further out are dominated by this one
        rho = rho.max(2.0 * (w(reach + 2) * w(reach)).sqrt()) * UP;
        let lr = a * q;
        let or = a * rho;
        AlphaTail {
            prec: a_abs.precision(),
            a_abs: a_abs.clone(),
            log_ratio: (lr < 1.0).then_some(lr),
            operator_ratio: (or < 1.0).then_some(or),
            w_sum: (w(ni - 2) + w(ni + 2)) * UP,
        }
    }

    fn usable(&self) -> bool {
        self.log_ratio.is_some() || self.operator_ratio.is_some()
    }

    /// Bound on `sum_{k > k_used} |A_{2k-1}|`.
    fn tail(&self, k_used: u32) -> Option<BigReal> {
        let p = self.prec;
        let one = BigReal::one(p);
        let k = i64::from(k_used);
        let log = self.log_ratio.map(|x| {
            let xr = real(x, p);
            let denom = &one - &(&xr * &xr);
            &self.a_abs * &xr.powi(2 * k + 1) / denom
        });
        let op = self.operator_ratio.map(|r| {
            let rr = real(r, p);
            let denom = &one - &(&rr * &rr);
            &self.a_abs * &self.a_abs * real(self.w_sum, p) * rr.powi(2 * k) / denom
        });
        match (log, op) {
            (Some(x), Some(y)) => Some(if x < y { x } else { y }),
            (x, y) => x.or(y),
        }
    }

    /// Smallest `K >= 1` whose tail is at most `tol`.
    fn terms_for(&self, tol: &BigReal) -> Result<(u32, BigReal)> {
        if !self.usable() {
            return Err(Error::BelowRegime(
                "no geometric majorant for the alpha tail".into(),
            ));
        }
        let mut k = 1u32;
        loop {
            let t = self.tail(k).expect("usable");
            if &t <= tol {
                return Ok((k, t));
            }
            if k > 20_000 {
                return Err(Error::BelowRegime("alpha series converges too slowly".into()));
            }
            k += 1;
        }
    }
}

/// `alpha_n(z)` truncated so that the tail is at most `tol` (absolute).
pub fn alpha(n: u32, z: &BigComplex, a: &BigComplex, tol: &BigReal) -> Result<SeriesValue> {
    require_n(n, 2)?;
    require_disc(z)?;
    let tails = AlphaTail::new(n, &a.abs(), z.abs().to_f64() * UP);
    let (k, tail) = tails.terms_for(tol)?;
    let terms = walks::loop_sums(n, WalkKind::LoopPlus, z, a, k)?;
    let value = terms
        .into_iter()
        .fold(BigComplex::zero(z.precision()), |acc, t| acc + t);
    Ok(SeriesValue {
        value,
        tail_bound: tail,
        terms_used: k,
    })
}

/// Sum of `|phi_k|` for the given vertex magnitudes `|1/(n² - j² + z)|`.
fn phi_star_from(n: u32, a_abs: &BigReal, mags: &[BigReal]) -> BigReal {
    let p = a_abs.precision();
    let a2 = a_abs * a_abs;
    let mut acc = BigReal::zero(p);
    for k in 2..n {
        // vertices -n + 2k and -n + 2k - 2 sit at indices k and k - 1
        acc = acc + &a2 * &mags[k as usize] * &mags[k as usize - 1];
    }
    acc
}

/// `Phi(n,z) = sum_{k=2}^{n-1} a² / ((n² - (-n+2k)² + z)(n² - (-n+2k-2)² + z))`.
pub fn phi(n: u32, z: &BigComplex, a: &BigComplex) -> Result<PhiValue> {
    require_n(n, 3)?;
    require_disc(z)?;
    let (lo, hi) = walks::crossing_vertex_range(n);
    let w: Vec<BigComplex> = walks::vertex_weights(n, z, lo, hi)?;
    let a2 = a * a;
    let mut value = BigComplex::zero(z.precision());
    for k in 2..n {
        value = value + &a2 * &w[k as usize] * &w[k as usize - 1];
    }
    let mags: Vec<BigReal> = w.iter().map(BigComplex::abs).collect();
    Ok(PhiValue {
        value,
        star_value: phi_star_from(n, &a.abs(), &mags),
    })
}

/// Crossing sums with magnitudes, extended until the tail fits.
fn beta_with(
    n: u32,
    z: &BigComplex,
    a: &BigComplex,
    rel_tol: &BigReal,
) -> Result<SeriesValue> {
    let prec = z.precision();
    let (lo, hi) = walks::crossing_vertex_range(n);
    let w: Vec<BigComplex> = walks::vertex_weights(n, z, lo, hi)?;
    let mags: Vec<BigReal> = w.iter().map(BigComplex::abs).collect();
    let a_abs = a.abs();
    let phi_star = phi_star_from(n, &a_abs, &mags);
    let one = BigReal::one(prec);
    if phi_star >= one {
        return Err(Error::ContractionFails(format!(
            "Phi*({n}) = {:.6e}",
            phi_star.to_f64()
        )));
    }
    let ratio = &phi_star / &(&one - &phi_star);
    let mut p_max = 4u32;
    loop {
        let sums = walks::crossing_sums_with(n, WalkKind::CrossingUp, a, &w, p_max);
        let stars = walks::crossing_sums_with(n, WalkKind::CrossingUp, &a_abs, &mags, p_max);
        let mut value = BigComplex::zero(prec);
        for (p, s) in sums.iter().enumerate() {
            value = value + s;
            let tail = &stars[p] * &ratio;
            if tail <= rel_tol * &value.abs() {
                return Ok(SeriesValue {
                    value,
                    tail_bound: tail,
                    terms_used: p as u32 + 1,
                });
            }
        }
        if p_max >= 4096 {
            return Err(Error::ContractionFails(format!(
                "beta series for n={n} needs more than {p_max} terms"
            )));
        }
        p_max *= 2;
    }
}

/// `beta_n(z)` with tail at most `tol · |value|`.
pub fn beta(n: u32, z: &BigComplex, a: &BigComplex, tol: &BigReal) -> Result<SeriesValue> {
    require_n(n, 2)?;
    require_disc(z)?;
    beta_with(n, z, a, tol)
}

/// `sigma_0(n, z)`, the single shortest crossing.
pub fn sigma0(n: u32, z: &BigComplex, a: &BigComplex) -> Result<BigComplex> {
    let mut s = walks::crossing_sums(n, WalkKind::CrossingUp, z, a, 0)?;
    Ok(s.pop().expect("one entry"))
}

/// Upper bounds on `sup |alpha|` and `sup |beta|` over the closed unit disc.
pub fn uniform_bounds(n: u32, a: &BigComplex) -> Result<(BigReal, BigReal)> {
    require_n(n, 2)?;
    let prec = a.precision();
    let a_abs = a.abs();
    let ni = i64::from(n);
    let mag = |j: i64| {
        if j.abs() == ni {
            BigReal::zero(prec)
        } else {
            // 1/(|n² - j²| - 1), rounded up by a relative 2^-40
            let d = BigReal::from_i64((ni * ni - j * j).abs() - 1, prec);
            d.recip().expect("nonzero") * real(1.0 + 2f64.powi(-40), prec)
        }
    };

    let tails = AlphaTail::new(n, &a_abs, 1.0);
    // only an upper bound is needed, so a coarse tail is fine
    let tol = real(1e-6 / f64::from(n * n), prec);
    let (k, t_alpha) = tails.terms_for(&tol)?;
    let (lo, hi) = walks::loop_vertex_range(n, WalkKind::LoopPlus, k);
    let lw: Vec<BigReal> = (0..=((hi - lo) / 2)).map(|i| mag(lo + 2 * i)).collect();
    let m_alpha = walks::loop_sums_with(n, WalkKind::LoopPlus, &a_abs, &lw, k)
        .into_iter()
        .fold(t_alpha, |acc, x| acc + x);

    let cw: Vec<BigReal> = (0..=ni).map(|i| mag(-ni + 2 * i)).collect();
    let phi_star = phi_star_from(n, &a_abs, &cw);
    let one = BigReal::one(prec);
    if phi_star >= one {
        return Err(Error::ContractionFails(format!(
            "uniform Phi*({n}) = {:.6e}",
            phi_star.to_f64()
        )));
    }
    let p_max = 8;
    let stars = walks::crossing_sums_with(n, WalkKind::CrossingUp, &a_abs, &cw, p_max);
    let tail_beta = &stars[p_max as usize] * &phi_star / (&one - &phi_star);
    let m_beta = stars.into_iter().fold(tail_beta, |acc, x| acc + x);
    Ok((m_alpha, m_beta))
}

/// Lipschitz constant of `alpha ± beta` on the disc `|z| <= r`, where
/// `r = sup|alpha| + sup|beta|` bounds every iterate.
pub fn contraction_constant(n: u32, a: &BigComplex) -> Result<(f64, f64)> {
    let (ma, mb) = uniform_bounds(n, a)?;
    let r = (ma + mb).to_f64() * UP;
    if r >= 1.0 {
        return Err(Error::OutsideRegime(format!(
            "sup|alpha| + sup|beta| = {r:.4} on the unit disc"
        )));
    }
    let l = r / (1.0 - r);
    if l >= 1.0 {
        return Err(Error::OutsideRegime(format!(
            "Lipschitz bound {l:.4} >= 1 for n = {n}"
        )));
    }
    Ok((l, r))
}

/// Relative tolerance used when none is given: `2^(-bits/2)`.
pub fn default_tol(prec: Precision) -> BigReal {
    BigReal::one(prec).mul_pow2(-i64::from(prec.bits() / 2))
}

const MAX_ITERATIONS: u32 = 2000;

fn solve_branch(
    n: u32,
    a: &BigComplex,
    branch: Branch,
    rel_tol: &BigReal,
    lipschitz: f64,
) -> Result<Root> {
    let prec = a.precision();
    let floor_scale = BigReal::one(prec).mul_pow2(8 - i64::from(prec.bits()));
    let two_n2 = BigReal::from_i64(2 * i64::from(n) * i64::from(n), prec);
    let mut z = (a * a).scale(&two_n2.recip().expect("n >= 1"));
    let sign = BigReal::from_i64(branch.sign(), prec);
    let eval = |z: &BigComplex| -> Result<(SeriesValue, SeriesValue, BigComplex)> {
        let b = beta_with(n, z, a, rel_tol)?;
        let tol_a = rel_tol * &b.value.abs();
        let al = alpha(n, z, a, &tol_a)?;
        let next = &al.value + &b.value.scale(&sign);
        Ok((al, b, next))
    };
    for it in 1..=MAX_ITERATIONS {
        let (_, _, next) = eval(&z)?;
        if !next.in_unit_disc() {
            return Err(Error::OutsideRegime(format!(
                "iterate left the unit disc for n = {n}"
            )));
        }
        let step = (&next - &z).abs();
        z = next;
        let (al, b, image) = eval(&z)?;
        let residual = (&image - &z).abs();
        let target = {
            let t1 = rel_tol * &b.value.abs();
            let t2 = &floor_scale * &z.abs();
            if t1 > t2 { t1 } else { t2 }
        };
        if step <= target || residual <= target {
            let floor = &floor_scale * &z.abs();
            let total = &residual + &al.tail_bound + &b.tail_bound + &floor;
            let error_bound = total / real(1.0 - lipschitz, prec);
            return Ok(Root {
                z,
                branch,
                residual,
                error_bound,
                alpha: al,
                beta: b,
                iterations: it,
            });
        }
    }
    Err(Error::OutsideRegime(format!(
        "fixed-point iteration did not settle for n = {n}"
    )))
}

fn cmp_complex(x: &BigComplex, y: &BigComplex) -> Ordering {
    x.re.cmp(&y.re).then_with(|| x.im.cmp(&y.im))
}

/// Solves both split equations and orders the roots by `(Re, Im)`.
pub fn solve_deviations(
    n: u32,
    a: &BigComplex,
    prec: Precision,
    tol: &BigReal,
) -> Result<DeviationPair> {
    require_n(n, 2)?;
    if a.is_zero() {
        return Err(Error::ZeroAmplitude);
    }
    let a = a.with_prec(prec);
    let tol = tol.with_prec(prec);
    let (lipschitz, _) = contraction_constant(n, &a)?;
    let e1 = solve_branch(n, &a, Branch::E1, &tol, lipschitz)?;
    let e2 = solve_branch(n, &a, Branch::E2, &tol, lipschitz)?;
    let degenerate = e1.z == e2.z;
    let (minus, plus) = if cmp_complex(&e1.z, &e2.z) == Ordering::Greater {
        (e2, e1)
    } else {
        (e1, e2)
    };
    Ok(DeviationPair {
        n,
        a,
        minus,
        plus,
        lipschitz,
        degenerate,
    })
}

/// `gamma_n = z⁺ - z⁻` from the series side.
pub fn gap_series(n: u32, a: &BigComplex, prec: Precision, tol: &BigReal) -> Result<GapSeries> {
    let pair = solve_deviations(n, a, prec, tol)?;
    let value = &pair.plus.z - &pair.minus.z;
    let bound = &pair.plus.error_bound + &pair.minus.error_bound;
    Ok(GapSeries { value, bound, pair })
}

/// Divided-difference arithmetic: carries `f(z⁻)`, `f(z⁺)` and
/// `(f(z⁺) - f(z⁻)) / (z⁺ - z⁻)` through every operation without
/// subtracting nearby values.
#[derive(Clone, Debug, PartialEq)]
struct DivDiff {
    lo: BigComplex,
    hi: BigComplex,
    d: BigComplex,
}

impl Add for DivDiff {
    type Output = DivDiff;
    fn add(self, o: DivDiff) -> DivDiff {
        DivDiff {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
            d: self.d + o.d,
        }
    }
}

impl Sub for DivDiff {
    type Output = DivDiff;
    fn sub(self, o: DivDiff) -> DivDiff {
        DivDiff {
            lo: self.lo - o.lo,
            hi: self.hi - o.hi,
            d: self.d - o.d,
        }
    }
}

impl Mul for DivDiff {
    type Output = DivDiff;
    fn mul(self, o: DivDiff) -> DivDiff {
        // (fg)[lo,hi] = f[lo,hi] g(hi) + f(lo) g[lo,hi]
        let d = &self.d * &o.hi + &self.lo * &o.d;
        DivDiff {
            lo: self.lo * o.lo,
            hi: self.hi * o.hi,
            d,
        }
    }
}

impl Neg for DivDiff {
    type Output = DivDiff;
    fn neg(self) -> DivDiff {
        DivDiff {
            lo: -self.lo,
            hi: -self.hi,
            d: -self.d,
        }
    }
}

impl Scalar for DivDiff {
    type Ctx = Precision;

    fn context(&self) -> Precision {
        self.lo.precision()
    }
    fn from_int(v: i64, ctx: Precision) -> Self {
        let c = BigComplex::from_int(v, ctx);
        DivDiff {
            lo: c.clone(),
            hi: c,
            d: BigComplex::zero(ctx),
        }
    }
    fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero() && self.d.is_zero()
    }
    fn recip(&self) -> Option<Self> {
        let il = self.lo.recip()?;
        let ih = self.hi.recip()?;
        let d = -(&self.d * &il * &ih);
        Some(DivDiff { lo: il, hi: ih, d })
    }
    fn conj(&self) -> Self {
        DivDiff {
            lo: self.lo.conj(),
            hi: self.hi.conj(),
            d: self.d.conj(),
        }
    }
    fn in_unit_disc(&self) -> bool {
        self.lo.in_unit_disc() && self.hi.in_unit_disc()
    }
}

/// `[alpha(z⁺) - alpha(z⁻)] / (z⁺ - z⁻)`, evaluated without cancellation.
/// Equal arguments give the derivative `alpha'(z)`.
pub fn alpha_difference_factor(
    n: u32,
    a: &BigComplex,
    z_minus: &BigComplex,
    z_plus: &BigComplex,
) -> Result<SeriesValue> {
    require_n(n, 2)?;
    require_disc(z_minus)?;
    require_disc(z_plus)?;
    let prec = z_minus.precision();
    let r = z_minus.abs().max_abs(&z_plus.abs()).to_f64() * UP;
    if r >= 1.0 {
        return Err(Error::OutsideDisc("difference endpoints on the unit circle".into()));
    }
    // a derivative bound on |z| <= r follows from the uniform tail on |z| <= 1
    let tails = AlphaTail::new(n, &a.abs(), 1.0);
    let scale = &(a * a).abs() / &BigReal::from_i64(8 * i64::from(n) * i64::from(n), prec);
    let tol = &default_tol(prec) * &scale * real(1.0 - r, prec);
    let (k, tail) = tails.terms_for(&tol)?;
    let tail = tail / real(1.0 - r, prec);

    let zd = DivDiff {
        lo: z_minus.clone(),
        hi: z_plus.clone(),
        d: BigComplex::one(prec),
    };
    let ad = DivDiff {
        lo: a.clone(),
        hi: a.clone(),
        d: BigComplex::zero(prec),
    };
    let terms = walks::loop_sums(n, WalkKind::LoopPlus, &zd, &ad, k)?;
    let value = terms
        .into_iter()
        .fold(BigComplex::zero(prec), |acc, t| acc + t.d);
    Ok(SeriesValue {
        value,
        tail_bound: tail,
        terms_used: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ExactRational, Precision};

    fn p256() -> Precision {
        Precision::new(256).unwrap()
    }

    fn c(s: &str) -> BigComplex {
        BigComplex::parse(s, p256()).unwrap()
    }

    fn r(x: f64) -> BigReal {
        BigReal::from_f64(x, p256())
    }

    #[test]
    fn alpha_at_n10_starts_with_a1() {
        let v = alpha(10, &c("0"), &c("1"), &r(1e-30)).unwrap();
        let a1 = BigReal::from_ratio(ExactRational::new(1, 198).as_ratio(), p256());
        let diff = (&v.value.re - &a1).abs();
        // A_3 is about 1e-6 here, so the sum is close to but not equal to A_1
        assert!(diff.to_f64() < 1e-5 && diff.to_f64() > 0.0);
        assert!(v.tail_bound <= r(1e-30));
        assert!(v.value.im.is_zero());
    }

    #[test]
    fn alpha_matches_exact_oracle() {
        let tol = r(1e-40);
        let v = alpha(4, &c("0"), &c("1"), &tol).unwrap();
        let exact = walks::loop_sums(
            4,
            WalkKind::LoopPlus,
            &ExactRational::new(0, 1),
            &ExactRational::new(1, 1),
            v.terms_used,
        )
        .unwrap()
        .into_iter()
        .fold(ExactRational::new(0, 1), |acc, t| acc + t);
        let ex = BigReal::from_ratio(exact.as_ratio(), p256());
        let err = (&v.value.re - &ex).abs();
        assert!(err.log2_abs() < -240.0);
        // the next terms really are below the bound
        let more = walks::loop_sums(4, WalkKind::LoopPlus, &c("0"), &c("1"), v.terms_used + 6)
            .unwrap()
            .into_iter()
            .skip(v.terms_used as usize)
            .fold(BigComplex::zero(p256()), |acc, t| acc + t);
        assert!(more.abs() <= v.tail_bound);
    }

    #[test]
    fn alpha_depends_on_a_squared() {
        let z = c("0.25");
        let v = alpha(7, &z, &c("0.8i"), &r(1e-50)).unwrap();
        let w = alpha(7, &z, &c("-0.8i"), &r(1e-50)).unwrap();
        assert!(v.value.im.is_zero());
        assert_eq!(v.value, w.value);
        let u = alpha(7, &z, &c("0.8"), &r(1e-50)).unwrap();
        // a² = -0.64 vs 0.64: the leading term flips sign
        assert!(u.value.re.signum() == -v.value.re.signum());
    }

    #[test]
    fn beta_at_zero_is_sigma0_first() {
        let s0 = sigma0(6, &c("0"), &c("1")).unwrap();
        let want = 4.0 * 0.25f64.powi(6) / 14400.0;
        assert!((s0.re.to_f64() / want - 1.0).abs() < 1e-15);

        let b = beta(6, &c("0"), &c("1"), &r(1e-30)).unwrap();
        assert!(b.terms_used > 1);
        // oracle: exact partial sums, then the omitted terms against the bound
        let exact = |terms: u32| -> BigReal {
            let e = walks::crossing_sums(
                6,
                WalkKind::CrossingUp,
                &ExactRational::new(0, 1),
                &ExactRational::new(1, 1),
                terms - 1,
            )
            .unwrap()
            .into_iter()
            .fold(ExactRational::new(0, 1), |acc, t| acc + t);
            BigReal::from_ratio(e.as_ratio(), p256())
        };
        let head = exact(b.terms_used);
        assert!((&b.value.re - &head).abs().log2_abs() < -240.0);
        let longer = exact(b.terms_used + 8);
        assert!((&longer - &head).abs() <= b.tail_bound);
        assert!(b.tail_bound <= r(1e-30) * b.value.abs());
    }

    #[test]
    fn phi_small_cases() {
        let v = phi(4, &c("0"), &c("1")).unwrap();
        let want = BigReal::from_ratio(ExactRational::new(1, 96).as_ratio(), p256());
        assert!((&v.value.re - &want).abs().log2_abs() < -250.0);
        let a = c("1.5");
        let v3 = phi(3, &c("0"), &a).unwrap();
        let want3 = (&a * &a).re / BigReal::from_i64(64, p256());
        assert!((&v3.value.re - &want3).abs().log2_abs() < -250.0);
        assert!(v3.value.abs() <= v3.star_value);
        assert!(phi(2, &c("0"), &a).is_err());
    }

    #[test]
    fn phi_is_the_first_ratio() {
        for n in 3..=8u32 {
            let z = ExactRational::new(1, 3);
            let a = ExactRational::new(-5, 4);
            let s = walks::crossing_sums(n, WalkKind::CrossingUp, &z, &a, 1).unwrap();
            let mut phi_exact = ExactRational::new(0, 1);
            let ni = i64::from(n);
            for k in 2..ni {
                let d1 = ExactRational::new(ni * ni - (-ni + 2 * k).pow(2), 1) + z.clone();
                let d2 = ExactRational::new(ni * ni - (-ni + 2 * k - 2).pow(2), 1) + z.clone();
                phi_exact = phi_exact + a.clone() * a.clone() * (d1 * d2).recip().unwrap();
            }
            assert_eq!(s[1], s[0].clone() * phi_exact, "n={n}");
        }
    }

    #[test]
    fn contraction_flags_small_n() {
        assert!(matches!(
            contraction_constant(2, &c("1")),
            Err(Error::OutsideRegime(_))
        ));
        let (l, _) = contraction_constant(6, &c("1")).unwrap();
        assert!(l < 0.1);
    }

    #[test]
    fn deviations_at_n10() {
        let pr = p256();
        let pair = solve_deviations(10, &c("1"), pr, &default_tol(pr)).unwrap();
        for root in [&pair.minus, &pair.plus] {
            let z = root.z.re.to_f64();
            assert!((z - 0.00505).abs() < 1e-6, "z = {z}");
            assert!(root.z.im.is_zero());
            assert!(root.z.in_unit_disc());
        }
        assert!(pair.plus.z.re > pair.minus.z.re);
        let (bm, bp) = pair.branch_map();
        assert_ne!(bm, bp);
        // both fixed points bracket alpha at either root
        assert!(pair.minus.z.re < pair.minus.alpha.value.re);
        assert!(pair.plus.z.re > pair.plus.alpha.value.re);
    }

    #[test]
    fn gap_at_n5() {
        let pr = p256();
        let g = gap_series(5, &c("1"), pr, &default_tol(pr)).unwrap();
        let v = g.value.re.to_f64();
        // independent eigenvalue computation: 1.35221588146879929e-5
        assert!((v / 1.352_215_881_468_799_3e-5 - 1.0).abs() < 1e-15, "gap = {v}");
        let refined = 8.0 * 0.25f64.powi(5) / 576.0 * (1.0 - 1.0 / 500.0);
        assert!((v / refined - 1.0).abs() < 3e-3);
        assert!(g.bound.to_f64() < 1e-40);
    }

    #[test]
    fn gap_parity_in_a() {
        let pr = p256();
        let tol = default_tol(pr);
        for n in [6u32, 7] {
            let gp = gap_series(n, &c("1"), pr, &tol).unwrap().value;
            let gm = gap_series(n, &c("-1"), pr, &tol).unwrap().value;
            // the gap is a magnitude after sorting, so only |gamma| is compared
            let rel = ((&gp.re - &gm.re).abs() / gp.re.abs()).to_f64();
            assert!(rel < 1e-60, "n={n}");
        }
    }

    #[test]
    fn difference_factor_identity() {
        let pr = p256();
        let n = 10;
        let a = c("1");
        let g = gap_series(n, &a, pr, &default_tol(pr)).unwrap();
        let pair = &g.pair;
        let d = alpha_difference_factor(n, &a, pair.z_minus(), pair.z_plus()).unwrap();
        assert!((d.value.re.to_f64() + 0.00125).abs() < 2e-4);
        let lhs = &g.value * &(BigComplex::one(pr) - &d.value);
        let rhs = &pair.plus.beta.value + &pair.minus.beta.value;
        let miss = (lhs.abs() - rhs.abs()).abs();
        let rel = (&miss / &rhs.abs()).to_f64();
        assert!(rel < 1e-30, "identity misses by {rel:e}");
    }

    #[test]
    fn difference_factor_vanishes_with_a() {
        let z = c("0.001");
        let small = alpha_difference_factor(9, &c("0.001"), &z, &z).unwrap();
        assert!(small.value.abs().to_f64() < 1e-8);
    }
}
