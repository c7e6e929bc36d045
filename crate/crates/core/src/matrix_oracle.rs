//! Periodic and antiperiodic eigenvalues of `-y'' + 2a cos(2x) y` from
//! truncated Fourier matrices.
//!
//! In the exponential basis `e^{ifx}` the operator is tridiagonal with
//! diagonal `f²` and off-diagonal `a`. Splitting into cosine and sine
//! parts gives four smaller tridiagonals, each holding exactly one of the
//! two eigenvalues near `n²` once `n` is large enough. Only products of
//! opposite off-diagonal entries enter the recurrences, so the matrices
//! are stored as a diagonal plus squared couplings.
//!
//! Real `a` uses Sturm bisection. Complex `a` counts roots of the
//! characteristic determinant inside `|λ - n²| < 1` with the argument
//! principle and refines them with Newton's method.
//!
//! Enclosure radii come from agreement between runs at `(K, p)`, `(2K, p)`
//! and `(2K, 2p)`. They are heuristics, not certified intervals.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{BigComplex, BigReal, Precision, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Periodic,
    Antiperiodic,
}

impl Parity {
    /// Periodic for even `n`, antiperiodic for odd `n`.
    pub fn of(n: u32) -> Self {
        if n.is_multiple_of(2) {
            Parity::Periodic
        } else {
            Parity::Antiperiodic
        }
    }
}

/// Tridiagonal matrix given by its diagonal and the products
/// `e²[k] = M[k-1][k] · M[k][k-1]` (`e²[0]` unused).
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<S> {
    pub diag: Vec<S>,
    pub e2: Vec<S>,
}

impl<S: Scalar> Tridiagonal<S> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Ratios `r_k = det_k / det_{k-1}` of leading principal minors of
    /// `M - λ`. A vanishing ratio is nudged by `nudge` to step past the
    /// removable singularity.
    fn minor_ratios(&self, lambda: &S, nudge: &S) -> Vec<S> {
        let mut out: Vec<S> = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let mut r = self.diag[k].clone() - lambda.clone();
            if k > 0 {
                let prev = out[k - 1].clone();
                let inv = prev.recip().expect("ratios are nudged away from zero");
                r = r - self.e2[k].clone() * inv;
            }
            if r.is_zero() {
                r = nudge.clone();
            }
            out.push(r);
        }
        out
    }
}

/// The full truncated problem in the exponential basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedProblem<S> {
    pub parity: Parity,
    pub a: S,
    pub k: u32,
}

impl<S: Scalar> TruncatedProblem<S> {
    pub fn new(parity: Parity, a: S, k: u32) -> Self {
        TruncatedProblem { parity, a, k }
    }

    /// Frequencies in increasing order: `2j` for `|j| <= K`, or the odd
    /// integers with `|f| <= 2K + 1`.
    pub fn frequencies(&self) -> Vec<i64> {
        let k = i64::from(self.k);
        match self.parity {
            Parity::Periodic => (-k..=k).map(|j| 2 * j).collect(),
            Parity::Antiperiodic => (-k - 1..=k).map(|j| 2 * j + 1).collect(),
        }
    }

    pub fn matrix(&self) -> Tridiagonal<S> {
        let ctx = self.a.context();
        let freqs = self.frequencies();
        let a2 = self.a.clone() * self.a.clone();
        Tridiagonal {
            diag: freqs.iter().map(|f| S::from_int(f * f, ctx)).collect(),
            e2: (0..freqs.len()).map(|_| a2.clone()).collect(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitKind {
    /// cos(2kx), k = 0..=K
    PeriodicCos,
    /// sin(2kx), k = 1..=K
    PeriodicSin,
    /// cos((2k+1)x), k = 0..=K
    AntiperiodicCos,
    /// sin((2k+1)x), k = 0..=K
    AntiperiodicSin,
}

impl SplitKind {
    pub fn for_parity(p: Parity) -> [SplitKind; 2] {
        match p {
            Parity::Periodic => [SplitKind::PeriodicCos, SplitKind::PeriodicSin],
            Parity::Antiperiodic => [SplitKind::AntiperiodicCos, SplitKind::AntiperiodicSin],
        }
    }
}

/// One symmetry block of the truncated problem.
pub fn split_matrix<S: Scalar>(kind: SplitKind, a: &S, k: u32) -> Tridiagonal<S> {
    let ctx = a.context();
    let a2 = a.clone() * a.clone();
    let sq = |f: i64| S::from_int(f * f, ctx);
    let k = i64::from(k);
    let (diag, e2): (Vec<S>, Vec<S>) = match kind {
        SplitKind::PeriodicCos => {
            let d = (0..=k).map(|j| sq(2 * j)).collect();
            let e = (0..=k)
                .map(|j| if j == 1 { a2.clone() + a2.clone() } else { a2.clone() })
                .collect();
            (d, e)
        }
        SplitKind::PeriodicSin => {
            let d = (1..=k).map(|j| sq(2 * j)).collect();
            let e = (1..=k).map(|_| a2.clone()).collect();
            (d, e)
        }
        SplitKind::AntiperiodicCos | SplitKind::AntiperiodicSin => {
            let mut d: Vec<S> = (0..=k).map(|j| sq(2 * j + 1)).collect();
            d[0] = if kind == SplitKind::AntiperiodicCos {
                d[0].clone() + a.clone()
            } else {
                d[0].clone() - a.clone()
            };
            let e = (0..=k).map(|_| a2.clone()).collect();
            (d, e)
        }
    };
    Tridiagonal { diag, e2 }
}

/// Number of eigenvalues strictly below `x` of a real symmetric
/// tridiagonal (Sturm sequence of leading minors).
pub fn sturm_count(m: &Tridiagonal<BigReal>, x: &BigReal) -> usize {
    let prec = x.precision();
    let nudge = (x.abs() + BigReal::one(prec)) * prec.epsilon();
    m.minor_ratios(x, &nudge)
        .iter()
        .filter(|r| r.is_negative())
        .count()
}

/// A value with a heuristic error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenEnclosure {
    pub value: BigComplex,
    pub radius: BigReal,
}

fn n2(n: u32, prec: Precision) -> BigReal {
    BigReal::from_i64(i64::from(n) * i64::from(n), prec)
}

/// The single eigenvalue of `m` inside `(n² - 1, n² + 1)` by bisection.
fn bisect_in_disc(m: &Tridiagonal<BigReal>, n: u32, prec: Precision) -> Result<BigReal> {
    let one = BigReal::one(prec);
    let centre = n2(n, prec);
    let mut lo = &centre - &one;
    let mut hi = &centre + &one;
    let c_lo = sturm_count(m, &lo);
    let c_hi = sturm_count(m, &hi);
    if c_hi != c_lo + 1 {
        return Err(Error::AmbiguousLocalization(format!(
            "{} eigenvalues of one symmetry block within distance 1 of n² = {}",
            c_hi as i64 - c_lo as i64,
            u64::from(n) * u64::from(n)
        )));
    }
    let stop = centre.mul_pow2(2 - i64::from(prec.bits()));
    loop {
        let mid = (&lo + &hi).mul_pow2(-1);
        if mid == lo || mid == hi || (&hi - &lo) <= stop {
            return Ok(mid);
        }
        if sturm_count(m, &mid) > c_lo {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Raw `(λ⁻, λ⁺)` for real `a` at one truncation and precision.
fn real_pair_at(n: u32, a: &BigReal, k: u32, prec: Precision) -> Result<(BigReal, BigReal)> {
    let a = a.with_prec(prec);
    let [s1, s2] = SplitKind::for_parity(Parity::of(n));
    let x = bisect_in_disc(&split_matrix(s1, &a, k), n, prec)?;
    let y = bisect_in_disc(&split_matrix(s2, &a, k), n, prec)?;
    Ok(if x <= y { (x, y) } else { (y, x) })
}

/// Winding number of `det(M - λ)` around `|λ - centre| = radius`.
pub fn count_in_disc(m: &Tridiagonal<BigComplex>, centre: &BigComplex, radius: f64) -> Result<i64> {
    let prec = centre.precision();
    let nudge = BigComplex::from_real(prec.epsilon());
    let phase = |theta: f64| -> f64 {
        let pt = centre + &BigComplex::from_f64(radius * theta.cos(), radius * theta.sin(), prec);
        let total: f64 = m
            .minor_ratios(&pt, &nudge)
            .iter()
            .map(BigComplex::arg_f64)
            .sum();
        wrap(total)
    };
    let samples = 64;
    let mut winding = 0.0;
    let mut prev_t = 0.0;
    let mut prev = phase(0.0);
    for i in 1..=samples {
        let t = 2.0 * PI * f64::from(i) / f64::from(samples);
        winding += phase_increment(&phase, prev_t, prev, t, 0)?;
        prev = phase(t);
        prev_t = t;
    }
    Ok((winding / (2.0 * PI)).round() as i64)
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Phase change from `t0` to `t1`, subdividing until each piece is small.
fn phase_increment(
    phase: &dyn Fn(f64) -> f64,
    t0: f64,
    p0: f64,
    t1: f64,
    depth: u32,
) -> Result<f64> {
    let p1 = phase(t1);
    let d = wrap(p1 - p0);
    if d.abs() < PI / 4.0 {
        return Ok(d);
    }
    if depth > 24 {
        return Err(Error::RootCount(
            "a root lies on the counting circle".into(),
        ));
    }
    let tm = 0.5 * (t0 + t1);
    let pm = phase(tm);
    Ok(phase_increment(phase, t0, p0, tm, depth + 1)? + phase_increment(phase, tm, pm, t1, depth + 1)?)
}

/// Newton's method on `det(M - λ)` using the logarithmic derivative
/// `sum_k r_k' / r_k`, which needs no scaling of the determinant.
fn newton_root(m: &Tridiagonal<BigComplex>, start: &BigComplex, n: u32) -> Result<BigComplex> {
    let prec = start.precision();
    let nudge = BigComplex::from_real(prec.epsilon());
    let stop = n2(n, prec).mul_pow2(4 - i64::from(prec.bits()));
    let centre = BigComplex::from_real(n2(n, prec));
    let mut lambda = start.clone();
    for _ in 0..400 {
        let r = m.minor_ratios(&lambda, &nudge);
        let mut dr = BigComplex::from_int(-1, prec);
        let mut logd = &dr * &r[0].recip().expect("nudged");
        for k in 1..r.len() {
            let inv_prev = r[k - 1].recip().expect("nudged");
            dr = BigComplex::from_int(-1, prec) + &m.e2[k] * &dr * &inv_prev * &inv_prev;
            logd = logd + &dr * &r[k].recip().expect("nudged");
        }
        let step = logd
            .recip()
            .ok_or_else(|| Error::RootCount("flat determinant during Newton".into()))?;
        lambda = &lambda - &step;
        if (&lambda - &centre).abs() >= BigReal::one(prec) {
            return Err(Error::RootCount("Newton left the disc |λ - n²| < 1".into()));
        }
        if step.abs() <= stop {
            return Ok(lambda);
        }
    }
    Err(Error::RootCount("Newton did not converge".into()))
}

fn cmp_complex(x: &BigComplex, y: &BigComplex) -> Ordering {
    x.re.cmp(&y.re).then_with(|| x.im.cmp(&y.im))
}

/// Raw `(λ⁻, λ⁺)` for complex `a` at one truncation and precision.
fn complex_pair_at(n: u32, a: &BigComplex, k: u32, prec: Precision) -> Result<(BigComplex, BigComplex)> {
    let a = a.with_prec(prec);
    let centre = BigComplex::from_real(n2(n, prec));
    let mut roots = Vec::with_capacity(2);
    let mut total = 0;
    for kind in SplitKind::for_parity(Parity::of(n)) {
        let m = split_matrix(kind, &a, k);
        let count = count_in_disc(&m, &centre, 1.0)?;
        total += count;
        if count != 1 {
            continue;
        }
        // start from the diagonal entry that sits at n²
        let start = m
            .diag
            .iter()
            .min_by(|x, y| (*x - &centre).abs().cmp(&(*y - &centre).abs()))
            .expect("nonempty")
            .clone();
        roots.push(newton_root(&m, &start, n)?);
    }
    if total != 2 || roots.len() != 2 {
        return Err(Error::RootCount(format!(
            "{total} roots in |λ - n²| < 1 for n = {n}"
        )));
    }
    let y = roots.pop().expect("two roots");
    let x = roots.pop().expect("two roots");
    Ok(if cmp_complex(&x, &y) == Ordering::Greater {
        (y, x)
    } else {
        (x, y)
    })
}

fn raw_pair(n: u32, a: &BigComplex, k: u32, prec: Precision) -> Result<(BigComplex, BigComplex)> {
    if a.is_real() {
        let (x, y) = real_pair_at(n, &a.re, k, prec)?;
        Ok((BigComplex::from_real(x), BigComplex::from_real(y)))
    } else {
        complex_pair_at(n, a, k, prec)
    }
}

fn check_inputs(n: u32, a: &BigComplex, k: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    if a.is_zero() {
        return Err(Error::ZeroAmplitude);
    }
    if k < n / 2 + 2 {
        return Err(Error::InsufficientTruncation(format!(
            "K = {k} cannot resolve n = {n}"
        )));
    }
    Ok(())
}

/// Three runs with their truncation and precision deltas.
struct Runs {
    fine: (BigComplex, BigComplex),
    coarse_k: (BigComplex, BigComplex),
    coarse_p: (BigComplex, BigComplex),
    prec: Precision,
}

impl Runs {
    fn compute(n: u32, a: &BigComplex, k: u32, prec: Precision) -> Result<Self> {
        Ok(Runs {
            coarse_k: raw_pair(n, a, k, prec)?,
            coarse_p: raw_pair(n, a, 2 * k, prec)?,
            fine: raw_pair(n, a, 2 * k, prec.doubled())?,
            prec,
        })
    }

    fn floor(&self, n: u32) -> BigReal {
        n2(n, self.prec).mul_pow2(4 - i64::from(self.prec.bits()))
    }

    fn enclose(&self, n: u32, pick: impl Fn(&(BigComplex, BigComplex)) -> BigComplex) -> (EigenEnclosure, BigReal) {
        let fine = pick(&self.fine).with_prec(self.prec.doubled());
        let dk = (&pick(&self.coarse_k).with_prec(self.prec.doubled()) - &fine).abs();
        let dp = (&pick(&self.coarse_p).with_prec(self.prec.doubled()) - &fine).abs();
        let spread = dk.max_abs(&dp).with_prec(self.prec);
        let radius = spread.mul_pow2(1) + self.floor(n);
        (
            EigenEnclosure {
                value: fine.with_prec(self.prec),
                radius,
            },
            dk.with_prec(self.prec),
        )
    }
}

fn pair_enclosures(runs: &Runs, n: u32) -> (EigenEnclosure, EigenEnclosure) {
    let (lm, _) = runs.enclose(n, |p| p.0.clone());
    let (lp, _) = runs.enclose(n, |p| p.1.clone());
    (lm, lp)
}

/// `(λ⁻, λ⁺)` for real `a` by Sturm bisection on the symmetry blocks.
pub fn eigen_pair_real(
    n: u32,
    a: &BigReal,
    k: u32,
    prec: Precision,
) -> Result<(EigenEnclosure, EigenEnclosure)> {
    let ac = BigComplex::from_real(a.clone());
    check_inputs(n, &ac, k)?;
    let runs = Runs::compute(n, &ac, k, prec)?;
    Ok(pair_enclosures(&runs, n))
}

/// `(λ⁻, λ⁺)` for complex `a` via root counting and Newton refinement.
pub fn eigen_pair_complex(
    n: u32,
    a: &BigComplex,
    k: u32,
    prec: Precision,
) -> Result<(EigenEnclosure, EigenEnclosure)> {
    check_inputs(n, a, k)?;
    let run = |kk: u32, pp: Precision| complex_pair_at(n, a, kk, pp);
    let runs = Runs {
        coarse_k: run(k, prec)?,
        coarse_p: run(2 * k, prec)?,
        fine: run(2 * k, prec.doubled())?,
        prec,
    };
    Ok(pair_enclosures(&runs, n))
}

/// Oracle gap with its enclosure and the pair it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct GapOracle {
    pub gap: EigenEnclosure,
    pub minus: EigenEnclosure,
    pub plus: EigenEnclosure,
    /// Truncation used for the coarse run.
    pub k: u32,
}

/// Initial truncation margin above `n`.
pub const DEFAULT_MARGIN: u32 = 16;

/// `gamma_n = λ⁺ - λ⁻`, doubling `K` until truncation no longer dominates.
pub fn gap_oracle(n: u32, a: &BigComplex, prec: Precision) -> Result<GapOracle> {
    gap_oracle_from(n, a, prec, n + DEFAULT_MARGIN)
}

pub fn gap_oracle_from(n: u32, a: &BigComplex, prec: Precision, k0: u32) -> Result<GapOracle> {
    check_inputs(n, a, k0)?;
    let mut k = k0;
    let mut last_dk: Option<BigReal> = None;
    for _ in 0..6 {
        let runs = Runs::compute(n, a, k, prec)?;
        let (gap, dk) = runs.enclose(n, |p| &p.1 - &p.0);
        let (minus, plus) = pair_enclosures(&runs, n);
        let target = gap.value.abs().mul_pow2(-i64::from(prec.bits() / 2));
        if dk <= target || dk <= runs.floor(n) {
            return Ok(GapOracle { gap, minus, plus, k });
        }
        if let Some(prev) = &last_dk {
            if &dk >= prev {
                return Err(Error::InsufficientTruncation(format!(
                    "truncation change {:.3e} did not shrink when K went to {k}",
                    dk.to_f64()
                )));
            }
        }
        last_dk = Some(dk);
        k *= 2;
    }
    Err(Error::InsufficientTruncation(format!(
        "gap for n = {n} still moving at K = {k}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn c(s: &str, bits: u32) -> BigComplex {
        BigComplex::parse(s, p(bits)).unwrap()
    }

    #[test]
    fn first_gap_for_small_a() {
        let g = gap_oracle(1, &c("0.01", 128), p(128)).unwrap();
        let v = g.gap.value.re.to_f64();
        assert!((v / 0.02 - 1.0).abs() < 0.01, "gamma_1 = {v}");
    }

    #[test]
    fn fifth_gap() {
        let g = gap_oracle(5, &c("1", 256), p(256)).unwrap();
        let v = g.gap.value.re.to_f64();
        assert!((v / 1.352_215_881_468_799_3e-5 - 1.0).abs() < 1e-15, "gamma_5 = {v}");
        assert!(g.gap.radius.to_f64() < 1e-60);
    }

    #[test]
    fn localisation_for_a_equal_one() {
        for n in 3..=12u32 {
            let g = gap_oracle(n, &c("1", 128), p(128)).unwrap();
            let centre = BigComplex::from_real(n2(n, p(128)));
            for l in [&g.minus, &g.plus] {
                assert!((&l.value - &centre).abs() < BigReal::one(p(128)));
                assert!(l.value.im.is_zero());
            }
            assert!(!g.gap.value.re.is_negative() && !g.gap.value.re.is_zero());
        }
    }

    #[test]
    fn twentieth_gap_against_leading_formula() {
        let g = gap_oracle(20, &c("1", 256), p(256)).unwrap();
        let fact: f64 = (1..20).map(f64::from).product();
        let lead = 8.0 * 0.25f64.powi(20) / (fact * fact);
        let v = g.gap.value.re.to_f64();
        assert!((v / lead - 1.0).abs() < 1e-3);
    }

    #[test]
    fn split_blocks_reproduce_full_spectrum() {
        let prec = p(192);
        let a = BigReal::parse("1.7", prec).unwrap();
        for parity in [Parity::Periodic, Parity::Antiperiodic] {
            let k = 12;
            let full = TruncatedProblem::new(parity, a.clone(), k).matrix();
            let blocks = SplitKind::for_parity(parity).map(|s| split_matrix(s, &a, k));
            assert_eq!(full.dim(), blocks[0].dim() + blocks[1].dim());
            for i in 0..400 {
                let x = BigReal::from_f64(-10.0 + f64::from(i) * 2.37, prec);
                let want = sturm_count(&full, &x);
                let got = sturm_count(&blocks[0], &x) + sturm_count(&blocks[1], &x);
                assert_eq!(want, got, "{parity:?} x = {}", x.to_f64());
            }
            // eigenvalues themselves agree to arithmetic precision
            for n in [4u32, 5, 6, 7] {
                if Parity::of(n) != parity {
                    continue;
                }
                let (x, y) = real_pair_at(n, &a, k, prec).unwrap();
                for l in [x, y] {
                    let eps = BigReal::from_f64(1e-40, prec);
                    let below = sturm_count(&full, &(&l - &eps));
                    let above = sturm_count(&full, &(&l + &eps));
                    assert_eq!(above, below + 1);
                }
            }
        }
    }

    #[test]
    fn truncation_errors_shrink() {
        let prec = p(256);
        let a = c("1", 256);
        let n = 8;
        let mut prev: Option<BigReal> = None;
        let fine = raw_pair(n, &a, 64, prec).unwrap();
        let g_fine = &fine.1 - &fine.0;
        for k in [6u32, 8, 10, 12] {
            let (x, y) = raw_pair(n, &a, k, prec).unwrap();
            let d = (&(&y - &x) - &g_fine).abs();
            if let Some(pr) = &prev {
                assert!(&d <= pr, "K = {k}");
            }
            prev = Some(d);
        }
    }

    #[test]
    fn complex_path_agrees_with_sturm_for_real_a() {
        let prec = p(192);
        for n in [4u32, 7] {
            let a = c("1", 192);
            let real = eigen_pair_real(n, &a.re, n + 16, prec).unwrap();
            let cplx = eigen_pair_complex(n, &a, n + 16, prec).unwrap();
            for (r, z) in [(&real.0, &cplx.0), (&real.1, &cplx.1)] {
                let d = (&r.value - &z.value).abs();
                assert!(d <= &r.radius + &z.radius, "n={n}");
            }
        }
    }

    #[test]
    fn imaginary_amplitude_ratio() {
        let prec = p(256);
        let n = 8;
        let g = gap_oracle(n, &c("i", 256), prec).unwrap();
        let fact: f64 = (1..n).map(f64::from).product();
        // (i/4)^8 = 4^-8
        let lead = 8.0 * 0.25f64.powi(8) / (fact * fact);
        let ratio = g.gap.value.abs().to_f64() / lead;
        assert!((ratio - (1.0 + 1.0 / 2048.0)).abs() < 3e-4, "ratio = {ratio}");
    }

    #[test]
    fn two_roots_in_the_disc() {
        let prec = p(128);
        let a = c("0.5+0.5i", 128);
        let centre = BigComplex::from_real(n2(6, prec));
        let full = TruncatedProblem::new(Parity::Periodic, a.clone(), 24).matrix();
        assert_eq!(count_in_disc(&full, &centre, 1.0).unwrap(), 2);
        for kind in SplitKind::for_parity(Parity::Periodic) {
            let m = split_matrix(kind, &a, 24);
            assert_eq!(count_in_disc(&m, &centre, 1.0).unwrap(), 1);
        }
    }

    #[test]
    fn large_amplitude_is_ambiguous_at_small_n() {
        let err = gap_oracle(2, &c("6", 128), p(128)).unwrap_err();
        assert!(matches!(err, Error::AmbiguousLocalization(_)), "{err:?}");
    }
}
