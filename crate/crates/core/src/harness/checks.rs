//! Verification suites. The acceptance criteria live here so the CLI and
//! the `acceptance` test target run identical code.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, fit_remainder_order};
use crate::error::{Error, Result};
use crate::ls_series;
use crate::matrix_oracle::{self, Parity, SplitKind, TruncatedProblem};
use crate::numeric::{
    factorial_squared, BigComplex, BigReal, ComplexRational, ExactRational, Precision, Scalar,
};
use crate::potential::TrigPotential;
use crate::walks::{self, SIndex, WalkFamily, WalkKind};

/// Precision used by every check.
pub const CHECK_BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Walks,
    Series,
    Oracle,
    Asymptotics,
    Acceptance,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "walks" => Suite::Walks,
            "series" => Suite::Series,
            "oracle" => Suite::Oracle,
            "asymptotics" => Suite::Asymptotics,
            "acceptance" => Suite::Acceptance,
            "all" => Suite::All,
            _ => return Err(Error::Config(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

type Check = fn() -> Result<String>;

/// A check passes when it returns `Ok`; the string explains the numbers.
fn run(name: &str, f: Check) -> CheckResult {
    match f() {
        Ok(detail) => CheckResult {
            name: name.to_string(),
            passed: true,
            detail,
        },
        Err(e) => CheckResult {
            name: name.to_string(),
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn fail(msg: impl Into<String>) -> Error {
    Error::InsufficientData(msg.into())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(fail(msg()))
    }
}

fn prec() -> Precision {
    Precision::new(CHECK_BITS).expect("valid")
}

fn amp(s: &str) -> BigComplex {
    BigComplex::parse(s, prec()).expect("literal")
}

fn q(a: i64, b: i64) -> ExactRational {
    ExactRational::new(a, b)
}

/// The ten acceptance criteria, in order.
pub const CRITERIA: [(&str, Check); 10] = [
    ("criterion 1: exact sigma_0 closed form", criterion_1),
    ("criterion 2: DP equals enumeration", criterion_2),
    ("criterion 3: parity and symmetry identities", criterion_3),
    ("criterion 4: series and oracle gaps agree", criterion_4),
    ("criterion 5: gap remainder order", criterion_5),
    ("criterion 6: deviation remainder order", criterion_6),
    ("criterion 7: phi and beta expansions", criterion_7),
    ("criterion 8: small-amplitude gaps", criterion_8),
    ("criterion 9: localization and positivity", criterion_9),
    ("criterion 10: imaginary amplitude", criterion_10),
];

const EXTRA: [(&str, Check); 4] = [
    ("series examples", series_examples),
    ("oracle examples", oracle_examples),
    ("asymptotics examples", asymptotics_examples),
    ("phi decomposition", phi_decomposition),
];

fn names_for(suite: Suite) -> Vec<&'static str> {
    match suite {
        Suite::Walks => vec!["criterion 1", "criterion 2", "criterion 3"],
        Suite::Series => vec!["series examples", "criterion 6", "criterion 7"],
        Suite::Oracle => vec!["oracle examples", "criterion 8", "criterion 9"],
        Suite::Asymptotics => vec!["asymptotics examples", "phi decomposition", "criterion 5"],
        Suite::Acceptance => CRITERIA.iter().map(|c| c.0).collect(),
        Suite::All => EXTRA
            .iter()
            .chain(CRITERIA.iter())
            .map(|c| c.0)
            .collect(),
    }
}

/// Runs the checks of one suite.
pub fn verify(suite: Suite) -> VerifySummary {
    let wanted = names_for(suite);
    let checks: Vec<CheckResult> = EXTRA
        .iter()
        .chain(CRITERIA.iter())
        .filter(|(name, _)| {
            wanted
                .iter()
                .any(|w| *name == *w || name.split(':').next() == Some(*w))
        })
        .map(|(name, f)| run(name, *f))
        .collect();
    VerifySummary {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Runs acceptance criterion `i` (1-based).
pub fn acceptance(i: usize) -> CheckResult {
    let (name, f) = CRITERIA[i - 1];
    run(name, f)
}

// ---- criteria -------------------------------------------------------------

fn criterion_1() -> Result<String> {
    let amps = [q(1, 1), q(-3, 5), q(7, 2), q(1, 3)];
    let mut count = 0;
    for n in 2..=30u32 {
        for a in &amps {
            let want = q(4, 1)
                * (a.clone() * q(1, 4)).pow(n)
                * factorial_squared(n).recip().expect("positive");
            for kind in [WalkKind::CrossingUp, WalkKind::CrossingDown] {
                let s = walks::crossing_sums(n, kind, &q(0, 1), a, 0)?;
                ensure(s[0] == want, || format!("n = {n}, a = {a:?}, {kind:?}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} exact identities for n in 2..=30"))
}

fn criterion_2() -> Result<String> {
    let zs = [q(0, 1), q(1, 3), q(-2, 7)];
    let a = q(3, 2);
    let mut count = 0;
    for n in 1..=8u32 {
        for kind in WalkKind::ALL {
            for p in 0..=3u32 {
                let fam = WalkFamily::new(n, kind, p);
                let ws = walks::enumerate_walks(fam)?;
                for z in &zs {
                    let dp = walks::sum_family_dp(fam, z, &a)?;
                    let mut brute = q(0, 1);
                    for w in &ws {
                        brute = brute + walks::walk_weight(w, n, z, &a)?;
                    }
                    ensure(dp.value == brute && dp.term_count == ws.len() as u128, || {
                        format!("{fam:?} at z = {z:?}")
                    })?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} family sums match exactly"))
}

fn random_rational(rng: &mut ChaCha8Rng) -> ExactRational {
    q(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

fn random_complex(rng: &mut ChaCha8Rng) -> ComplexRational {
    ComplexRational::new(random_rational(rng), random_rational(rng))
}

fn criterion_3() -> Result<String> {
    // odd-length loops do not exist
    for n in 1..=12u32 {
        for k in 1..=4u32 {
            for end in [i64::from(n), -i64::from(n)] {
                ensure(walks::enumerate_by_length(n, end, end, 2 * k + 1).is_empty(), || {
                    format!("odd loop found for n = {n}, k = {k}")
                })?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..20 {
        let mut coeffs = Vec::new();
        for m in [2i64, 4, 6] {
            if m == 2 || rng.gen_bool(0.6) {
                let c = random_complex(&mut rng);
                coeffs.push((m, c.clone()));
                coeffs.push((-m, c));
            }
        }
        let v = TrigPotential::from_coeffs(coeffs, ())?;
        let n = rng.gen_range(1..=6u32);
        let z = ComplexRational::new(
            random_rational(&mut rng) * q(1, 20),
            random_rational(&mut rng) * q(1, 20),
        );
        for k in 0..=3u32 {
            let s11 = walks::generic_s(k, SIndex::S11, n, &z, &v)?;
            let s22 = walks::generic_s(k, SIndex::S22, n, &z, &v)?;
            let s12 = walks::generic_s(k, SIndex::S12, n, &z, &v)?;
            let s21 = walks::generic_s(k, SIndex::S21, n, &z, &v)?;
            ensure(s11 == s22, || format!("S11 != S22, trial {trial}, n = {n}, k = {k}"))?;
            ensure(s12 == s21, || format!("S12 != S21, trial {trial}, n = {n}, k = {k}"))?;
        }
    }
    // conjugation for real-valued potentials, in floating point
    let p = prec();
    let tol = BigReal::from_f64(1e-60, p);
    let mut worst = BigReal::zero(p);
    for _ in 0..5 {
        let mut coeffs = Vec::new();
        for m in [2i64, 4] {
            let c = random_complex(&mut rng);
            coeffs.push((-m, c.conj()));
            coeffs.push((m, c));
        }
        let v = TrigPotential::from_coeffs(coeffs, ())?.to_big(p);
        let z = BigComplex::from_f64(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), p);
        for n in 1..=6u32 {
            for k in 0..=3u32 {
                let s12 = walks::generic_s(k, SIndex::S12, n, &z, &v)?;
                let s21 = walks::generic_s(k, SIndex::S21, n, &z.conj(), &v)?;
                let d = (s12 - s21.conj()).abs();
                worst = worst.max_abs(&d);
            }
        }
    }
    ensure(worst <= tol, || format!("conjugation defect {:.3e}", worst.to_f64()))?;
    Ok(format!(
        "no odd loops; 20 even potentials symmetric; conjugation defect {:.1e}",
        worst.to_f64()
    ))
}

fn criterion_4() -> Result<String> {
    let a = amp("1");
    let p = prec();
    let tol = ls_series::default_tol(p);
    let mut worst = 0.0f64;
    for n in 6..=24u32 {
        let s = ls_series::gap_series(n, &a, p, &tol)?;
        let o = matrix_oracle::gap_oracle(n, &a, p)?;
        let diff = (&s.value - &o.gap.value).abs();
        let allowed = &o.gap.radius + &s.bound;
        ensure(diff <= allowed, || {
            format!(
                "n = {n}: |difference| {:.3e} exceeds {:.3e}",
                diff.to_f64(),
                allowed.to_f64()
            )
        })?;
        let frac = diff.checked_div(&allowed).map_or(0.0, |r| r.to_f64());
        worst = worst.max(frac);
    }
    Ok(format!(
        "n in 6..=24; largest difference is {worst:.3} of the allowance"
    ))
}

fn oracle_gap(n: u32, a: &BigComplex) -> Result<BigComplex> {
    Ok(matrix_oracle::gap_oracle(n, a, a.precision())?.gap.value)
}

fn criterion_5() -> Result<String> {
    let mut out = Vec::new();
    for a_str in ["1", "2"] {
        let a = amp(a_str);
        let mut refined = Vec::new();
        let mut raw = Vec::new();
        for n in 8..=24u32 {
            let g = oracle_gap(n, &a)?;
            let ratio = g
                .checked_div(&asymptotics::gap_leading_value(n, &a))
                .ok_or_else(|| fail("zero prediction"))?;
            let r = &ratio - &asymptotics::gap_correction(n, &a);
            refined.push((n, r.abs().to_f64()));
            raw.push((n, (&ratio - &BigComplex::one(prec())).abs().to_f64()));
        }
        let s1 = fit_remainder_order(&refined)?.slope;
        let s0 = fit_remainder_order(&raw)?.slope;
        ensure(s1 <= -3.6, || format!("a = {a_str}: refined slope {s1:.3} > -3.6"))?;
        ensure(s0 <= -2.7, || format!("a = {a_str}: unrefined slope {s0:.3} > -2.7"))?;
        out.push(format!("a = {a_str}: refined {s1:.2}, unrefined {s0:.2}"));
    }
    Ok(out.join("; "))
}

fn criterion_6() -> Result<String> {
    let a = amp("1");
    let p = prec();
    let tol = ls_series::default_tol(p);
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for n in 8..=24u32 {
        let d = ls_series::solve_deviations(n, &a, p, &tol)?;
        let pred = asymptotics::predict_deviation(n, &a).value;
        minus.push((n, (d.z_minus() - &pred).abs().to_f64()));
        plus.push((n, (d.z_plus() - &pred).abs().to_f64()));
    }
    let sm = fit_remainder_order(&minus)?.slope;
    let sp = fit_remainder_order(&plus)?.slope;
    ensure(sm <= -5.5 && sp <= -5.5, || {
        format!("slopes z- {sm:.3}, z+ {sp:.3} above -5.5")
    })?;
    Ok(format!("slopes z- {sm:.2}, z+ {sp:.2} (claimed -6)"))
}

fn criterion_7() -> Result<String> {
    let a = amp("1");
    let p = prec();
    let zero = BigComplex::zero(p);
    let mut phi_pts = Vec::new();
    for n in 8..=64u32 {
        let phi = ls_series::phi(n, &zero, &a)?.value;
        let pred = asymptotics::predict_phi(n, &a).value;
        phi_pts.push((n, (&phi - &pred).abs().to_f64()));
    }
    let s_phi = fit_remainder_order(&phi_pts)?.slope;
    ensure(s_phi <= -3.6, || format!("phi slope {s_phi:.3} > -3.6"))?;

    let tol = ls_series::default_tol(p);
    let mut bm = Vec::new();
    let mut bp = Vec::new();
    for n in 8..=24u32 {
        let d = ls_series::solve_deviations(n, &a, p, &tol)?;
        let s0 = ls_series::sigma0(n, &zero, &a)?;
        let pred = asymptotics::predict_beta_ratio(n, &a).value;
        for (root, pts) in [(&d.minus, &mut bm), (&d.plus, &mut bp)] {
            let r = root
                .beta
                .value
                .checked_div(&s0)
                .ok_or_else(|| fail("sigma_0 vanished"))?;
            pts.push((n, (&r - &pred).abs().to_f64()));
        }
    }
    let sm = fit_remainder_order(&bm)?.slope;
    let sp = fit_remainder_order(&bp)?.slope;
    ensure(sm <= -3.6 && sp <= -3.6, || {
        format!("beta slopes {sm:.3}, {sp:.3} above -3.6")
    })?;
    Ok(format!(
        "phi slope {s_phi:.2} on 8..=64; beta slopes {sm:.2}, {sp:.2} on 8..=24"
    ))
}

fn criterion_8() -> Result<String> {
    let mut worst: f64 = 0.0;
    for a_str in ["0.01", "0.001"] {
        let a = amp(a_str);
        let a_f = a.re.to_f64();
        for n in 1..=3u32 {
            let g = oracle_gap(n, &a)?;
            let ratio = g
                .checked_div(&asymptotics::gap_leading_value(n, &a))
                .ok_or_else(|| fail("zero prediction"))?;
            let dev = (&ratio - &BigComplex::one(prec())).abs().to_f64();
            ensure(dev <= 5.0 * a_f, || {
                format!("n = {n}, a = {a_str}: |ratio - 1| = {dev:.3e}")
            })?;
            worst = worst.max(dev / a_f);
        }
    }
    Ok(format!("largest |ratio - 1| / a = {worst:.3}"))
}

fn criterion_9() -> Result<String> {
    let a = amp("1");
    let p = prec();
    let one = BigReal::one(p);
    let mut closest = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for n in 3..=24u32 {
        let o = matrix_oracle::gap_oracle(n, &a, p)?;
        let n2 = BigComplex::from_int(i64::from(n) * i64::from(n), p);
        for l in [&o.minus, &o.plus] {
            let d = (&l.value - &n2).abs();
            ensure(d < one, || format!("n = {n}: |lambda - n^2| = {}", d.to_f64()))?;
            closest = closest.min(1.0 - d.to_f64());
        }
        let g = &o.gap.value;
        ensure(g.im.is_zero() && !g.re.is_negative() && !g.re.is_zero(), || {
            format!("n = {n}: gap {g} not positive")
        })?;
        let ten_r = &o.gap.radius * &BigReal::from_i64(10, p);
        ensure(g.re > ten_r, || format!("n = {n}: gap not above 10x radius"))?;
        let ratio = g.re.checked_div(&o.gap.radius).map_or(f64::INFINITY, |r| r.to_f64());
        margin = margin.min(ratio);
    }
    Ok(format!(
        "all inside the unit discs (min slack {closest:.3}); gap/radius >= {margin:.2e}"
    ))
}

fn criterion_10() -> Result<String> {
    let a = amp("i");
    let p = prec();
    let tol = ls_series::default_tol(p);
    let mut pts = Vec::new();
    for n in 8..=16u32 {
        let s = ls_series::gap_series(n, &a, p, &tol)?;
        let o = matrix_oracle::gap_oracle(n, &a, p)?;
        let diff = (&s.value - &o.gap.value).abs();
        let allowed = &o.gap.radius + &s.bound;
        ensure(diff <= allowed, || {
            format!("n = {n}: |difference| {:.3e} exceeds {:.3e}", diff.to_f64(), allowed.to_f64())
        })?;
        let lead = asymptotics::gap_leading_value(n, &a);
        let ratio = o.gap.value.checked_div(&lead).ok_or_else(|| fail("zero prediction"))?;
        let corr = asymptotics::gap_correction(n, &a);
        let r = (ratio.abs() - corr.abs()).abs();
        pts.push((n, r.to_f64()));
    }
    let slope = fit_remainder_order(&pts)?.slope;
    ensure(slope <= -3.6, || format!("|ratio| remainder slope {slope:.3} > -3.6"))?;
    Ok(format!("gaps agree for n in 8..=16; |ratio| remainder slope {slope:.2}"))
}

// ---- module examples -------------------------------------------------------

fn series_examples() -> Result<String> {
    let p = prec();
    let tol = ls_series::default_tol(p);
    let d = ls_series::solve_deviations(10, &amp("1"), p, &tol)?;
    let z = d.z_plus().re.to_f64();
    ensure((z - 0.00505).abs() < 5e-6, || format!("z_10 = {z}"))?;
    let g = ls_series::gap_series(5, &amp("1"), p, &tol)?.value.re.to_f64();
    ensure((g / 1.352_215_881_468_799_3e-5 - 1.0).abs() < 1e-12, || format!("gamma_5 = {g}"))?;
    let e = ls_series::gap_series(2, &amp("1"), p, &tol).unwrap_err();
    ensure(matches!(e, Error::OutsideRegime(_)), || format!("n = 2 gave {e}"))?;
    Ok(format!("z_10 = {z:.6}, gamma_5 = {g:.6e}, n = 2 rejected"))
}

fn oracle_examples() -> Result<String> {
    let p = prec();
    let g = oracle_gap(5, &amp("1"))?.re.to_f64();
    ensure((g / 1.352_215_881_468_799_3e-5 - 1.0).abs() < 1e-12, || format!("gamma_5 = {g}"))?;
    let a = BigReal::from_f64(1.3, p);
    for parity in [Parity::Periodic, Parity::Antiperiodic] {
        let full = TruncatedProblem::new(parity, a.clone(), 10).matrix();
        let blocks = SplitKind::for_parity(parity).map(|s| matrix_oracle::split_matrix(s, &a, 10));
        for i in 0..200 {
            let x = BigReal::from_f64(-5.0 + 2.1 * f64::from(i), p);
            let full_count = matrix_oracle::sturm_count(&full, &x);
            let split_count =
                matrix_oracle::sturm_count(&blocks[0], &x) + matrix_oracle::sturm_count(&blocks[1], &x);
            ensure(full_count == split_count, || format!("{parity:?}: counts differ at {}", x.to_f64()))?;
        }
    }
    Ok(format!("gamma_5 = {g:.6e}; split blocks reproduce the full spectrum"))
}

fn asymptotics_examples() -> Result<String> {
    let h = asymptotics::harmonic(5, prec());
    ensure(h.exact == q(137, 60), || "H_5".into())?;
    let pts: Vec<(u32, f64)> = (10..=80)
        .step_by(10)
        .map(|n| {
            let h = asymptotics::harmonic(n, prec());
            let e = BigReal::from_ratio(h.exact.as_ratio(), prec()) - h.asymptotic;
            (n, e.to_f64())
        })
        .collect();
    let sh = fit_remainder_order(&pts)?.slope;
    ensure((sh + 4.0).abs() < 0.1, || format!("harmonic slope {sh}"))?;
    let synth: Vec<(u32, f64)> = (8..=64)
        .map(|n| (n, (3.0 + if n % 2 == 0 { 1.0 } else { -1.0 }) * f64::from(n).powi(-4)))
        .collect();
    let ss = fit_remainder_order(&synth)?.slope;
    ensure((ss + 4.0).abs() < 0.1, || format!("synthetic slope {ss}"))?;
    Ok(format!("harmonic slope {sh:.3}, synthetic slope {ss:.3}"))
}

fn phi_decomposition() -> Result<String> {
    for n in 3..=16u32 {
        let a = q(5, 3);
        let phi = asymptotics::phi_at_zero_exact(n, &a)?;
        let scale = q(16 * i64::from(n * n), 1) * (a.clone() * a.clone()).recip().expect("a != 0");
        let total = asymptotics::d_terms(n)
            .into_iter()
            .fold(q(0, 1), |s, d| s + d);
        ensure(phi * scale == total, || format!("n = {n}"))?;
    }
    Ok("16 n^2 Phi(n,0)/a^2 equals the four partial-fraction sums for n in 3..=16".into())
}
