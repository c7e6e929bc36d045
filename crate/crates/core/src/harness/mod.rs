//! Experiment runner behind the `mg` binary: sweeps over `n`, remainder
//! fits on saved tables and the verification suites.

pub mod checks;
pub mod report;

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, fit_remainder_order, SlopeFit};
use crate::error::{Error, Result};
use crate::ls_series;
use crate::matrix_oracle;
use crate::numeric::{
    parse_complex_rational, BigComplex, BigReal, ComplexRational, Precision, Scalar,
};
use crate::potential::TrigPotential;
use crate::walks::{self, SIndex, WalkKind};

pub use checks::{verify, CheckResult, Suite, VerifySummary};
pub use report::{read_reports, write_reports, GapReport, OutputFormat, Timings};

/// Precision used when neither a flag nor `MG_DEFAULT_BITS` says otherwise.
pub const DEFAULT_BITS: u32 = 256;
pub const BITS_ENV: &str = "MG_DEFAULT_BITS";

/// `MG_DEFAULT_BITS` if set, else 256.
pub fn default_bits() -> Result<u32> {
    match std::env::var(BITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{BITS_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_BITS),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Oracle,
}

/// Inclusive range of `n`, written `[lo, hi]` in config files.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange(pub u32, pub u32);

impl NRange {
    /// `"7"`, `"6..24"` or `"6..=24"`; both ends inclusive.
    pub fn parse(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad n range {s:?}")))
        };
        match s.split_once("..") {
            Some((lo, hi)) => Ok(NRange(num(lo)?, num(hi.trim_start_matches('='))?)),
            None => {
                let n = num(s)?;
                Ok(NRange(n, n))
            }
        }
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        self.0..=self.1
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.0, self.1)
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::Series, Method::Oracle]
}

fn default_bits_serde() -> u32 {
    default_bits().unwrap_or(DEFAULT_BITS)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Complex amplitude literal such as `"1"`, `"2i"` or `"0.5-0.1i"`.
    pub a: String,
    pub n_range: NRange,
    #[serde(default = "default_bits_serde")]
    pub precision_bits: u32,
    /// Relative tolerance for the series solver; defaults to `2^(-bits/2)`.
    #[serde(default)]
    pub tol: Option<String>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: Option<OutputFormat>,
    #[serde(default)]
    pub record_timings: bool,
}

impl RunConfig {
    pub fn new(a: &str, n_range: NRange) -> Self {
        RunConfig {
            a: a.to_string(),
            n_range,
            precision_bits: default_bits_serde(),
            tol: None,
            methods: default_methods(),
            output_path: None,
            output_format: None,
            record_timings: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_range.0 == 0 || self.n_range.0 > self.n_range.1 {
            return Err(Error::Config(format!(
                "n range {} must be nonempty and start at 1 or above",
                self.n_range
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("select at least one method".into()));
        }
        self.precision()?;
        if self.amplitude()?.is_zero() {
            return Err(Error::ZeroAmplitude);
        }
        self.tolerance()?;
        Ok(())
    }

    pub fn precision(&self) -> Result<Precision> {
        Precision::new(self.precision_bits)
    }

    pub fn amplitude(&self) -> Result<BigComplex> {
        BigComplex::parse(&self.a, self.precision()?)
    }

    pub fn tolerance(&self) -> Result<BigReal> {
        let prec = self.precision()?;
        match &self.tol {
            None => Ok(ls_series::default_tol(prec)),
            Some(t) => {
                let v = BigReal::parse(t, prec)?;
                if v.is_negative() || v.is_zero() {
                    return Err(Error::Config(format!("tolerance {t} must be positive")));
                }
                Ok(v)
            }
        }
    }

    pub fn format(&self) -> OutputFormat {
        self.output_format.unwrap_or_else(|| {
            self.output_path
                .as_deref()
                .map(OutputFormat::from_path)
                .unwrap_or(OutputFormat::Csv)
        })
    }

    fn uses(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

/// Computes one row. Failures of either method are recorded in the row.
pub fn compute_row(n: u32, a: &BigComplex, tol: &BigReal, methods: &[Method], timings: bool) -> GapReport {
    let prec = a.precision();
    let mut row = GapReport::empty(n, a.clone());
    let lead = asymptotics::predict_gap_leading(n, a).value;
    row.prediction_refined = Some(asymptotics::predict_gap_refined(n, a).value);
    let mut t = Timings::default();

    if methods.contains(&Method::Series) {
        let start = Instant::now();
        match ls_series::gap_series(n, a, prec, tol) {
            Ok(g) => {
                row.z_minus = Some(g.pair.z_minus().clone());
                row.z_plus = Some(g.pair.z_plus().clone());
                row.branch_map = Some(g.pair.branch_map());
                row.gamma_series = Some(g.value);
                row.series_bound = Some(g.bound);
            }
            Err(e) => row.series_error = Some(e.to_string()),
        }
        t.series_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    if methods.contains(&Method::Oracle) {
        let start = Instant::now();
        match matrix_oracle::gap_oracle(n, a, prec) {
            Ok(g) => {
                if row.z_minus.is_none() {
                    let n2 = BigComplex::from_int(i64::from(n) * i64::from(n), prec);
                    row.z_minus = Some(&g.minus.value - &n2);
                    row.z_plus = Some(&g.plus.value - &n2);
                }
                row.gamma_oracle = Some(g.gap.value);
                row.enclosure = Some(g.gap.radius);
            }
            Err(e) => row.oracle_error = Some(e.to_string()),
        }
        t.oracle_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    if let Some(g) = row.gamma() {
        if let Some(r) = g.checked_div(&lead) {
            row.remainder_refined = Some(&r - &asymptotics::gap_correction(n, a));
            row.ratio = Some(r);
        }
    }
    row.prediction_leading = Some(lead);
    if timings {
        row.timings = Some(t);
    }
    row
}

/// One row per `n`, in order, computed in parallel. Writes the table when
/// the config names an output path.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<GapReport>> {
    config.validate()?;
    let a = config.amplitude()?;
    let tol = config.tolerance()?;
    let methods: Vec<Method> = [Method::Series, Method::Oracle]
        .into_iter()
        .filter(|m| config.uses(*m))
        .collect();
    let ns: Vec<u32> = config.n_range.iter().collect();
    let rows: Vec<GapReport> = ns
        .par_iter()
        .map(|&n| compute_row(n, &a, &tol, &methods, config.record_timings))
        .collect();
    if rows.iter().all(GapReport::failed) {
        return Err(Error::InsufficientData(format!(
            "no gap computed for n in {}; first error: {}",
            config.n_range,
            rows[0]
                .series_error
                .as_deref()
                .or(rows[0].oracle_error.as_deref())
                .unwrap_or("none")
        )));
    }
    if let Some(path) = &config.output_path {
        write_reports(&rows, path, config.format())?;
    }
    Ok(rows)
}

/// Remainders that can be fitted from a saved table.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitTarget {
    GapRefined,
    Deviation,
    Beta,
    Phi,
    Sigma0,
}

impl FitTarget {
    pub const ALL: [FitTarget; 5] = [
        FitTarget::GapRefined,
        FitTarget::Deviation,
        FitTarget::Beta,
        FitTarget::Phi,
        FitTarget::Sigma0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitTarget::GapRefined => "gap_refined",
            FitTarget::Deviation => "deviation",
            FitTarget::Beta => "beta",
            FitTarget::Phi => "phi",
            FitTarget::Sigma0 => "sigma0",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown fit target {s:?}")))
    }

    /// Decay order claimed for the remainder.
    pub fn claimed_order(self) -> u32 {
        match self {
            FitTarget::Deviation => 6,
            _ => 4,
        }
    }

    /// `|remainder|` for one row, or `None` if the row lacks the inputs.
    pub fn remainder(self, row: &GapReport) -> Result<Option<f64>> {
        let n = row.n;
        let a = &row.a;
        let both = |f: &dyn Fn(&BigComplex) -> Result<BigReal>| -> Result<Option<f64>> {
            match (&row.z_minus, &row.z_plus) {
                (Some(m), Some(p)) => Ok(Some(f(m)?.max_abs(&f(p)?).to_f64())),
                _ => Ok(None),
            }
        };
        match self {
            FitTarget::GapRefined => {
                // the overall sign of a complex gap is a labelling choice, so
                // measure against whichever of ±(1 - a²/4n³) is nearer
                let Some(ratio) = &row.ratio else {
                    // tables written by other tools may carry only the remainder
                    return Ok(row.remainder_refined.as_ref().map(|r| r.abs().to_f64()));
                };
                let corr = asymptotics::gap_correction(n, a);
                let r = (ratio - &corr).abs().min((ratio + &corr).abs());
                Ok(Some(r.to_f64()))
            }
            FitTarget::Deviation => {
                let pred = asymptotics::predict_deviation(n, a).value;
                both(&|z| Ok((z - &pred).abs()))
            }
            FitTarget::Phi => {
                if n < 3 {
                    return Ok(None);
                }
                let zero = BigComplex::zero(a.precision());
                let phi = ls_series::phi(n, &zero, a)?.value;
                Ok(Some((&phi - &asymptotics::predict_phi(n, a).value).abs().to_f64()))
            }
            FitTarget::Beta => {
                let zero = BigComplex::zero(a.precision());
                let s0 = ls_series::sigma0(n, &zero, a)?;
                let pred = asymptotics::predict_beta_ratio(n, a).value;
                let tol = ls_series::default_tol(a.precision());
                both(&|z| {
                    let b = ls_series::beta(n, z, a, &tol)?.value;
                    let r = b.checked_div(&s0).ok_or(Error::ZeroAmplitude)?;
                    Ok((&r - &pred).abs())
                })
            }
            FitTarget::Sigma0 => {
                let zero = BigComplex::zero(a.precision());
                let s0 = ls_series::sigma0(n, &zero, a)?;
                let pred = asymptotics::predict_sigma0_ratio(n, a).value;
                both(&|z| {
                    let r = ls_series::sigma0(n, z, a)?
                        .checked_div(&s0)
                        .ok_or(Error::ZeroAmplitude)?;
                    Ok((&r - &pred).abs())
                })
            }
        }
    }
}

impl fmt::Display for FitTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target: FitTarget,
    pub fit: SlopeFit,
    pub claimed_slope: f64,
    /// Rows below the contraction threshold or without the inputs this
    /// target needs.
    pub skipped: Vec<u32>,
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: fitted slope {:.3} vs claimed {:.0} ({} points",
            self.target, self.fit.slope, self.claimed_slope, self.fit.points_used
        )?;
        if !self.fit.dropped.is_empty() {
            write!(f, "; zero remainder dropped at n = {:?}", self.fit.dropped)?;
        }
        if !self.skipped.is_empty() {
            write!(f, "; rows skipped at n = {:?}", self.skipped)?;
        }
        f.write_str(")")
    }
}

pub fn fit_reports(rows: &[GapReport], target: FitTarget) -> Result<FitReport> {
    let mut pts = Vec::new();
    let mut skipped = Vec::new();
    for r in rows {
        // the claims are asymptotic; rows where the series map does not
        // contract are below the regime
        if ls_series::contraction_constant(r.n, &r.a).is_err() {
            skipped.push(r.n);
            continue;
        }
        match target.remainder(r) {
            Ok(Some(v)) => pts.push((r.n, v)),
            _ => skipped.push(r.n),
        }
    }
    let fit = fit_remainder_order(&pts)?;
    Ok(FitReport {
        target,
        claimed_slope: -f64::from(target.claimed_order()),
        fit,
        skipped,
    })
}

pub fn fit_file(path: &std::path::Path, target: FitTarget) -> Result<FitReport> {
    fit_reports(&read_reports(path)?, target)
}

/// Walk families addressable from the command line.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `A_k(n, z)`, loop terms of alpha.
    Alpha,
    /// `sigma_p(n, z)`, crossing terms of beta.
    Sigma,
    /// `S_k^{ij}(n, z)` for the Mathieu potential.
    S(SIndex),
}

/// Evaluates one series term, exactly when `exact` is set.
pub fn series_term(
    family: Family,
    index: u32,
    n: u32,
    z: &str,
    a: &str,
    exact: bool,
    prec: Precision,
) -> Result<String> {
    if exact {
        let z = parse_complex_rational(z)?;
        let a = parse_complex_rational(a)?;
        let v = term::<ComplexRational>(family, index, n, &z, &a)?;
        Ok(v.to_string())
    } else {
        let z = BigComplex::parse(z, prec)?;
        let a = BigComplex::parse(a, prec)?;
        let v = term::<BigComplex>(family, index, n, &z, &a)?;
        Ok(v.to_string())
    }
}

fn term<S: Scalar>(family: Family, index: u32, n: u32, z: &S, a: &S) -> Result<S> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    match family {
        Family::Alpha => walks::alpha_term(n, index, z, a),
        Family::Sigma => {
            let s = walks::crossing_sums(n, WalkKind::CrossingUp, z, a, index)?;
            Ok(s[index as usize].clone())
        }
        Family::S(ij) => {
            let v = TrigPotential::mathieu(a.clone())?;
            walks::generic_s(index, ij, n, z, &v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(NRange::parse("6..24").unwrap(), NRange(6, 24));
        assert_eq!(NRange::parse("6..=24").unwrap(), NRange(6, 24));
        assert_eq!(NRange::parse("5").unwrap(), NRange(5, 5));
        assert!(NRange::parse("x..3").is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new("1", NRange(6, 8));
        c.precision_bits = 128;
        assert!(c.validate().is_ok());
        c.methods.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = RunConfig::new("0", NRange(6, 8));
        c.precision_bits = 128;
        assert_eq!(c.validate(), Err(Error::ZeroAmplitude));
        let mut c = RunConfig::new("1", NRange(9, 8));
        c.precision_bits = 128;
        assert!(c.validate().is_err());
        c.n_range = NRange(3, 4);
        c.precision_bits = 32;
        assert_eq!(c.validate(), Err(Error::PrecisionTooLow(32)));
    }

    #[test]
    fn config_json() {
        let c = RunConfig::from_json(
            r#"{"a": "2i", "n_range": [8, 16], "precision_bits": 192, "methods": ["oracle"]}"#,
        )
        .unwrap();
        assert_eq!(c.n_range, NRange(8, 16));
        assert_eq!(c.methods, vec![Method::Oracle]);
        assert_eq!(c.format(), OutputFormat::Csv);
        assert!(RunConfig::from_json(r#"{"a": "1", "n_range": [1, 2], "bogus": 1}"#).is_err());
    }

    #[test]
    fn small_n_rows_record_regime_failures() {
        let mut c = RunConfig::new("1", NRange(2, 3));
        c.precision_bits = 128;
        c.methods = vec![Method::Series];
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows.len(), 2);
        let row = &rows[0];
        assert!(row.series_error.as_ref().unwrap().contains("outside asymptotic regime"));
        assert!(row.gamma_series.is_none() && row.ratio.is_none());
        assert!(row.gamma_oracle.is_none() && row.enclosure.is_none());
        assert!(rows[1].gamma_series.is_some());
        c.n_range = NRange(2, 2);
        assert!(matches!(run_sweep(&c), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn small_amplitude_ratios() {
        let mut c = RunConfig::new("0.01", NRange(1, 4));
        c.precision_bits = 128;
        c.methods = vec![Method::Oracle];
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            let ratio = r.ratio.as_ref().unwrap().re.to_f64();
            assert!((ratio - 1.0).abs() <= 5.0 * 0.01, "n={} ratio={ratio}", r.n);
            assert!(r.gamma_series.is_none());
        }
    }

    #[test]
    fn series_terms_from_strings() {
        let p = Precision::new(128).unwrap();
        let s = series_term(Family::Sigma, 0, 5, "0", "1", true, p).unwrap();
        assert_eq!(s, "1/147456");
        let s = series_term(Family::Alpha, 3, 3, "0", "1", true, p).unwrap();
        assert_eq!(s, "19/10240");
        let s = series_term(Family::S(SIndex::S11), 1, 3, "0", "1", true, p).unwrap();
        assert_eq!(s, "1/16");
        let approx = series_term(Family::Sigma, 0, 5, "0", "1", false, p).unwrap();
        assert!(approx.starts_with("6.78168"), "{approx}");
        assert!(series_term(Family::Sigma, 0, 3, "9", "1", true, p).is_err());
    }
}
