//! Per-`n` result rows and their CSV / JSON forms.
//!
//! Every number is written as a decimal string carrying enough digits to
//! round back to the identical binary value at the recorded precision.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ls_series::Branch;
use crate::numeric::{BigComplex, BigReal, Precision};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// `json` for a `.json` extension, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

/// Wall-clock milliseconds per method. Only persisted on request.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub series_ms: Option<f64>,
    pub oracle_ms: Option<f64>,
}

/// One row of a sweep. Fields belonging to a method that was not run, or
/// that failed, are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub n: u32,
    pub a: BigComplex,
    pub bits: u32,
    pub z_minus: Option<BigComplex>,
    pub z_plus: Option<BigComplex>,
    pub gamma_series: Option<BigComplex>,
    /// Error bound of the series gap.
    pub series_bound: Option<BigReal>,
    pub gamma_oracle: Option<BigComplex>,
    /// Oracle enclosure radius.
    pub enclosure: Option<BigReal>,
    pub prediction_leading: Option<BigComplex>,
    pub prediction_refined: Option<BigComplex>,
    /// Gap over the leading prediction (oracle gap when available).
    pub ratio: Option<BigComplex>,
    /// `ratio - (1 - a²/4n³)`.
    pub remainder_refined: Option<BigComplex>,
    pub branch_map: Option<(Branch, Branch)>,
    pub series_error: Option<String>,
    pub oracle_error: Option<String>,
    pub timings: Option<Timings>,
}

impl GapReport {
    pub fn empty(n: u32, a: BigComplex) -> Self {
        GapReport {
            n,
            bits: a.precision().bits(),
            a,
            z_minus: None,
            z_plus: None,
            gamma_series: None,
            series_bound: None,
            gamma_oracle: None,
            enclosure: None,
            prediction_leading: None,
            prediction_refined: None,
            ratio: None,
            remainder_refined: None,
            branch_map: None,
            series_error: None,
            oracle_error: None,
            timings: None,
        }
    }

    pub fn precision(&self) -> Precision {
        self.a.precision()
    }

    /// The gap used for ratios: oracle first, then series.
    pub fn gamma(&self) -> Option<&BigComplex> {
        self.gamma_oracle.as_ref().or(self.gamma_series.as_ref())
    }

    /// True when no selected method produced a gap.
    pub fn failed(&self) -> bool {
        self.gamma().is_none()
    }
}

fn real_str(x: &BigReal) -> String {
    x.to_exact_string()
}

fn parse_real(s: &str, prec: Precision) -> Result<BigReal> {
    crate::numeric::parse_real(s, prec)
}

fn parse_branch(s: &str) -> Result<(Branch, Branch)> {
    let one = |t: &str| match t.trim() {
        "E1" => Ok(Branch::E1),
        "E2" => Ok(Branch::E2),
        other => Err(Error::Parse(format!("unknown branch {other:?}"))),
    };
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("branch map {s:?} needs two entries")))?;
    Ok((one(x)?, one(y)?))
}

fn branch_str(b: (Branch, Branch)) -> String {
    format!("{},{}", b.0, b.1)
}

// ---- CSV ----------------------------------------------------------------

#[derive(Serialize, Deserialize, Default)]
struct CsvRow {
    n: u32,
    bits: u32,
    a_re: String,
    a_im: String,
    z_minus_re: Option<String>,
    z_minus_im: Option<String>,
    z_plus_re: Option<String>,
    z_plus_im: Option<String>,
    gamma_series_re: Option<String>,
    gamma_series_im: Option<String>,
    series_bound: Option<String>,
    gamma_oracle_re: Option<String>,
    gamma_oracle_im: Option<String>,
    enclosure: Option<String>,
    prediction_leading_re: Option<String>,
    prediction_leading_im: Option<String>,
    prediction_refined_re: Option<String>,
    prediction_refined_im: Option<String>,
    ratio_re: Option<String>,
    ratio_im: Option<String>,
    remainder_refined_re: Option<String>,
    remainder_refined_im: Option<String>,
    branch_map: Option<String>,
    series_error: Option<String>,
    oracle_error: Option<String>,
    series_ms: Option<f64>,
    oracle_ms: Option<f64>,
}

fn split(c: &Option<BigComplex>) -> (Option<String>, Option<String>) {
    match c {
        Some(c) => (Some(real_str(&c.re)), Some(real_str(&c.im))),
        None => (None, None),
    }
}

fn join(re: &Option<String>, im: &Option<String>, prec: Precision) -> Result<Option<BigComplex>> {
    match (re, im) {
        (Some(r), Some(i)) => Ok(Some(BigComplex::new(parse_real(r, prec)?, parse_real(i, prec)?))),
        (None, None) => Ok(None),
        _ => Err(Error::Parse("complex column with only one part".into())),
    }
}

fn opt_real(s: &Option<String>, prec: Precision) -> Result<Option<BigReal>> {
    s.as_deref().map(|t| parse_real(t, prec)).transpose()
}

impl From<&GapReport> for CsvRow {
    fn from(r: &GapReport) -> Self {
        let (z_minus_re, z_minus_im) = split(&r.z_minus);
        let (z_plus_re, z_plus_im) = split(&r.z_plus);
        let (gamma_series_re, gamma_series_im) = split(&r.gamma_series);
        let (gamma_oracle_re, gamma_oracle_im) = split(&r.gamma_oracle);
        let (prediction_leading_re, prediction_leading_im) = split(&r.prediction_leading);
        let (prediction_refined_re, prediction_refined_im) = split(&r.prediction_refined);
        let (ratio_re, ratio_im) = split(&r.ratio);
        let (remainder_refined_re, remainder_refined_im) = split(&r.remainder_refined);
        let t = r.timings.clone().unwrap_or_default();
        CsvRow {
            n: r.n,
            bits: r.bits,
            a_re: real_str(&r.a.re),
            a_im: real_str(&r.a.im),
            z_minus_re,
            z_minus_im,
            z_plus_re,
            z_plus_im,
            gamma_series_re,
            gamma_series_im,
            series_bound: r.series_bound.as_ref().map(real_str),
            gamma_oracle_re,
            gamma_oracle_im,
            enclosure: r.enclosure.as_ref().map(real_str),
            prediction_leading_re,
            prediction_leading_im,
            prediction_refined_re,
            prediction_refined_im,
            ratio_re,
            ratio_im,
            remainder_refined_re,
            remainder_refined_im,
            branch_map: r.branch_map.map(branch_str),
            series_error: r.series_error.clone(),
            oracle_error: r.oracle_error.clone(),
            series_ms: t.series_ms,
            oracle_ms: t.oracle_ms,
        }
    }
}

impl CsvRow {
    fn into_report(self) -> Result<GapReport> {
        let prec = Precision::new(self.bits)?;
        let a = BigComplex::new(parse_real(&self.a_re, prec)?, parse_real(&self.a_im, prec)?);
        let timings = match (self.series_ms, self.oracle_ms) {
            (None, None) => None,
            (s, o) => Some(Timings { series_ms: s, oracle_ms: o }),
        };
        Ok(GapReport {
            n: self.n,
            bits: self.bits,
            a,
            z_minus: join(&self.z_minus_re, &self.z_minus_im, prec)?,
            z_plus: join(&self.z_plus_re, &self.z_plus_im, prec)?,
            gamma_series: join(&self.gamma_series_re, &self.gamma_series_im, prec)?,
            series_bound: opt_real(&self.series_bound, prec)?,
            gamma_oracle: join(&self.gamma_oracle_re, &self.gamma_oracle_im, prec)?,
            enclosure: opt_real(&self.enclosure, prec)?,
            prediction_leading: join(&self.prediction_leading_re, &self.prediction_leading_im, prec)?,
            prediction_refined: join(&self.prediction_refined_re, &self.prediction_refined_im, prec)?,
            ratio: join(&self.ratio_re, &self.ratio_im, prec)?,
            remainder_refined: join(&self.remainder_refined_re, &self.remainder_refined_im, prec)?,
            branch_map: self.branch_map.as_deref().map(parse_branch).transpose()?,
            series_error: self.series_error,
            oracle_error: self.oracle_error,
            timings,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

pub fn write_csv<W: Write>(reports: &[GapReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(CsvRow::from(r)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<GapReport>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize::<CsvRow>()
        .map(|row| row.map_err(csv_err)?.into_report())
        .collect()
}

// ---- JSON ---------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
struct JsonComplex {
    re: String,
    im: String,
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    n: u32,
    bits: u32,
    a: JsonComplex,
    z_minus: Option<JsonComplex>,
    z_plus: Option<JsonComplex>,
    gamma_series: Option<JsonComplex>,
    series_bound: Option<String>,
    gamma_oracle: Option<JsonComplex>,
    enclosure: Option<String>,
    prediction_leading: Option<JsonComplex>,
    prediction_refined: Option<JsonComplex>,
    ratio: Option<JsonComplex>,
    remainder_refined: Option<JsonComplex>,
    branch_map: Option<[Branch; 2]>,
    series_error: Option<String>,
    oracle_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
}

#[derive(Serialize, Deserialize)]
struct JsonFile {
    rows: Vec<JsonRow>,
}

fn jc(c: &BigComplex) -> JsonComplex {
    JsonComplex {
        re: real_str(&c.re),
        im: real_str(&c.im),
    }
}

fn from_jc(c: &JsonComplex, prec: Precision) -> Result<BigComplex> {
    Ok(BigComplex::new(parse_real(&c.re, prec)?, parse_real(&c.im, prec)?))
}

fn opt_jc(c: &Option<JsonComplex>, prec: Precision) -> Result<Option<BigComplex>> {
    c.as_ref().map(|c| from_jc(c, prec)).transpose()
}

impl From<&GapReport> for JsonRow {
    fn from(r: &GapReport) -> Self {
        JsonRow {
            n: r.n,
            bits: r.bits,
            a: jc(&r.a),
            z_minus: r.z_minus.as_ref().map(jc),
            z_plus: r.z_plus.as_ref().map(jc),
            gamma_series: r.gamma_series.as_ref().map(jc),
            series_bound: r.series_bound.as_ref().map(real_str),
            gamma_oracle: r.gamma_oracle.as_ref().map(jc),
            enclosure: r.enclosure.as_ref().map(real_str),
            prediction_leading: r.prediction_leading.as_ref().map(jc),
            prediction_refined: r.prediction_refined.as_ref().map(jc),
            ratio: r.ratio.as_ref().map(jc),
            remainder_refined: r.remainder_refined.as_ref().map(jc),
            branch_map: r.branch_map.map(|(x, y)| [x, y]),
            series_error: r.series_error.clone(),
            oracle_error: r.oracle_error.clone(),
            timings: r.timings.clone(),
        }
    }
}

impl JsonRow {
    fn into_report(self) -> Result<GapReport> {
        let prec = Precision::new(self.bits)?;
        Ok(GapReport {
            n: self.n,
            bits: self.bits,
            a: from_jc(&self.a, prec)?,
            z_minus: opt_jc(&self.z_minus, prec)?,
            z_plus: opt_jc(&self.z_plus, prec)?,
            gamma_series: opt_jc(&self.gamma_series, prec)?,
            series_bound: opt_real(&self.series_bound, prec)?,
            gamma_oracle: opt_jc(&self.gamma_oracle, prec)?,
            enclosure: opt_real(&self.enclosure, prec)?,
            prediction_leading: opt_jc(&self.prediction_leading, prec)?,
            prediction_refined: opt_jc(&self.prediction_refined, prec)?,
            ratio: opt_jc(&self.ratio, prec)?,
            remainder_refined: opt_jc(&self.remainder_refined, prec)?,
            branch_map: self.branch_map.map(|[x, y]| (x, y)),
            series_error: self.series_error,
            oracle_error: self.oracle_error,
            timings: self.timings,
        })
    }
}

pub fn write_json<W: Write>(reports: &[GapReport], mut out: W) -> Result<()> {
    let file = JsonFile {
        rows: reports.iter().map(JsonRow::from).collect(),
    };
    serde_json::to_writer_pretty(&mut out, &file).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<GapReport>> {
    let file: JsonFile =
        serde_json::from_reader(input).map_err(|e| Error::Parse(format!("json: {e}")))?;
    file.rows.into_iter().map(JsonRow::into_report).collect()
}

pub fn write_reports(reports: &[GapReport], path: &Path, format: OutputFormat) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let w = BufWriter::new(f);
    match format {
        OutputFormat::Csv => write_csv(reports, w),
        OutputFormat::Json => write_json(reports, w),
    }
}

/// Reads a report file, choosing the format from the extension.
pub fn read_reports(path: &Path) -> Result<Vec<GapReport>> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let r = BufReader::new(f);
    match OutputFormat::from_path(path) {
        OutputFormat::Csv => read_csv(r),
        OutputFormat::Json => read_json(r),
    }
}
