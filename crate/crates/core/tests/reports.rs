use mathieu_gaps::harness::{
    self, report, FitTarget, GapReport, Method, NRange, OutputFormat, RunConfig,
};
use mathieu_gaps::ls_series::Branch;
use mathieu_gaps::numeric::{BigComplex, BigReal, Precision};
use proptest::prelude::*;

fn config(a: &str, lo: u32, hi: u32, bits: u32) -> RunConfig {
    let mut c = RunConfig::new(a, NRange(lo, hi));
    c.precision_bits = bits;
    c
}

fn roundtrip(rows: &[GapReport], format: OutputFormat) -> Vec<GapReport> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => report::write_csv(rows, &mut buf).unwrap(),
        OutputFormat::Json => report::write_json(rows, &mut buf).unwrap(),
    }
    match format {
        OutputFormat::Csv => report::read_csv(buf.as_slice()).unwrap(),
        OutputFormat::Json => report::read_json(buf.as_slice()).unwrap(),
    }
}

#[test]
fn cross_method_sweep_agrees_row_by_row() {
    let rows = harness::run_sweep(&config("1", 6, 24, 256)).unwrap();
    assert_eq!(rows.len(), 19);
    for r in &rows {
        let s = r.gamma_series.as_ref().unwrap();
        let o = r.gamma_oracle.as_ref().unwrap();
        let allowed = r.enclosure.as_ref().unwrap() + r.series_bound.as_ref().unwrap();
        assert!((s - o).abs() <= allowed, "n = {}", r.n);
        assert!(r.branch_map.is_some());
        assert!(r.timings.is_none());
    }
    for f in [OutputFormat::Csv, OutputFormat::Json] {
        assert_eq!(roundtrip(&rows, f), rows);
    }
    let g = harness::fit_reports(&rows[2..], FitTarget::GapRefined).unwrap();
    assert!(g.fit.slope <= -3.6, "{g}");
    let d = harness::fit_reports(&rows[2..], FitTarget::Deviation).unwrap();
    assert!(d.fit.slope <= -5.5, "{d}");
    let b = harness::fit_reports(&rows[2..], FitTarget::Beta).unwrap();
    assert!(b.fit.slope <= -3.6, "{b}");
    let p = harness::fit_reports(&rows[2..], FitTarget::Phi).unwrap();
    assert!(p.fit.slope <= -3.6, "{p}");
    // the sigma_0 shift is still pre-asymptotic here; only its size is checked
    for r in &rows[2..] {
        let v = FitTarget::Sigma0.remainder(r).unwrap().unwrap();
        assert!(v * f64::from(r.n).powi(4) < 2.0, "n = {}: {v}", r.n);
    }
}

#[test]
fn complex_gap_fit_ignores_the_overall_sign() {
    let mut c = config("2i", 8, 20, 256);
    c.methods = vec![Method::Oracle];
    let rows = harness::run_sweep(&c).unwrap();
    // the signed ratio flips between +1 and -1 with n
    assert!(rows.iter().any(|r| r.ratio.as_ref().unwrap().re.is_negative()));
    let fit = harness::fit_reports(&rows, FitTarget::GapRefined).unwrap();
    assert!(fit.fit.slope <= -3.6, "{fit}");
}

#[test]
fn unselected_methods_are_null_in_both_formats() {
    let mut c = config("0.5", 4, 6, 128);
    c.methods = vec![Method::Oracle];
    let rows = harness::run_sweep(&c).unwrap();
    let mut csv = Vec::new();
    report::write_csv(&rows, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "gamma_series_re").unwrap();
    assert_eq!(first[col], "");
    let mut js = Vec::new();
    report::write_json(&rows, &mut js).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
    assert!(v["rows"][0]["gamma_series"].is_null());
    assert!(v["rows"][0]["gamma_oracle"]["re"].is_string());
    assert_eq!(v["rows"][0]["bits"], 128);
}

#[test]
fn identical_configs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for ext in ["csv", "json"] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let mut c = config("2i", 8, 11, 192);
            let path = dir.path().join(format!("run{run}.{ext}"));
            c.output_path = Some(path.clone());
            harness::run_sweep(&c).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
            assert_eq!(harness::read_reports(&path).unwrap().len(), 4);
        }
        assert_eq!(bytes[0], bytes[1], "{ext}");
    }
}

#[test]
fn synthetic_fit_file() {
    let dir = tempfile::tempdir().unwrap();
    let prec = Precision::new(128).unwrap();
    let rows: Vec<GapReport> = (5..=30)
        .map(|n| {
            let mut r = GapReport::empty(n, BigComplex::parse("1", prec).unwrap());
            let v = BigReal::from_i64(i64::from(n), prec).powi(-4);
            r.remainder_refined = Some(BigComplex::from_real(v));
            r
        })
        .collect();
    let path = dir.path().join("synthetic.csv");
    harness::write_reports(&rows, &path, OutputFormat::Csv).unwrap();
    let fit = harness::fit_file(&path, FitTarget::GapRefined).unwrap();
    assert!((fit.fit.slope + 4.0).abs() < 1e-9, "{fit}");
    assert_eq!(fit.claimed_slope, -4.0);
    let err = harness::fit_reports(&rows[..3], FitTarget::GapRefined).unwrap_err();
    assert!(err.to_string().contains("insufficient data"));
}

#[test]
fn fits_skip_rows_below_the_contraction_threshold() {
    let mut c = config("1", 2, 12, 192);
    c.methods = vec![Method::Oracle];
    let rows = harness::run_sweep(&c).unwrap();
    assert!(rows[0].remainder_refined.is_some());
    let fit = harness::fit_reports(&rows, FitTarget::GapRefined).unwrap();
    assert_eq!(fit.skipped, vec![2]);
    assert_eq!(fit.fit.points_used, 10);
}

#[test]
fn unwritable_output_path() {
    let mut c = config("1", 6, 6, 128);
    c.output_path = Some("/nonexistent-dir/x/out.csv".into());
    let err = harness::run_sweep(&c).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

type Parts = (f64, f64, i64, i64);

fn parts() -> impl Strategy<Value = Parts> {
    (any::<f64>(), any::<f64>(), -300i64..300, -300i64..300)
}

/// Full-width mantissas, not just doubles.
fn big(bits: u32, (x, y, ex, ey): Parts) -> BigComplex {
    let p = Precision::new(bits).unwrap();
    let fin = |v: f64| if v.is_finite() { v } else { 0.5 };
    let third = BigReal::one(p).checked_div(&BigReal::from_i64(3, p)).unwrap();
    let re = (BigReal::from_f64(fin(x), p) * &third).mul_pow2(ex);
    let im = (BigReal::from_f64(fin(y), p) + &third).mul_pow2(ey);
    BigComplex::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rows_round_trip_bit_exactly(
        bits in prop_oneof![Just(64u32), Just(113), Just(256), Just(300)],
        n in 1u32..100,
        vals in proptest::collection::vec(parts(), 10),
    ) {
        let mut it = vals.into_iter().map(|v| big(bits, v));
        let mut draw = || it.next().unwrap();
        let mut r = GapReport::empty(n, draw());
        r.z_minus = Some(draw());
        r.z_plus = Some(draw());
        r.gamma_series = Some(draw());
        r.series_bound = Some(draw().re.abs());
        r.gamma_oracle = Some(draw());
        r.enclosure = Some(draw().im.abs());
        r.prediction_leading = Some(draw());
        r.ratio = Some(draw());
        r.remainder_refined = Some(draw());
        r.branch_map = Some((Branch::E2, Branch::E1));
        r.oracle_error = Some("ambiguous, \"quoted\"".into());
        let rows = vec![r];
        prop_assert_eq!(&roundtrip(&rows, OutputFormat::Csv), &rows);
        prop_assert_eq!(&roundtrip(&rows, OutputFormat::Json), &rows);
    }
}
