use std::process::Command;

fn mg() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mg"));
    c.env_remove("MG_DEFAULT_BITS");
    c
}

fn out(c: &mut Command) -> (i32, String, String) {
    let o = c.output().unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

#[test]
fn series_term_exact_and_float() {
    let (code, s, _) = out(mg().args(["series-term", "--family", "sigma", "--p", "0", "--n", "5", "--exact"]));
    assert_eq!(code, 0);
    assert_eq!(s.trim(), "1/147456");
    let (code, s, _) = out(mg().args(["series-term", "--family", "A", "--k", "3", "--n", "3", "--exact"]));
    assert_eq!(code, 0);
    assert_eq!(s.trim(), "19/10240");
    let (code, s, _) = out(mg().args(["series-term", "--family", "S", "--ij", "21", "--k", "0", "--n", "1", "--a", "2/3", "--exact"]));
    assert_eq!(code, 0);
    assert_eq!(s.trim(), "2/3");
    let (code, s, _) = out(mg().args(["series-term", "--family", "sigma", "--p", "1", "--n", "4", "--z", "0.1+0.2i"]));
    assert_eq!(code, 0);
    assert!(s.contains('i'));
}

#[test]
fn gap_to_stdout_and_file() {
    let (code, s, _) = out(mg().args(["gap", "--a", "1", "--n", "5..6", "--bits", "128"]));
    assert_eq!(code, 0, "{s}");
    assert_eq!(s.lines().count(), 3);
    assert!(s.starts_with("n,bits,a_re"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let (code, _, err) = out(mg().args(["gap", "--a", "1", "--n", "8..13", "--out"]).arg(&path));
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"bits\": 256"));
    let (code, s, _) = out(mg().args(["fit", "--target", "gap_refined", "--in"]).arg(&path));
    assert_eq!(code, 0);
    assert!(s.contains("claimed -4"), "{s}");
}

#[test]
fn environment_sets_default_precision() {
    let (code, s, _) = out(mg().env("MG_DEFAULT_BITS", "96").args(["gap", "--a", "1", "--n", "7", "--method", "oracle"]));
    assert_eq!(code, 0);
    assert!(s.lines().nth(1).unwrap().starts_with("7,96,"));
    let (code, _, _) = out(mg().env("MG_DEFAULT_BITS", "many").args(["gap", "--a", "1", "--n", "7"]));
    assert_eq!(code, 2);
}

#[test]
fn deviations_are_printed() {
    let (code, s, _) = out(mg().args(["deviations", "--a", "1", "--n", "10", "--bits", "128"]));
    assert_eq!(code, 0);
    assert!(s.starts_with("n=10 z-=5.05"), "{s}");
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["gap", "--a", "0", "--n", "5"],
        vec!["gap", "--a", "1", "--n", "5", "--bits", "32"],
        vec!["gap", "--a", "1", "--n", "9..5"],
        vec!["verify", "--suite", "bogus"],
        vec!["fit", "--in", "/nonexistent.csv", "--target", "phi"],
        vec!["fit", "--in", "/nonexistent.csv", "--target", "nope"],
    ] {
        let (code, _, err) = out(mg().args(&args));
        assert_eq!(code, 2, "{args:?}: {err}");
    }
}

#[test]
fn sweep_from_config_and_verify_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let table = dir.path().join("t.csv");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"a": "1", "n_range": [2, 4], "precision_bits": 128, "methods": ["series"], "output_path": {:?}}}"#,
            table
        ),
    )
    .unwrap();
    let (code, _, err) = out(mg().args(["sweep", "--config"]).arg(&cfg));
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.contains("outside asymptotic regime"));

    let (code, s, _) = out(mg().args(["verify", "--suite", "walks", "--json"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}
