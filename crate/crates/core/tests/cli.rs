use assert_cmd::Command;
use serde_json::Value;

fn symmconv() -> Command {
    let mut cmd = Command::cargo_bin("symmconv").unwrap();
    cmd.env_remove("SYMMCONV_QUAD_TOL");
    cmd
}

fn json_of(output: &std::process::Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON envelope")
}

fn term_values(v: &Value) -> Vec<f64> {
    v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["value"].as_f64().unwrap())
        .collect()
}

#[test]
fn verify_hh_exits_zero_with_closed_form_terms() {
    let out = symmconv()
        .args([
            "verify",
            "hh",
            "--f",
            "x^2",
            "--p",
            "1",
            "--interval",
            "1,3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "verify");
    assert_eq!(v["holds"], true);
    let t = term_values(&v);
    assert!((t[0] - 4.0).abs() < 1e-12);
    assert!((t[1] - 13.0 / 3.0).abs() < 1e-12);
    assert!((t[2] - 5.0).abs() < 1e-12);
    assert!(v["timings_ms"].is_null());
}

#[test]
fn failed_convexity_exits_one_with_witness() {
    let out = symmconv()
        .args(["check", "--f", "-ln(x)", "--p", "-1", "--interval", "1,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["holds"], false);
    let w = &v["witness"];
    for key in ["x", "y", "t"] {
        assert!(w[key].is_f64(), "witness lacks {key}");
    }
    assert!(term_values(&v)[0] >= 0.05);
}

#[test]
fn symmetrized_negative_log_is_reported_as_failing() {
    // The p-symmetrical transform of -ln x at p = -1 is harmonically concave.
    let out = symmconv()
        .args([
            "check",
            "--symmetrized",
            "--f",
            "-ln(x)",
            "--p",
            "-1",
            "--interval",
            "1,2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn symmetrized_check_of_log_exits_zero() {
    let out = symmconv()
        .args([
            "check",
            "--symmetrized",
            "--f",
            "ln(x)",
            "--p",
            "-1",
            "--interval",
            "1,2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn parse_error_exits_two_with_error_envelope() {
    let out = symmconv()
        .args(["check", "--f", "x^", "--p", "1", "--interval", "1,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    assert_eq!(v["error"]["kind"], "parse");
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "hh", "--f", "x", "--interval", "1,2"],
        vec!["verify", "hh", "--f", "x", "--p", "1", "--interval", "2,1"],
        vec!["verify", "hh", "--f", "x", "--p", "0", "--interval", "1,2"],
        vec![
            "verify",
            "fejer",
            "--f",
            "x",
            "--p",
            "1",
            "--interval",
            "1,2",
        ],
        vec!["verify", "nonsense", "--f", "x"],
        vec![
            "fracint", "--h", "1", "--alpha", "-1", "--base", "0", "--at", "1", "--side", "left",
        ],
    ] {
        let out = symmconv().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn non_convergence_exits_three() {
    let out = symmconv()
        .args([
            "verify",
            "hh",
            "--f",
            "sin(50*x)",
            "--p",
            "1",
            "--interval",
            "1,3",
            "--quad-tol",
            "1e-14",
            "--max-subdivisions",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let v = json_of(&out);
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn fracint_matches_gamma_closed_form() {
    let out = symmconv()
        .args([
            "fracint", "--h", "1", "--alpha", "0.5", "--base", "0", "--at", "1", "--side", "left",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let value = term_values(&json_of(&out))[0];
    assert!(
        (value - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-9,
        "{value}"
    );
}

#[test]
fn transform_emits_csv_curve() {
    let out = symmconv()
        .args([
            "transform",
            "--f",
            "x^2",
            "--p",
            "1",
            "--interval",
            "1,3",
            "--points",
            "5",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let curve: Vec<&str> = text.lines().skip_while(|l| *l != "x,f,P,AP").collect();
    assert_eq!(curve.len(), 6);
    assert_eq!(curve[3], "2.0,4.0,4.0,0.0");
}

#[test]
fn identical_runs_give_identical_bytes() {
    let run = || {
        symmconv()
            .args([
                "verify",
                "double",
                "--f",
                "exp(x)",
                "--p",
                "2",
                "--interval",
                "1,2",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "f = \"x^3\"\np = 1.0\ninterval = [1.0, 3.0]\nformat = \"json\"\n",
    )
    .unwrap();
    let out = symmconv()
        .args([
            "verify",
            "hh",
            "--config",
            path.to_str().unwrap(),
            "--f",
            "x^2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["config"]["function_source"], "x^2");
    assert_eq!(v["config"]["p"], 1.0);
    assert!((term_values(&v)[1] - 13.0 / 3.0).abs() < 1e-12);
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "p = 1.0\nunknown_key = 3\n").unwrap();
    let out = symmconv()
        .args([
            "verify",
            "hh",
            "--config",
            path.to_str().unwrap(),
            "--f",
            "x",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(json_of(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("line 2"));
}

#[test]
fn environment_sets_quadrature_tolerance() {
    let out = symmconv()
        .env("SYMMCONV_QUAD_TOL", "1e-6")
        .args([
            "verify",
            "hh",
            "--f",
            "x^2",
            "--p",
            "1",
            "--interval",
            "1,3",
        ])
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["config"]["quad"]["abs_tol"], 1e-6);

    let out = symmconv()
        .env("SYMMCONV_QUAD_TOL", "1e-6")
        .args([
            "verify",
            "hh",
            "--f",
            "x^2",
            "--p",
            "1",
            "--interval",
            "1,3",
            "--quad-tol",
            "1e-9",
        ])
        .output()
        .unwrap();
    assert_eq!(json_of(&out)["config"]["quad"]["abs_tol"], 1e-9);

    let out = symmconv()
        .env("SYMMCONV_QUAD_TOL", "lots")
        .args([
            "verify",
            "hh",
            "--f",
            "x^2",
            "--p",
            "1",
            "--interval",
            "1,3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = symmconv()
        .args([
            "verify",
            "hh",
            "--f",
            "x^2",
            "--p",
            "1",
            "--interval",
            "1,3",
            "--output",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["holds"], true);
}

#[test]
fn empty_corpus_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = symmconv()
        .args(["corpus", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(term_values(&json_of(&out))[0], 0.0);
}

#[test]
fn corrupted_corpus_file_exits_two_and_is_named() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("a_good.toml"),
        "check = \"hh\"\nexpect = \"holds\"\nf = \"x^2\"\np = 1.0\na = 1.0\nb = 3.0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("b_broken.toml"),
        "check = \"hh\"\nexpect = \n",
    )
    .unwrap();
    let out = symmconv()
        .args(["corpus", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let message = json_of(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .to_string();
    assert!(message.starts_with("b_broken.toml:2:"), "{message}");
}

#[test]
fn corpus_regression_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("wrong.toml"),
        "check = \"pconvex\"\nexpect = \"holds\"\nf = \"-ln(x)\"\np = -1.0\na = 1.0\nb = 2.0\n",
    )
    .unwrap();
    let out = symmconv()
        .args(["corpus", dir.path().to_str().unwrap(), "--format", "human"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] wrong.toml"));
}

#[test]
fn shipped_corpus_directory_passes() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    let out = symmconv().args(["corpus", dir]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let builtin = symmconv().args(["corpus", "--builtin"]).output().unwrap();
    let fixtures = |o: &std::process::Output| json_of(o)["details"]["fixtures"].clone();
    assert_eq!(fixtures(&out), fixtures(&builtin));
}

#[test]
fn help_exits_zero() {
    let out = symmconv().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify"));
}
