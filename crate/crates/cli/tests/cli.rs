use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-bag")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(schema_name)).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

const SWEEP: [&str; 9] = ["disk-sweep", "--R", "1", "--m", "0", "--mode-index", "1", "--masses", "100,200,400,800"];

#[test]
fn identities_residuals_are_tiny() {
    let out = run(&["identities", "--dim", "2", "--samples", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("identity_name,max_residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let r: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(r < 1e-13, "{row}");
    }
}

#[test]
fn disk_sweep_example_has_four_rows() {
    let out = run(&SWEEP);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "M,lambda_M,lambda_M_minus_lambda_inf");
    assert_eq!(lines.len(), 5);
    for line in &lines[1..] {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[2] < 0.0 && cells[2] * cells[0] > -0.8 && cells[2] * cells[0] < -0.7, "{line}");
    }
}

#[test]
fn resolution_guard_is_a_usage_error() {
    let out = run(&["grid-solve", "--shape", "disk:R=1", "--M", "100", "--h", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("resolution"), "{err}");
}

#[test]
fn usage_errors_exit_two_on_one_line() {
    for args in [
        &["disk-sweep", "--R", "1", "--m", "0", "--masses", "100", "--bogus", "1"][..],
        &["disk-sweep", "--R", "1"],
        &["nonsense"],
        &["disk-infty", "--R", "-1", "--m", "0"],
        &["disk-sweep", "--R", "1", "--m", "0", "--masses", "1,2,3,4"],
        &["identities", "--dim", "3"],
        &["fit", "--format", "csv", "--input", "none.csv", "--lambda-inf", "1"],
        &["fit", "--input", "does-not-exist.csv", "--lambda-inf", "1"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert_eq!(stderr(&out).lines().count(), 1, "{args:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_one_with_structured_error() {
    let out = run(&["disk-infty", "--R", "1", "--m", "0", "--count", "5000"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_str(stderr(&out).trim()).expect("error is JSON");
    assert_eq!(err["kind"], "BracketingFailed");
    assert!(err["detail"]["found"].as_u64().unwrap() < 5000);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["grid-solve", "--help"]).status.code(), Some(0));
}

#[test]
fn headers_are_fixed() {
    let cases: [(&[&str], &str); 4] = [
        (&["disk-infty", "--R", "1", "--m", "-1", "--count", "2", "--sign", "-"], "m,index,lambda,mu_pred,boundary_density"),
        (&["layer-check", "--R", "1", "--m", "0", "--M", "200", "--order", "0"], "z,exact_u,exact_v,profile_u,profile_v,abs_err"),
        (&["bessel-selftest"], "check,worst,tolerance,status"),
        (&["identities", "--dim", "4", "--samples", "10"], "identity_name,max_residual"),
    ];
    for (args, header) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        assert_eq!(stdout(&out).lines().next(), Some(header), "{args:?}");
    }
}

#[test]
fn disk_infty_negative_branch() {
    let out = run(&["disk-infty", "--R", "1", "--m", "-1", "--count", "1", "--sign", "-"]);
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let lambda: f64 = row[2].parse().unwrap();
    assert!((lambda + 1.4346956508).abs() < 1e-9, "{lambda}");
}

#[test]
fn layer_check_first_order_beats_leading_order() {
    let worst = |order: &str| {
        let out = run(&["layer-check", "--R", "1", "--m", "0", "--M", "400", "--order", order]);
        stdout(&out)
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .fold(0.0, f64::max)
    };
    assert!(worst("1") * 5.0 < worst("0"));
}

#[test]
fn config_file_supplies_and_yields_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "# disk channel\nR = 1\nm=0\nmasses=100,200\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let base = run(&["--config", cfg, "disk-sweep"]);
    assert_eq!(base.status.code(), Some(0), "{}", stderr(&base));
    assert_eq!(stdout(&base).lines().count(), 3);

    let overridden = run(&["disk-sweep", "--config", cfg, "--masses", "100,300,500"]);
    assert_eq!(overridden.status.code(), Some(0), "{}", stderr(&overridden));
    let text = stdout(&overridden);
    let masses: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(masses, ["100", "300", "500"]);

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "R=1\nm=0\nmasses=100\nbogus=3\n").unwrap();
    let out = run(&["disk-sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn output_file_and_json_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let mut args = SWEEP.to_vec();
    args.extend(["--format", "json", "--output", path.to_str().unwrap()]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid("table.schema.json", &doc);
    assert_eq!(doc.as_array().unwrap().len(), 4);
    assert!(doc[0]["lambda_M"].as_f64().is_some());
}

#[test]
fn fit_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep.csv");
    let out = run(&[
        "disk-sweep", "--R", "1", "--m", "0", "--masses", "100,200,400,800,1600,3200", "--output", sweep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let infty = run(&["disk-infty", "--R", "1", "--m", "0", "--count", "1"]);
    let lambda_inf = stdout(&infty).lines().nth(1).unwrap().split(',').nth(2).unwrap().to_string();

    let fit = run(&["fit", "--input", sweep.to_str().unwrap(), "--lambda-inf", &lambda_inf, "--eta", "0.5", "--order", "2"]);
    assert_eq!(fit.status.code(), Some(0), "{}", stderr(&fit));
    let doc: Value = serde_json::from_str(&stdout(&fit)).unwrap();
    assert_valid("fit.schema.json", &doc);
    assert_eq!(doc["order"], 2);
    let mu1 = doc["mu_hat"][0][0].as_f64().unwrap();
    assert!((mu1 + 0.7172).abs() < 1e-3, "{mu1}");

    let pred = dir.path().join("pred.json");
    std::fs::write(&pred, format!("{{\"lambda_inf\": {lambda_inf}, \"gram\": [[[-0.7172, 0.0]]]}}")).unwrap();
    let rep = run(&["report", "--sweep", sweep.to_str().unwrap(), "--prediction", pred.to_str().unwrap()]);
    assert_eq!(rep.status.code(), Some(0), "{}", stderr(&rep));
    let text = stdout(&rep);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "M,branch,lambda_M,scaled_residual,mu_hat,mu_pred,rel_error");
    assert_eq!(lines.len(), 7);
    let rel: f64 = lines[6].rsplit(',').next().unwrap().parse().unwrap();
    assert!(rel < 1e-3, "{rel}");
}

#[test]
fn sweep_gaps_are_skipped_by_fit() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("gappy.csv");
    let l = 1.4346956508195627f64;
    let mut text = String::from("M,lambda_M\n");
    for m in [100.0, 200.0, 400.0, 800.0, 1600.0] {
        text.push_str(&format!("{m},{}\n", l - 0.7 / m));
    }
    text.push_str("3200,\n");
    std::fs::write(&sweep, text).unwrap();
    let fit = run(&["fit", "--input", sweep.to_str().unwrap(), "--lambda-inf", &l.to_string()]);
    assert_eq!(fit.status.code(), Some(0), "{}", stderr(&fit));
    let doc: Value = serde_json::from_str(&stdout(&fit)).unwrap();
    assert_eq!(doc["masses"].as_array().unwrap().len(), 5);
    assert!((doc["mu_hat"][0][0].as_f64().unwrap() + 0.7).abs() < 1e-9);
}

#[test]
fn grid_solve_json_matches_schema() {
    let out = run(&["grid-solve", "--shape", "disk:R=1", "--M", "12", "--L", "1.5", "--h", "0.0625", "--k", "2", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid("grid-solve.schema.json", &doc);
    assert_eq!(doc["eigenvalues"].as_array().unwrap().len(), 2);
    assert_eq!(doc["gram"].as_array().unwrap().len(), 2);
    assert!(doc["converged"].as_bool().unwrap());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let grid = |name: &str| {
        let p = dir.path().join(name);
        let out = run(&[
            "grid-solve", "--shape", "ellipse:a=1.1,b=0.9", "--M", "16", "--L", "1.5", "--h", "0.0625", "--sigma", "1.4",
            "--seed", "42", "--output", p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        std::fs::read(p).unwrap()
    };
    assert_eq!(grid("a.json"), grid("b.json"));

    let ids = |seed: &str| stdout(&run(&["identities", "--dim", "4", "--samples", "200", "--seed", seed]));
    assert_eq!(ids("9"), ids("9"));
}

#[test]
fn verify_all_without_grid_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let once = |name: &str| {
        let p = dir.path().join(name);
        let out = run(&["verify-all", "--skip", "grid", "--output", p.to_str().unwrap()]);
        (out.status.code(), std::fs::read_to_string(p).unwrap())
    };
    let (code_a, a) = once("a.csv");
    let (code_b, b) = once("b.csv");
    assert_eq!(a, b);
    assert_eq!(code_a, code_b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "criterion,name,measured,threshold,status");
    assert_eq!(lines.len(), 12);
    assert!(lines[9].ends_with(",SKIP") && lines[10].ends_with(",SKIP"));
    let failing = lines[1..].iter().filter(|l| l.ends_with(",FAIL")).count();
    assert_eq!(code_a, Some(if failing == 0 { 0 } else { 1 }));
}
