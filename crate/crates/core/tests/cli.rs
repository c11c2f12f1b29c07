use std::io::Write as _;
use std::path::PathBuf;
use std::process::Command;

use ellvar::cli::{fmt_sig6, run, RiskOutput, TableRow, ValidationReport};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ellvar(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ellvar").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn file(dir: &TempDir, name: &str, body: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
    path.to_str().unwrap().to_string()
}

fn reports(r: &Run) -> Vec<RiskOutput> {
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

#[test]
fn student_var_examples() {
    let r = reports(&ellvar(&["var", "--model", "student", "--nu", "5", "--delta", "1,0", "--alpha", "0.05,0.01"]));
    assert_eq!(r.len(), 2);
    assert_eq!(fmt_sig6(r[0].report.var), "2.01505");
    assert_eq!(fmt_sig6(r[1].report.var), "3.36493");
    assert!(r.iter().all(|o| o.report.es >= o.report.var));

    let cov = reports(&ellvar(&[
        "var", "--model", "student", "--nu", "5", "--delta", "1,0", "--alpha", "0.05",
        "--sigma-interpretation", "covariance",
    ]));
    let want = r[0].report.var * (3.0f64 / 5.0).sqrt();
    assert!((cov[0].report.var - want).abs() < 1e-12);
}

#[test]
fn json_reports_round_trip() {
    let run = ellvar(&["es", "--model", "student", "--nu", "7", "--delta", "0.3,-1.2", "--alpha", "0.025"]);
    let parsed = reports(&run);
    let again = serde_json::to_string_pretty(&parsed).unwrap();
    assert_eq!(again.trim_end(), run.stdout.trim_end());
}

#[test]
fn moments_and_portfolio_files() {
    let dir = TempDir::new().unwrap();
    let moments = file(&dir, "m.json", r#"{"ids": ["b", "a"], "mu": [0.0, 0.0], "sigma": [[1.0, 0.5], [0.5, 1.0]]}"#);
    // Listed in the opposite order: ids are matched, not positions.
    let portfolio = file(&dir, "p.csv", "id,delta\na,1\nb,1\n");
    let r = reports(&ellvar(&[
        "var", "--model", "student", "--nu", "5", "--moments", &moments, "--portfolio", &portfolio, "--alpha", "0.05",
    ]));
    assert!((r[0].report.var - 2.01505 * 3f64.sqrt()).abs() < 1e-4);

    let equity = file(&dir, "e.csv", "id,shares,price\na,10,100\nb,5,20\n");
    let r = reports(&ellvar(&["var", "--moments", &moments, "--portfolio", &equity, "--alpha", "0.05", "--ivar"]));
    let iv = r[0].incremental.as_ref().unwrap();
    assert_eq!(iv.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(), ["b", "a"]);
    assert_eq!(iv[0].delta, 100.0);
    assert_eq!(iv[1].delta, 1000.0);
    let total: f64 = iv.iter().map(|e| e.ivar).sum();
    assert!((total - r[0].report.var).abs() < 1e-10 * r[0].report.var);
}

#[test]
fn returns_file_and_ridge() {
    let dir = TempDir::new().unwrap();
    let returns = file(&dir, "r.csv", "x,y\n0.01,0.02\n-0.02,0.01\n0.005,-0.01\n0.0,0.003\n");
    let r = reports(&ellvar(&["var", "--returns", &returns, "--delta", "1,1", "--format", "json"]));
    assert_eq!(r.len(), 2);

    let flat = file(&dir, "flat.csv", "x,y\n0,0\n2,2\n");
    let bad = ellvar(&["var", "--returns", &flat, "--delta", "1,1"]);
    assert_eq!(bad.code, 4, "{}", bad.stderr);
    assert!(bad.stderr.starts_with("error kind=degenerate_covariance code=4:"));
}

#[test]
fn malformed_inputs_exit_2_with_line_numbers() {
    let dir = TempDir::new().unwrap();
    let ragged = file(&dir, "r.csv", "x,y\n0.01,0.02\n0.03\n0.0,0.1\n");
    let r = ellvar(&["var", "--returns", &ragged, "--delta", "1,1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains(":3: expected 2 fields, found 1"), "{}", r.stderr);
    assert_eq!(r.stderr.lines().count(), 1);

    let text = file(&dir, "t.csv", "x,y\n0.01,0.02\n0.03,abc\n0.0,0.1\n");
    let r = ellvar(&["var", "--returns", &text, "--delta", "1,1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains(":3: column 'y': 'abc' is not a number"), "{}", r.stderr);

    let header = file(&dir, "p.csv", "name,weight\na,1\n");
    assert_eq!(ellvar(&["var", "--portfolio", &header]).code, 2);
    let json = file(&dir, "m.json", r#"{"mu": [0.0], "sigma": [[1.0]"#);
    assert_eq!(ellvar(&["var", "--moments", &json]).code, 2);
    assert_eq!(ellvar(&["var", "--alpha", "0.7"]).code, 2);
    assert_eq!(ellvar(&["var", "--model", "student", "--nu", "2"]).code, 2);
    assert_eq!(ellvar(&["var", "--model", "student"]).code, 2);
    assert_eq!(ellvar(&["var", "--bogus"]).code, 2);
}

#[test]
fn dimension_and_definiteness_errors() {
    let dir = TempDir::new().unwrap();
    let moments = file(&dir, "m.json", r#"{"mu": [0.0, 0.0], "sigma": [[1.0, 0.0], [0.0, 1.0]]}"#);
    let r = ellvar(&["var", "--moments", &moments, "--delta", "1,2,3"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.starts_with("error kind=dimension_mismatch code=3:"));

    let singular = file(&dir, "s.json", r#"{"mu": [0.0, 0.0], "sigma": [[1.0, 2.0], [2.0, 1.0]]}"#);
    let r = ellvar(&["var", "--moments", &singular, "--delta", "1,2"]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("leading minor 2"));
}

#[test]
fn mixture_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = file(
        &dir,
        "mix.json",
        r#"{"components": [
            {"beta": 0.9, "normal": true, "mu": [0.0], "sigma": [[1.0]]},
            {"beta": 0.1, "normal": true, "mu": [0.0], "sigma": [[4.0]]}
        ]}"#,
    );
    let r = reports(&ellvar(&["var", "--model", "mixture", "--mixture-spec", &spec, "--alpha", "0.01", "--ivar"]));
    assert!(r[0].report.var > 2.3263 && r[0].report.var < 2.0 * 2.3263);
    assert!(r[0].report.model.starts_with("mixture("));
    let bad = file(&dir, "bad.json", r#"{"components": [{"beta": 1.0, "mu": [0.0], "sigma": [[1.0]]}]}"#);
    assert_eq!(ellvar(&["var", "--model", "mixture", "--mixture-spec", &bad]).code, 2);
    let weights = file(
        &dir,
        "w.json",
        r#"{"components": [{"beta": 0.5, "nu": 4, "mu": [0.0], "sigma": [[1.0]]}, {"beta": 0.4, "normal": true, "mu": [0.0], "sigma": [[1.0]]}]}"#,
    );
    assert_eq!(ellvar(&["var", "--model", "mixture", "--mixture-spec", &weights]).code, 2);
}

#[test]
fn table_values_and_comparison() {
    let r = ellvar(&["table", "--alpha", "0.01", "--nu", "2,300", "--format", "json"]);
    assert_eq!(r.code, 0);
    let rows: Vec<TableRow> = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(fmt_sig6(rows[1].quantile), "2.33884");
    assert_eq!(fmt_sig6(rows[0].es_multiplier.unwrap()), "14.0712");

    let r = ellvar(&["table", "--compare-paper", "--format", "csv"]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next().unwrap(), "alpha,nu,q,published_q,q_check,es_mult,published_es,es_check");
    let flagged: Vec<&str> = r.stdout.lines().filter(|l| l.split(',').nth(4) == Some("ERRATUM")).collect();
    assert!(flagged.iter().any(|l| l.starts_with("0.05,9,")));
    assert!(flagged.iter().any(|l| l.starts_with("0.05,10,")));
}

#[test]
fn table_prints_six_significant_digits() {
    let r = ellvar(&["table", "--alpha", "0.05", "--nu", "5"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().nth(1).unwrap().split_whitespace().collect::<Vec<_>>(), ["0.05", "5", "2.01505", "2.89013"]);
}

#[test]
fn mc_validate_passes_and_is_reproducible() {
    let args = [
        "mc-validate", "--model", "student", "--nu", "5", "--alpha", "0.01,0.05", "--paths", "2e5", "--seed", "99",
        "--batch-size", "10000", "--format", "json",
    ];
    let one = ellvar(&[&args[..], &["--threads", "1"]].concat());
    let four = ellvar(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.code, 0, "{}", one.stdout);
    assert_eq!(one.stdout, four.stdout);
    let report: ValidationReport = serde_json::from_str(&one.stdout).unwrap();
    assert!(report.pass && report.rows.len() == 4);
}

#[test]
fn mc_validate_flags_published_es() {
    let r = ellvar(&[
        "mc-validate", "--model", "student", "--nu", "10", "--alpha", "0.01", "--paths", "1e6", "--compare-paper",
        "--format", "json",
    ]);
    assert_eq!(r.code, 1);
    let report: ValidationReport = serde_json::from_str(&r.stdout).unwrap();
    let published = report.rows.iter().find(|row| row.measure == "published_es").unwrap();
    assert_eq!(published.comparison.analytic, 3.8135);
    assert!(published.comparison.z > 10.0);
    assert!(report.rows.iter().filter(|row| row.measure != "published_es").all(|row| row.comparison.pass));
}

#[test]
fn small_runs_warn() {
    let r = ellvar(&["mc-validate", "--paths", "2000", "--alpha", "0.01", "--max-z", "10"]);
    assert!(r.stderr.contains("warning: alpha=0.01: only 2000 paths"), "{}", r.stderr);
    assert!(r.stderr.contains("tail observations"));
}

#[test]
fn binary_exit_codes_and_seed_env() {
    let bin = env!("CARGO_BIN_EXE_ellvar");
    let out = Command::new(bin).args(["var", "--delta", "1,2", "--model", "student", "--nu", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    let mc = |env: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args(["mc-validate", "--paths", "50000", "--alpha", "0.05", "--format", "json"]);
        if let Some(seed) = env {
            cmd.env("ELLVAR_SEED", seed);
        } else {
            cmd.env_remove("ELLVAR_SEED");
        }
        cmd.output().unwrap().stdout
    };
    let a = mc(Some("17"));
    let report: ValidationReport = serde_json::from_slice(&a).unwrap();
    assert_eq!(report.seed, 17);
    assert_eq!(a, mc(Some("17")));
    assert_ne!(a, mc(None));
}
