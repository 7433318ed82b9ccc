use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_baldwin-lab"));
    cmd.env_remove("BALDWIN_LAB_THREADS");
    cmd
}

fn ok(mut cmd: Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn small_run(dir: &Path, threads: &str, via_env: bool) {
    let mut cmd = bin();
    cmd.args(["run", "--experiment", "exp1", "--generations", "40", "--pop", "60", "--noise", "0.01,0.05"]);
    cmd.arg("--out").arg(dir);
    if via_env {
        cmd.env("BALDWIN_LAB_THREADS", threads);
    } else {
        cmd.args(["--threads", threads]);
    }
    ok(cmd);
}

#[test]
fn table_one() {
    let out = ok({
        let mut c = bin();
        c.args(["tables", "--which", "1"]);
        c
    });
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.001,0.94,1.03,0.97,0.97,1.03,1.00"));
    assert!(text.contains("0.01,0.53,1.38,0.73,0.72,1.38,1.00"));
}

#[test]
fn tables_seven_and_eight_take_s_and_p() {
    let mut c = bin();
    c.args(["tables", "--which", "8", "--s", "0.3", "--p", "0.1"]);
    let text = String::from_utf8(ok(c).stdout).unwrap();
    assert!(text.lines().nth(2).unwrap().contains("0.233100"));
}

#[test]
fn run_writes_csvs_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    small_run(dir.path(), "1", false);
    let csv = fs::read_to_string(dir.path().join("exp1_p0.01.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("generation,avg_fitness,avg_bias_strength,avg_bias_correctness"));
    assert_eq!(csv.lines().count(), 41);
    assert!(csv.ends_with('\n'));
    assert!(dir.path().join("exp1_p0.05.csv").exists());
    assert!(dir.path().join("exp1_summary.csv").exists());
    let manifest = fs::read_to_string(dir.path().join("exp1_manifest.json")).unwrap();
    assert!(manifest.contains("\"master_seeds\""));
}

#[test]
fn hn_run_uses_allele_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = bin();
    c.args(["run", "--experiment", "hn", "--generations", "5", "--pop", "50", "--out"]).arg(dir.path());
    ok(c);
    let csv = fs::read_to_string(dir.path().join("hn.csv")).unwrap();
    assert!(csv.starts_with("generation,freq_zero,freq_one,freq_question,avg_fitness\n"));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_run(a.path(), "1", false);
    small_run(b.path(), "3", true);
    for name in ["exp1_p0.01.csv", "exp1_p0.05.csv", "exp1_summary.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("from-config");
    fs::write(
        &cfg,
        format!("experiment = exp3\nnoise = 0.01\ngenerations = 7\npop = 30\nout = {}\n", out.display()),
    )
    .unwrap();
    let mut c = bin();
    c.args(["run", "--config"]).arg(&cfg).args(["--generations", "9"]);
    ok(c);
    let csv = fs::read_to_string(out.join("exp3_p0.01.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10, "flag overrides the file");
}

#[test]
fn verify_against_own_summary_passes() {
    let dir = tempfile::tempdir().unwrap();
    small_run(dir.path(), "1", false);
    let mut c = bin();
    c.args(["verify", "--experiment", "exp1", "--generations", "40", "--pop", "60", "--baseline"])
        .arg(dir.path().join("exp1_summary.csv"));
    let text = String::from_utf8(ok(c).stdout).unwrap();
    assert!(text.contains("verify exp1: PASS"));
}

#[test]
fn verify_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let baseline = dir.path().join("b.csv");
    fs::write(&baseline, "noise,final_fitness\n0.01,0.99\ntolerance,0.001\n").unwrap();
    let mut c = bin();
    c.args(["verify", "--experiment", "exp5", "--generations", "5", "--pop", "20", "--baseline"]).arg(&baseline);
    let out = c.output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn usage_errors() {
    let cases: [&[&str]; 5] = [
        &["run", "--experiment", "exp9"],
        &["run"],
        &["run", "--experiment", "hn", "--schedule", "fixed:0.5"],
        &["run", "--experiment", "exp1", "--schedule", "ramp:0:1"],
        &["verify", "--experiment", "exp1", "--baseline", "/nonexistent/baseline.csv"],
    ];
    for args in cases {
        let out = bin().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
