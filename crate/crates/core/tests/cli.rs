use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opnorm::mtx::{write_matrix_market_file, Layout};
use opnorm::SymMatrix;

fn opnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opnorm")).args(args).output().expect("spawn opnorm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

fn write_matrix(dir: &Path, name: &str, rows: &[Vec<f64>]) -> PathBuf {
    let path = dir.join(name);
    write_matrix_market_file(&SymMatrix::from_rows(rows).unwrap(), &path, Layout::Coordinate).unwrap();
    path
}

fn swap(dir: &Path) -> PathBuf {
    write_matrix(dir, "swap.mtx", &[vec![0.0, 1.0], vec![1.0, 0.0]])
}

#[test]
fn norm_of_swap_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = swap(dir.path());
    let o = opnorm(&["norm", "--matrix", m.to_str().unwrap(), "--r", "3", "--p", "2", "--dump-maximizer"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(value(&out, "gamma").unwrap().starts_with("1.1224620"), "{out}");
    assert!(value(&out, "v").is_some());
    assert!(value(&out, "iterations").is_some());
}

#[test]
fn path_graph_exits_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_matrix(dir.path(), "p3.mtx", &[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]);
    let o = opnorm(&["norm", "--matrix", m.to_str().unwrap(), "--r", "2", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(value(&stdout(&o), "witness").unwrap().starts_with("bipartition"));
}

#[test]
fn malformed_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.mtx");
    fs::write(&m, "%%MatrixMarket matrix array real symmetric\n2 2\n1\nbanana\n").unwrap();
    let o = opnorm(&["norm", "--matrix", m.to_str().unwrap(), "--r", "2", "--p", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let missing = opnorm(&["norm", "--matrix", "/definitely/not/here.mtx", "--r", "2", "--p", "2"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn grothendieck_values_and_range() {
    let dir = tempfile::tempdir().unwrap();
    let m = swap(dir.path());
    let o = opnorm(&["grothendieck", "--matrix", m.to_str().unwrap(), "--r", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let m_r: f64 = value(&stdout(&o), "m_r").unwrap().parse().unwrap();
    assert_eq!(format!("{m_r:.7}"), "1.4142136");

    let o = opnorm(&["grothendieck", "--matrix", m.to_str().unwrap(), "--r", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r must be ≥ 2"));
}

#[test]
fn diagnose_mean_matrix_and_triangle() {
    let o = opnorm(&["diagnose", "--mean-matrix", "30", "--mu", "0.4", "--r", "3", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(value(&out, "linf_dist").unwrap().parse::<f64>().unwrap(), 0.0);

    let dir = tempfile::tempdir().unwrap();
    let m = write_matrix(dir.path(), "tri.mtx", &[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
    let o = opnorm(&["diagnose", "--matrix", m.to_str().unwrap(), "--r", "2", "--p", "2"]);
    assert_eq!(value(&stdout(&o), "irreducible"), Some("true"));
}

#[test]
fn diagnose_er_config_prints_all_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("er.json");
    fs::write(&cfg, r#"{"ensemble": {"family": "er", "n": 120, "mu": 0.4, "seed": 5}, "r": 2, "p": 2}"#).unwrap();
    let o = opnorm(&["diagnose", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for key in ["almost_regular", "within_bound", "lambda_big2", "lambda2_bound_ok"] {
        assert!(value(&out, key).is_some(), "missing {key} in\n{out}");
    }
}

#[test]
fn derivcheck_prints_both_derivatives() {
    let o = opnorm(&["derivcheck", "--n", "60", "--mu", "0.5", "--r", "2", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rel: f64 = value(&out, "rel_err_grad").unwrap().parse().unwrap();
    assert!(rel < 0.02, "{out}");
}

fn clt_config(dir: &Path, replicates: usize) -> PathBuf {
    let cfg = dir.join("clt.json");
    let body = format!(
        r#"{{"ensemble": {{"family": "er", "n": 60, "mu": 0.3}}, "r": 3, "p": 2, "seed": 11, "replicates": {replicates}}}"#
    );
    fs::write(&cfg, body).unwrap();
    cfg
}

fn run_clt(cfg: &Path, out: &Path, threads: &str) -> Vec<u8> {
    let o = Command::new(env!("CARGO_BIN_EXE_opnorm"))
        .args(["clt", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("OPNORM_THREADS", threads)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read(out.with_extension("csv")).unwrap()
}

#[test]
fn clt_smoke_run_writes_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = clt_config(dir.path(), 2);
    let csv = String::from_utf8(run_clt(&cfg, &dir.path().join("smoke"), "1")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("replicate,seed,n,r,p,mu,sigma2,gamma_scaled"));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("smoke.json")).unwrap()).unwrap();
    assert_eq!(summary["replicates"], 2);
}

#[test]
fn clt_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = clt_config(dir.path(), 16);
    let a = run_clt(&cfg, &dir.path().join("a"), "1");
    let b = run_clt(&cfg, &dir.path().join("b"), "1");
    let c = run_clt(&cfg, &dir.path().join("c"), "8");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn clt_config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"ensemble": {"family": "er", "n": 50, "mu": "high"}, "r": 2, "p": 2, "replicates": 2}"#).unwrap();
    let o = opnorm(&["clt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ensemble.mu"));
}

#[test]
fn clt_threshold_violation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    fs::write(
        &cfg,
        r#"{"ensemble": {"family": "er", "n": 40, "mu": 0.3}, "r": 2, "p": 2, "replicates": 3,
            "thresholds": {"max_abs_mean": 0.0, "max_variance_error": null, "min_ks_pvalue": null}}"#,
    )
    .unwrap();
    let out = dir.path().join("strict");
    let o = opnorm(&["clt", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(value(&stdout(&o), "violated"), Some("max_abs_mean"));
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_opnorm"))
        .args(["derivcheck", "--r", "2", "--p", "2", "--n", "10"])
        .env("OPNORM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
