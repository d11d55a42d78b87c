use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use approx_radical::{c64, parse, Document};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_approx-radical"))
        .args(args)
        .env_remove("APPROX_RADICAL_SEED")
        .output()
        .unwrap()
}

fn doc(out: &Output) -> Document {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["sqfree"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn eps_and_threshold_are_exclusive() {
    let out = run(&["sqfree", "--input", &fixture("poly_clusters.json"), "--eps", "0.03", "--threshold", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["radical", "--mulmats", &fixture("mulmats_exact.json"), "--eps", "0.1", "--rank", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["sqfree", "--input", "/nonexistent/poly.json", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_document_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(&dir, "bad.json", "{\"kind\": \"polynomial\", \"version\": \"1\", \"payload\": ");
    let out = run(&["sqfree", "--input", p.to_str().unwrap(), "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn numeric_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let id = r#"{"kind": "matrix", "version": "1", "payload": {"rows": 2, "cols": 2,
        "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]}}"#;
    let p = write_temp(&dir, "id.json", id);
    let out = run(&["rank", "--matrix", p.to_str().unwrap(), "--method", "gap"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gecp_and_svd_agree_on_fixtures() {
    for (file, eps) in [
        ("mulmats_exact.json", "1e-6"),
        ("mulmats_small_cluster.json", "0.01"),
        ("mulmats_large_cluster.json", "0.1"),
    ] {
        let rank = |method: &str| match doc(&run(&["radical", "--mulmats", &fixture(file), "--eps", eps, "--method", method])) {
            Document::RadicalOutput(r) => r.rank,
            other => panic!("unexpected {}", other.kind()),
        };
        assert_eq!(rank("gecp"), 2, "{file}");
        assert_eq!(rank("svd"), 2, "{file}");
    }
    for method in ["gecp", "svd"] {
        match doc(&run(&["sqfree", "--input", &fixture("poly_clusters.json"), "--eps", "0.03", "--method", method])) {
            Document::SquareFree(s) => assert_eq!(s.rank, 2, "{method}"),
            other => panic!("unexpected {}", other.kind()),
        }
    }
}

#[test]
fn rank_methods_on_small_cluster_matrix() {
    for method in ["gecp", "svd"] {
        let out = run(&["rank", "--matrix", &fixture("matrix_small_cluster.json"), "--method", method, "--threshold", "0.01"]);
        match doc(&out) {
            Document::RankReport(r) => assert_eq!(r.rank, 2, "{method}"),
            other => panic!("unexpected {}", other.kind()),
        }
    }
    match doc(&run(&["rank", "--matrix", &fixture("matrix_small_cluster.json"), "--method", "gap"])) {
        Document::RankReport(r) => assert_eq!(r.rank, 2),
        other => panic!("unexpected {}", other.kind()),
    }
}

#[test]
fn traces_from_coefficients() {
    let out = run(&["traces", "--from", "coeffs", "--input", &fixture("poly_x2m1.json")]);
    let m = match doc(&out) {
        Document::TraceMatrix(t) => t.matrix,
        Document::Matrix(m) => m,
        other => panic!("unexpected {}", other.kind()),
    };
    assert_eq!(m.rows(), 2);
    for (i, j, want) in [(0, 0, 2.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 2.0)] {
        assert!((m[(i, j)] - c64(want, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn seed_from_environment_matches_flag() {
    let base = ["radical", "--mulmats", &fixture("mulmats_small_cluster.json"), "--eps", "0.01"];
    let mut with_flag = base.to_vec();
    with_flag.extend(["--seed", "7"]);
    let flag = run(&with_flag);
    let env = Command::new(env!("CARGO_BIN_EXE_approx-radical"))
        .args(base)
        .env("APPROX_RADICAL_SEED", "7")
        .output()
        .unwrap();
    assert!(flag.status.success() && env.status.success());
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    let out = run(&["sqfree", "--input", &fixture("poly_clusters.json"), "--eps", "0.03", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(matches!(parse(&text).unwrap(), Document::SquareFree(_)));
}

#[test]
fn sweep_prints_slopes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = run(&[
        "sweep",
        "--clusters",
        &fixture("clusters_large.json"),
        "--eps-from",
        "1e-3",
        "--eps-to",
        "1e-1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(lines.lines().count(), 6);
    assert!(!out.stdout.is_empty());
}

#[test]
fn simulate_then_radical_recovers_centroids() {
    let dir = tempfile::tempdir().unwrap();
    let mats = dir.path().join("m.json");
    let sim = run(&["simulate", "--clusters", &fixture("clusters_small.json"), "--emit", "mulmats", "--out", mats.to_str().unwrap()]);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    match doc(&run(&["radical", "--mulmats", mats.to_str().unwrap(), "--eps", "0.01"])) {
        Document::RadicalOutput(r) => assert_eq!(r.rank, 2),
        other => panic!("unexpected {}", other.kind()),
    }
}
