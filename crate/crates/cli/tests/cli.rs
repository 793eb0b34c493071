use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mum-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn build_then_verify() {
    let path = scratch("m3.json");
    let o = mum(&["build", "--dim", "3", "--optimal", "--out", s(&path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("overall: PASS"));
    let o = mum(&["verify", "--in", s(&path), "--tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_fails_on_a_defective_set() {
    let path = scratch("bad.json");
    mum(&["build", "--dim", "3", "--t", "0.05", "--out", s(&path)]);
    let text = std::fs::read_to_string(&path).unwrap();
    let kappa = text
        .lines()
        .find(|l| l.contains("\"kappa\""))
        .unwrap()
        .split('"')
        .nth(3)
        .unwrap()
        .to_string();
    std::fs::write(&path, text.replace(&kappa, "5.0000000000000000e-1")).unwrap();
    let o = mum(&["verify", "--in", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn build_report_is_json() {
    let report = scratch("report.json");
    let o = mum(&[
        "build",
        "--dim",
        "4",
        "--kappa",
        "0.3",
        "--report",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["clauses"].as_array().unwrap().len(), 4);
    assert!((v["kappa"].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mum(&["build", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(
        mum(&["build", "--dim", "3", "--t", "0.1", "--optimal"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mum(&["gm", "--dim", "1"]).status.code(), Some(2));
    assert_eq!(
        mum(&["verify", "--in", "/nonexistent/m.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mum(&["tomo", "--in", "x.json", "--state", "mixed", "--shots", "10"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn numerical_errors_exit_3_and_name_the_cell() {
    let o = mum(&["build", "--dim", "3", "--t", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("b=") && err.contains("n="), "{err}");
    assert_eq!(
        mum(&["build", "--dim", "3", "--kappa", "0.9"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn grid_document_feeds_build() {
    let grid = scratch("g4.json");
    let o = mum(&[
        "gm",
        "--dim",
        "4",
        "--mapping",
        "row-major",
        "--out",
        s(&grid),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = mum(&["build", "--grid", s(&grid), "--optimal"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("row-major"));
}

#[test]
fn oracle_agrees() {
    let o = mum(&["oracle", "--dim", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("kappa_opt = 0.222222222222222"));
}

#[test]
fn tomo_exact_round_trip() {
    let path = scratch("t3.json");
    mum(&["build", "--dim", "3", "--optimal", "--out", s(&path)]);
    let o = mum(&["tomo", "--in", s(&path), "--state", "random:3:42"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let err: f64 = out
        .lines()
        .find(|l| l.starts_with("max-abs error"))
        .unwrap()
        .split_whitespace()
        .last()
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 1e-9);
}

#[test]
fn tomo_sampling_is_reproducible() {
    let path = scratch("t2.json");
    mum(&["build", "--dim", "2", "--kappa", "0.8", "--out", s(&path)]);
    let run = |name: &str| {
        let counts = scratch(name);
        let o = mum(&[
            "tomo",
            "--in",
            s(&path),
            "--state",
            "random:1:3",
            "--shots",
            "1000",
            "--seed",
            "5",
            "--counts",
            s(&counts),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(counts).unwrap()
    };
    let a = run("c1.csv");
    assert!(a.starts_with(b"b,n,value\n"));
    assert_eq!(a, run("c2.csv"));
}

#[test]
fn state_documents_are_accepted() {
    let m = scratch("e3.json");
    mum(&["build", "--dim", "3", "--optimal", "--out", s(&m)]);
    let rho = scratch("rho.json");
    let state = mum_core::random_state(3, 2, 4).unwrap();
    std::fs::write(&rho, mum_core::document::state_to_json(&state)).unwrap();
    let o = mum(&["entropy", "--in", s(&m), "--state", s(&rho)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("entropic bound"));
    let o = mum(&["tomo", "--in", s(&m), "--state", s(&rho), "--square"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn small_scan_writes_csv_and_metadata() {
    let out = scratch("scan.csv");
    let o = mum(&[
        "scan",
        "--dim",
        "3",
        "--kappas",
        "min:opt:3",
        "--states",
        "50",
        "--restarts",
        "4",
        "--seed",
        "1",
        "--out",
        s(&out),
        "--threads",
        "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let meta = std::fs::read_to_string(format!("{}.meta.json", out.display())).unwrap();
    assert!(meta.contains("rank_rule"));
}

#[test]
fn scan_rejects_unbuildable_kappa() {
    let out = scratch("bad_scan.csv");
    let o = mum(&[
        "scan",
        "--dim",
        "3",
        "--kappas",
        "0.4:0.9:2",
        "--seed",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
}
