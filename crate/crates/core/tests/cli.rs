use std::path::Path;
use std::process::{Command, Output};

use shifted_lbfgs::bench::{BenchRow, CSV_HEADER};
use shifted_lbfgs::io::read_vector;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shifted-lbfgs"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to launch binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn row(o: &Output) -> BenchRow {
    let text = stdout(o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    BenchRow::from_csv(lines.next().expect("missing row")).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_tridiagonal_n10000() {
    let o = run(&[
        "solve", "--gen", "tridiag", "--n", "10000", "--k", "5", "--sigma", "0.1", "--seed", "1",
        "--method", "recursion",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = row(&o);
    assert_eq!((r.method.as_str(), r.n, r.k), ("recursion", 10_000, 5));
    assert!(r.rel_residual <= 1e-12);
    assert_eq!(r.guard, "ok");
}

#[test]
fn oracle_refuses_large_n() {
    let o = run(&["solve", "--method", "oracle", "--n", "2001"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn recursion_and_oracle_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("rec.txt"), dir.path().join("oracle.txt"));
    for (method, out) in [("recursion", &a), ("oracle", &b)] {
        let o = run(&["solve", "--n", "200", "--seed", "3", "--method", method, "--out", s(out)]);
        assert!(o.status.success());
    }
    let (x, y) = (read_vector(&a).unwrap(), read_vector(&b).unwrap());
    let num: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|q| q * q).sum::<f64>().sqrt();
    assert!(num / den <= 1e-10);
}

#[test]
fn verify_recomputes_reported_residual() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    for (shift, method) in [("tridiag", "recursion"), ("diag", "cg"), ("scalar", "pcg")] {
        let x = dir.path().join(format!("x-{shift}.txt"));
        let o = run(&[
            "solve", "--shift", shift, "--n", "3000", "--seed", "4", "--method", method,
            "--sigma", "0.3", "--out", s(&x), "--dump-instance", s(&inst),
        ]);
        assert!(o.status.success());
        let reported = row(&o).rel_residual;
        let mut args = vec![
            "verify".to_string(),
            "--pairs".into(),
            s(&inst.join("pairs.txt")).into(),
            "--rhs".into(),
            s(&inst.join("rhs.txt")).into(),
            "--solution".into(),
            s(&x).into(),
            "--shift".into(),
            shift.into(),
            "--reported".into(),
            format!("{reported:e}"),
        ];
        if shift == "scalar" {
            args.extend(["--sigma".into(), "0.3".into()]);
        } else {
            args.extend(["--shift-file".into(), s(&inst.join("shift.txt")).into()]);
        }
        let v = bin().args(&args).output().unwrap();
        assert!(v.status.success(), "{shift}: {}", stdout(&v));
    }
}

#[test]
fn solve_from_files_matches_generated() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    let o = run(&["solve", "--n", "500", "--seed", "9", "--dump-instance", s(&inst)]);
    let generated = row(&o);
    let o = run(&[
        "solve", "--pairs", s(&inst.join("pairs.txt")), "--shift-file",
        s(&inst.join("shift.txt")), "--rhs", s(&inst.join("rhs.txt")), "--seed", "9",
        "--sigma", "0.1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let from_files = row(&o);
    assert_eq!(from_files.rel_residual, generated.rel_residual);
    assert!(inst.join("spec.txt").exists());
}

#[test]
fn parse_error_exit_code_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.txt");
    let rhs = dir.path().join("rhs.txt");
    std::fs::write(&pairs, "2 1 1\n1\nnot-a-number\n1\n1\n").unwrap();
    std::fs::write(&rhs, "1\n1\n").unwrap();
    let o = run(&["solve", "--pairs", s(&pairs), "--rhs", s(&rhs), "--shift", "scalar", "--sigma", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:"));
}

#[test]
fn guard_rejection_exit_code() {
    let o = run(&["solve", "--n", "100", "--epsilon", "1e6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exit_code() {
    let o = run(&["solve", "--n", "100", "--method", "cg", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_header_and_median_rows() {
    let o = run(&["bench", "--n", "1000,2000", "--reps", "3", "--jobs", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,n,k,shift,sigma,seed,time_s,iters,rel_residual,inner_products,guard")
    );
    let rows: Vec<BenchRow> = lines.map(|l| BenchRow::from_csv(l).unwrap()).collect();
    assert_eq!(rows.len(), 2 * 3 * 4);
    let medians = rows.iter().filter(|r| r.method.ends_with(":median")).count();
    assert_eq!(medians, 6);
    assert!(rows.iter().all(|r| r.rel_residual <= f64::EPSILON.sqrt()));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bench_is_deterministic() {
    let strip = |o: &Output| -> Vec<(String, usize, usize, u64)> {
        stdout(o)
            .lines()
            .skip(1)
            .map(|l| BenchRow::from_csv(l).unwrap())
            .map(|r| (r.method, r.n, r.iters, r.rel_residual.to_bits()))
            .collect()
    };
    let a = run(&["bench", "--n", "500,700", "--seed", "5"]);
    let b = run(&["bench", "--n", "500,700", "--seed", "5", "--jobs", "3"]);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn selftest_suites() {
    let o = run(&["selftest", "--cases", "40"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    for suite in ["oracle", "guard", "counters", "negative"] {
        assert!(text.contains(&format!("PASS {suite}")), "{text}");
    }

    let o = run(&["selftest", "--suite", "guard", "--cases", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 1);

    let o = run(&["selftest", "--suite", "oracle", "--cases", "10", "--inject-flipped-sign"]);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("FAIL oracle"));
}
