use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pcm_cop::cli::{read_records, tables_csv};
use pcm_cop::simulator::aggregate_tables;

fn pcm_cop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcm-cop")).args(args).output().expect("binary runs")
}

fn write_matrix(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn run_writes_bundle_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = pcm_cop(&["run", "--n", "4..4", "--gamma-levels", "5", "--per-cell", "10", "--seed", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(data_rows(&a.join("records.csv")), 50);
    for f in ["records.csv", "tables.csv", "figures.csv", "summary.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    // no temp files left behind
    assert_eq!(fs::read_dir(&a).unwrap().count(), 4);
}

#[test]
fn delta_scheme_flag_changes_values_not_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let u = tmp.path().join("u");
    let l = tmp.path().join("l");
    let base = ["run", "--n", "5..5", "--gamma-levels", "4", "--per-cell", "3", "--seed", "7"];
    let mut args_u = base.to_vec();
    args_u.extend(["--out", u.to_str().unwrap()]);
    let mut args_l = base.to_vec();
    args_l.extend(["--delta-scheme", "log-uniform", "--out", l.to_str().unwrap()]);
    assert!(pcm_cop(&args_u).status.success());
    assert!(pcm_cop(&args_l).status.success());
    assert_eq!(data_rows(&u.join("records.csv")), data_rows(&l.join("records.csv")));
    assert_ne!(fs::read(u.join("records.csv")).unwrap(), fs::read(l.join("records.csv")).unwrap());
}

#[test]
fn records_reaggregate_to_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rt");
    let o = pcm_cop(&["run", "--n", "3..9", "--gamma-levels", "6", "--per-cell", "8", "--seed", "99", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let records = read_records(&out.join("records.csv")).unwrap();
    assert_eq!(records.len(), 7 * 6 * 8);
    let rows = aggregate_tables(&records).unwrap();
    assert_eq!(tables_csv(&rows), fs::read(out.join("tables.csv")).unwrap());
    // th2 is empty for n >= 8 by default
    assert!(records.iter().all(|r| r.th2.is_some() == (r.n < 8)));
}

#[test]
fn full_default_grid_row_count() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("full");
    let o = pcm_cop(&["run", "--n", "3..9", "--gamma-levels", "300", "--per-cell", "100", "--seed", "42", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&out.join("records.csv")), 210_000);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("convergence failures: 0"));
}

#[test]
fn invalid_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let out = out.to_str().unwrap();
    for args in [
        vec!["run", "--n", "2..5", "--out", out],
        vec!["run", "--n", "3..10", "--out", out],
        vec!["run", "--gamma-levels", "0", "--out", out],
        vec!["run", "--delta-scheme", "gaussian", "--out", out],
        vec!["run", "--ki-bin-width", "1.5", "--out", out],
        vec!["frobnicate"],
    ] {
        assert_eq!(pcm_cop(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("sub");
    let o = pcm_cop(&["run", "--n", "3..3", "--gamma-levels", "1", "--per-cell", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn eval_consistent_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_matrix(tmp.path(), "c.txt", "# weights 4 2 1\n1 2 4\n0.5 1 2\n0.25 0.5 1\n");
    let o = pcm_cop(&["eval", &path]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("CI: 0\n"), "{text}");
    assert!(text.contains("KI: 0\n"), "{text}");
    assert!(text.contains("[EV] POP applicable 3 satisfied 3 violated 0 (100.00%)"));
    assert!(text.contains("[GM] POIP applicable 2 satisfied 2 violated 0 (100.00%)"));
}

#[test]
fn eval_sample_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_matrix(tmp.path(), "s.csv", "1,2,8\n0.5,1,2\n0.125,0.5,1\n");
    let o = pcm_cop(&["eval", "--verbose", &path]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("KI: 0.5\n"));
    assert!(text.contains("KI pair guarantee, threshold 2: guaranteed pairs (1,3)\n"), "{text}");
}

#[test]
fn eval_rejects_invalid_matrices() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("nr.txt", "1 2 8\n0.4 1 2\n0.125 0.5 1\n", "ReciprocityViolation"),
        ("small.txt", "1 2\n0.5 1\n", "OrderTooSmall"),
        ("neg.txt", "1 -2 1\n-0.5 1 1\n1 1 1\n", "NonPositiveEntry"),
        ("ragged.txt", "1 2 1\n0.5 1\n1 1 1\n", "NonSquare"),
    ];
    for (name, text, kind) in cases {
        let path = write_matrix(tmp.path(), name, text);
        let o = pcm_cop(&["eval", &path]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(kind), "{name}");
    }
    assert_eq!(pcm_cop(&["eval", tmp.path().join("missing.txt").to_str().unwrap()]).status.code(), Some(3));
}
