use std::path::Path;
use std::process::{Command, Output};

use ksat_phase::io::parse_json_table;
use ksat_phase_cli::{main_with, EXIT_FAILURE, EXIT_USAGE, OUT_DIR_ENV};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ksat-phase").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn bin(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ksat-phase"));
    cmd.args(args).env_remove(OUT_DIR_ENV);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

/// Header and data rows of a CSV rendering, config lines dropped.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn alpha_d_for_three() {
    let (code, out, _) = run(&["alpha-d", "--k", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("# command: alpha-d"));
    let (h, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!((field(&h, &rows[0], "alpha_d") - 4.003).abs() < 1e-3);
}

#[test]
fn twosat_table_rows() {
    let (code, out, _) = run(&["twosat-table"]);
    assert_eq!(code, 0);
    let (h, rows) = csv_rows(&out);
    let table: Vec<_> = rows.iter().filter(|r| r[0] == "table").collect();
    assert_eq!(table.len(), 6);
    for r in table {
        assert_eq!(field(&h, r, "y50_round2"), field(&h, r, "printed"));
    }
    let fit = rows.iter().find(|r| r[0] == "fit-round2").unwrap();
    assert!((field(&h, fit, "c") - 1.01).abs() < 0.01);
    assert!((field(&h, fit, "x") - 1.64).abs() < 0.01);
    assert!(field(&h, fit, "r_squared") > 0.999);
}

#[test]
fn curve_ends_on_the_threshold() {
    let (code, out, _) = run(&["curve", "--k", "3", "--step", "0.001"]);
    assert_eq!(code, 0);
    let (h, rows) = csv_rows(&out);
    let last = rows.last().unwrap();
    assert_eq!(field(&h, last, "x"), 0.0);
    assert!((field(&h, last, "z") - 4.396).abs() < 0.01);
    let xs: Vec<f64> = rows.iter().map(|r| field(&h, r, "x")).collect();
    assert!(xs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn json_output_round_trips() {
    let (code, out, _) = run(&["cusp", "--k", "3", "--format", "json"]);
    assert_eq!(code, 0);
    let t = parse_json_table(&out).unwrap();
    assert_eq!(t.config.iter().find(|(k, _)| k == "format").unwrap().1, "json");
    let i = t.column("z0").unwrap();
    assert!((t.rows[0][i].as_f64().unwrap() - 3.1826959).abs() < 1e-6);
}

#[test]
fn validation_errors_exit_with_usage() {
    let (code, _, err) = run(&["alpha-d", "--k", "1"]);
    assert_eq!(code, EXIT_USAGE);
    let rec: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(rec["error"], "invalid");
    assert_eq!(rec["command"], "alpha-d");
    assert!(rec["message"].as_str().unwrap().contains("--k"));

    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = run(&["solve"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn runtime_errors_exit_with_failure() {
    let (code, _, err) = run(&["twopsat", "--z", "1.5"]);
    assert_eq!(code, EXIT_FAILURE);
    let rec: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(rec["error"], "out-of-regime");

    let out = bin(&["solve", "--input", "/nonexistent/f.cnf"], &[]);
    assert_eq!(out.status.code(), Some(EXIT_FAILURE));
    let rec: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(rec["command"], "solve");
}

#[test]
fn parse_errors_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cnf");
    std::fs::write(&path, "p cnf 2 1\n1 5 0\n").unwrap();
    let (code, _, err) = run(&["solve", "--input", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_FAILURE);
    let rec: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(rec["error"], "parse");
    assert!(rec["message"].as_str().unwrap().contains("line 2"), "{rec}");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["alpha-d", "--k", "4"], &[(OUT_DIR_ENV, dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("alpha_d.csv")).unwrap();
    let (h, rows) = csv_rows(&text);
    assert!((field(&h, &rows[0], "alpha_d") - 8.36047).abs() < 1e-4);
}

#[test]
fn out_file_wins_over_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sub/a.json");
    let out = bin(&["alpha-d", "--k", "3", "--format", "json", "--out", file.to_str().unwrap()], &[(OUT_DIR_ENV, env_dir.path())]);
    assert!(out.status.success());
    assert!(parse_json_table(&std::fs::read_to_string(&file).unwrap()).is_ok());
    assert_eq!(std::fs::read_dir(env_dir.path()).unwrap().count(), 0);
}

#[test]
fn empty_table_keeps_its_header() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["kcol", "--grid", "8", "--z", "0.05", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("kcol_events.csv")).unwrap();
    assert!(text.lines().any(|l| l == "# halted: false"));
    let (h, rows) = csv_rows(&text);
    assert_eq!(h, ["x", "y", "z", "reason"]);
    assert!(rows.is_empty());
    let grid = std::fs::read_to_string(dir.path().join("kcol_grid.csv")).unwrap();
    assert_eq!(csv_rows(&grid).1.len(), 64);
}

#[test]
fn solve_reads_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("f.cnf");
    std::fs::write(&cnf, "p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n").unwrap();
    let (code, out, _) = run(&["solve", "--input", cnf.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (h, rows) = csv_rows(&out);
    let i = h.iter().position(|c| c == "satisfiable").unwrap();
    assert_eq!(rows[0][i], "false");

    let tri = dir.path().join("g.edges");
    std::fs::write(&tri, "3 3\n1 2\n2 3\n1 3\n").unwrap();
    let (_, two, _) = run(&["solve", "--input", tri.to_str().unwrap(), "--colors", "2"]);
    let (_, three, _) = run(&["solve", "--input", tri.to_str().unwrap(), "--colors", "3"]);
    assert_eq!(csv_rows(&two).1[0][i], "false");
    assert_eq!(csv_rows(&three).1[0][i], "true");
}

#[test]
fn mc_is_seeded() {
    let args = ["mc", "--k", "2", "--n", "40", "--trials", "200", "--seed", "5"];
    let (code, a, _) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(a, run(&args).1);
    let (h, rows) = csv_rows(&a);
    let p: Vec<f64> = rows.iter().filter(|r| r[0] == "point").map(|r| field(&h, r, "p_hat")).collect();
    assert!(p.first().unwrap() > p.last().unwrap());
}

#[test]
fn help_and_version() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("alpha-c"));
    assert_eq!(run(&["--version"]).0, 0);
}
