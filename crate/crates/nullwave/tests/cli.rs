//! End-to-end checks of the command-line surface: exit codes, CSV
//! artifacts, determinism, and the documented config schema.

use std::path::PathBuf;
use std::process::{Command, Output};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nullwave"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nullwave-cli-{name}"));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

fn run(args: &[&str], out: &PathBuf) -> Output {
    exe()
        .args(args)
        .arg("--output")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn report_lines(dir: &PathBuf) -> Vec<String> {
    std::fs::read_to_string(dir.join("report.csv"))
        .expect("report.csv exists")
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn zero_data_run_reports_a_zero_row() {
    let dir = scratch("zero");
    let out = run(&["run-nullplane", "--set", "data=zero", "--quiet"], &dir);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let lines = report_lines(&dir);
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols.len(), 17);
    assert_eq!(cols[0], "nullplane");
    for k in 7..=15 {
        assert_eq!(cols[k], "0.0000000000000000e0", "column {k}");
    }
}

#[test]
fn identical_config_and_seed_reproduce_the_csv_bytes() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let args = ["run-nullcone", "--set", "data=dipole", "--seed", "5", "--quiet"];
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    let bytes_a = std::fs::read(a.join("report.csv")).unwrap();
    let bytes_b = std::fs::read(b.join("report.csv")).unwrap();
    assert_eq!(bytes_a, bytes_b);
    assert!(!bytes_a.is_empty());
}

#[test]
fn sweep_writes_one_row_per_seed() {
    let dir = scratch("sweep");
    let out = run(
        &["verify-estimates", "--set", "count=5", "--seed", "7", "--quiet"],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let lines = report_lines(&dir);
    assert_eq!(lines.len(), 6);
    let seeds: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(seeds, ["7", "8", "9", "10", "11"]);
}

#[test]
fn oracle_refinement_ratios_sit_near_four() {
    let dir = scratch("conv");
    let out = run(
        &["convergence", "--set", "problem=nullplane", "--set", "levels=16,32,64", "--quiet"],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 2);
    for r in ratios {
        assert!((2.8..=5.2).contains(&r), "ratio {r}");
    }
}

#[test]
fn config_errors_name_the_key_and_exit_two() {
    let dir = scratch("cfg");
    let cases: [(&[&str], &str); 4] = [
        (&["run-cauchy", "--set", "order=3"], "{2, 4}"),
        (&["run-cauchy", "--set", "cadence=9"], "cadence"),
        (&["run-cauchy", "--config", "/nonexistent/x.cfg"], "x.cfg"),
        (&["derivatives", "--set", "problem=cauchy"], "derivative"),
    ];
    for (args, needle) in cases {
        let out = run(args, &dir);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "stderr {err:?} missing {needle:?}");
    }
}

#[test]
fn help_documents_the_config_defaults() {
    let out = exe().arg("--help").output().expect("binary runs");
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["n_u = 0", "tol_oracle", "run-nullcone", "verify-estimates"] {
        assert!(text.contains(needle), "--help missing {needle:?}");
    }
}

#[test]
fn quiet_suppresses_the_summary() {
    let dir = scratch("quiet");
    let loud = run(&["run-nullplane", "--set", "data=zero"], &dir);
    let quiet = run(&["run-nullplane", "--set", "data=zero", "--quiet"], &dir);
    assert!(!loud.stdout.is_empty());
    assert!(quiet.stdout.is_empty());
}
