use std::fs;
use std::path::Path;
use std::process::Command;

use wsn_coverage::cli::{self, EXIT_CONFIG, EXIT_OK};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wsn-coverage"))
}

fn run_in(out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["wsn-coverage", "--out", out.to_str().unwrap(), "--grid-resolution", "100"];
    args.extend_from_slice(extra);
    cli::run(args)
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn run_writes_a_nine_row_table() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["--trials", "1", "run"]), EXIT_OK);
    let table = read(dir.path().join("summary.csv"));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "D,n1,N,R");
    assert_eq!(lines.len(), 11);
    assert!(lines[1].starts_with("100,"));
    assert!(lines[9].starts_with("500,"));
    assert!(lines[10].starts_with("R_avg,"));
    assert!(dir.path().join("deployments/D300_t0.csv").exists());
    assert!(dir.path().join("reachability/D300_t0_r1.csv").exists());
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let flags = ["--d-list", "100,250", "--trials", "2", "--rounds", "2", "--seed", "17", "run"];
    assert_eq!(run_in(a.path(), &flags), EXIT_OK);
    assert_eq!(run_in(b.path(), &flags), EXIT_OK);
    for file in ["summary.csv", "trials.csv", "trace.jsonl", "deployments/D250_t1.csv", "reachability/D100_t0_r2.csv"] {
        assert_eq!(read(a.path().join(file)), read(b.path().join(file)), "{file}");
    }
}

#[test]
fn single_node_single_trial_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["--d-list", "1", "--trials", "1", "--min-pts", "1", "run"]), EXIT_OK);
    let table = read(dir.path().join("summary.csv"));
    assert_eq!(table.lines().nth(1), Some("1,1,1,100"));
}

#[test]
fn plot_data_writes_one_coverage_grid_per_round() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["--d-list", "200", "--trials", "1", "--rounds", "3", "run"]), EXIT_OK);
    let plots = dir.path().join("plots");
    let trace = dir.path().join("trace.jsonl");
    let code = cli::run([
        "wsn-coverage",
        "--out",
        plots.to_str().unwrap(),
        "plot-data",
        "--trace",
        trace.to_str().unwrap(),
        "--resolution",
        "50",
    ]);
    assert_eq!(code, EXIT_OK);
    let mut coverage: Vec<String> = fs::read_dir(plots.join("coverage"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    coverage.sort();
    assert_eq!(coverage, ["D200_t0_r1.csv", "D200_t0_r2.csv", "D200_t0_r3.csv"]);
    let grid = read(plots.join("coverage/D200_t0_r1.csv"));
    assert_eq!(grid.lines().count(), 50);
    assert!(grid.lines().all(|l| l.split(',').count() == 50));
    assert!(plots.join("reachability/D200_t0_r3.csv").exists());
}

#[test]
fn rand_baseline_writes_paired_rows() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_in(dir.path(), &["--baseline-deployed", "150", "--baseline-trials", "3", "rand-baseline"]);
    assert_eq!(code, EXIT_OK);
    let csv = read(dir.path().join("rand_baseline.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "trial,seed,active_count,protocol_grid_cr,rand_grid_cr,difference");
    assert_eq!(lines.len(), 5);
}

#[test]
fn validate_config_rejects_eps_below_radius() {
    let out = bin().args(["--eps", "4", "--radius", "5", "validate-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2r <= 2*eps"));
}

#[test]
fn validate_config_prints_effective_toml() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "[optics]\neps = 12.0\n").unwrap();
    let out = bin().args(["--config", path.to_str().unwrap(), "validate-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("eps = 12.0"));
    assert!(text.contains("[deployment]"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "[optics]\nepsilon = 12.0\n").unwrap();
    let code = cli::run(["wsn-coverage", "--config", path.to_str().unwrap(), "validate-config"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn unwritable_output_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    assert_eq!(run_in(&out, &["--d-list", "100", "--trials", "1", "run"]), EXIT_CONFIG);
}

#[test]
fn empty_or_missing_trace_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    for trace in [empty, dir.path().join("missing.jsonl")] {
        let out = bin()
            .args(["--out", dir.path().to_str().unwrap(), "plot-data", "--trace", trace.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(EXIT_CONFIG));
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn replayed_deployment_matches_generated_run() {
    let dir = tempfile::tempdir().unwrap();
    let flags = ["--d-list", "150", "--trials", "1", "--seed", "5"];
    let first = dir.path().join("first");
    assert_eq!(run_in(&first, &[&flags[..], &["run"]].concat()), EXIT_OK);
    let field = first.join("deployments/D150_t0.csv");
    let second = dir.path().join("second");
    let replay = [&flags[..], &["run", "--deployment", field.to_str().unwrap()]].concat();
    assert_eq!(run_in(&second, &replay), EXIT_OK);
    assert_eq!(read(first.join("summary.csv")), read(second.join("summary.csv")));
}

#[test]
fn help_exits_cleanly() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("rand-baseline"));
}
