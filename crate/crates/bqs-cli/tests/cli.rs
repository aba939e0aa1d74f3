//! End-to-end tests of the CLI surface: exit codes, machine-parsable output,
//! and file emission.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bqs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bqs"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path
}

const SMALL_RUN: &str = "n = 32\nseed = 11\ninit_kc = 5\nt_end = 0.05\ndiag_interval = 0.025\nsnap_interval = 0.05\nmax_dt = 0.005\n";

#[test]
fn oracle_subcommand_passes_and_lists_checks() {
    let out = bqs().arg("oracle").output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let pass_lines = text.lines().filter(|l| l.contains("PASS")).count();
    assert!(pass_lines >= 8, "only {pass_lines} PASS lines:\n{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn regions_point_query_prints_g_alpha() {
    let out = bqs().args(["regions", "--alpha", "0.95"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let g_line = text.lines().find(|l| l.starts_with("g_alpha = ")).unwrap();
    let g: f64 = g_line.trim_start_matches("g_alpha = ").parse().unwrap();
    assert!((g - 0.1).abs() < 1e-15);
}

#[test]
fn regions_verdict_is_machine_parsable() {
    let out = bqs()
        .args(["regions", "--alpha", "0.95", "--beta", "0.12"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("admissible = false"));
    let margin_line = text
        .lines()
        .find(|l| l.contains("beta < g(alpha)"))
        .unwrap();
    assert!(margin_line.contains("satisfied = false"));
}

#[test]
fn regions_sweep_reports_zero_violations() {
    let out = bqs().args(["regions", "--alpha", "0.95", "--sweep"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("nesting_violations = 0"), "{text}");
}

#[test]
fn regions_rejects_bad_alpha() {
    let out = bqs().args(["regions", "--alpha", "1.5"]).output().unwrap();
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.starts_with("error: "), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn run_emits_outputs_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let out_dir = dir.path().join("out");
    let out = bqs()
        .arg("run")
        .arg(&cfg)
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_dir.join("diagnostics.csv").exists());
    assert!(out_dir.join("run_info.txt").exists());
    assert!(out_dir.join("snapshot_0000.bqs").exists());
    assert!(out_dir.join("snapshot_final.bqs").exists());
    let csv = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3); // header + t = 0, 0.025, 0.05
}

#[test]
fn run_rejects_inadmissible_config_with_one_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "beta = 0.12\n");
    let out = bqs().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("beta < g(alpha)"));
    assert!(err.contains("-0.02"));
}

#[test]
fn norms_reads_back_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let out_dir = dir.path().join("out");
    let out = bqs()
        .arg("run")
        .arg(&cfg)
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let snap = out_dir.join("snapshot_final.bqs");
    let out = bqs()
        .arg("norms")
        .arg(&snap)
        .args(["--spec", "0,inf,1,0"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let get = |prefix: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(prefix))
            .unwrap()
            .split(" = ")
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(get("besov_omega") > 0.0);
    assert!(get("besov_theta") > 0.0);
}

#[test]
fn norms_accepts_negative_smoothness_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let out_dir = dir.path().join("out");
    assert!(bqs()
        .arg("run")
        .arg(&cfg)
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .unwrap()
        .status
        .success());
    let out = bqs()
        .arg("norms")
        .arg(out_dir.join("snapshot_final.bqs"))
        .args(["--spec", "-0.95,2,inf,0"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("besov_omega = "));
}

#[test]
fn norms_rejects_malformed_spec() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("missing.bqs");
    let out = bqs()
        .arg("norms")
        .arg(&snap)
        .args(["--spec", "1,2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error: "));
}

#[test]
fn output_dir_env_var_is_the_default_root() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let out_root = dir.path().join("from_env");
    let out = bqs()
        .arg("run")
        .arg(&cfg)
        .env("BQS_OUTPUT_DIR", &out_root)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_root.join("diagnostics.csv").exists());
}

#[test]
fn twin_writes_stability_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n = 16\nseed = 3\ninit_kc = 3\nt_end = 0.04\ndiag_interval = 0.02\nmax_dt = 0.005\n",
    );
    let out_dir = dir.path().join("out");
    let out = bqs()
        .arg("twin")
        .arg(&cfg)
        .args(["--delta", "1e-6"])
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("twin_stability.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,Y,majorant,D1,D2");
    assert_eq!(csv.lines().count(), 1 + 3);
}
