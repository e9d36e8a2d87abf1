//! End-to-end tests of the `framequant` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_framequant"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("framequant-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn find_rstar_prints_ratio_and_residual() {
    let out = run(&["find-rstar", "--delta", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("ratio=5.557286658491"), "{text}");
    let residual: f64 = text
        .split("integral_residual=")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(residual.abs() < 1e-12);
}

#[test]
fn integral_routes_agree() {
    let out = run(&["integral", "--r", "0.5", "--delta", "0.2", "--method", "all"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let diff: f64 = text
        .split("max_pairwise_diff=")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(diff < 1e-9, "{text}");
}

#[test]
fn integral_analytic_out_of_domain_exits_2() {
    let out = run(&["integral", "--r", "1.0", "--delta", "0.3", "--method", "analytic"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("r ≤ δ ≤ 2r") || err.contains("analytic"), "{err}");
}

#[test]
fn bad_parameter_names_offending_key() {
    let out = run(&["error", "--n", "16", "--x", "1,0", "--delta=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("'delta'"), "{err}");

    let out = run(&["error", "--n", "16", "--delta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("'x'"), "{err}");
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn frame_file_round_trips_through_quantize() {
    let dir = temp_dir("frame");
    let frame_path = dir.join("f.txt");
    let out = run(&[
        "frame", "--kind", "funtf", "--d", "3", "--n", "9", "--seed", "11",
        "--out", frame_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"tight\":true"));
    let out = run(&[
        "quantize", "--frame", frame_path.to_str().unwrap(),
        "--x", "1.0,0.5,-0.25", "--delta", "0.25",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["coefficients"].as_array().unwrap().len(), 9);
    assert_eq!(parsed["partial_sums"].as_array().unwrap().len(), 10);
}

#[test]
fn seeded_commands_are_reproducible() {
    let a = run(&["wnh-sim", "--n", "32", "--delta", "0.1", "--trials", "2000", "--seed", "9"]);
    let b = run(&["wnh-sim", "--n", "32", "--delta", "0.1", "--trials", "2000", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let a = run(&["discrepancy", "--random", "64", "--seed", "4", "--k", "8,16"]);
    let b = run(&["discrepancy", "--random", "64", "--seed", "4", "--k", "8,16"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn config_file_provides_defaults_and_flags_override() {
    let dir = temp_dir("config");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "# sweep defaults\nn = 16\ndelta = 0.25\nx = 1.0,0.0\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "error"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let from_config: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(from_config["N"], 16);
    assert_eq!(from_config["delta"], 0.25);

    let out = run(&["--config", cfg.to_str().unwrap(), "error", "--delta", "0.5"]);
    let overridden: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(overridden["delta"], 0.5);
}

#[test]
fn sweep_n_writes_requested_formats() {
    let dir = temp_dir("sweepn");
    let out = run(&[
        "sweep-n", "--x", "3.141592653589793,2.718281828459045", "--delta", "0.0625",
        "--n-min", "10", "--n-max", "120", "--out", dir.to_str().unwrap(),
        "--formats", "csv,json,svg",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("plateau.csv")).unwrap();
    assert!(csv.starts_with("param,value\n"));
    assert_eq!(csv.lines().count(), 112);
    assert!(dir.join("plateau.json").exists());
    let svg = std::fs::read_to_string(dir.join("plateau.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn threads_flag_does_not_change_results() {
    let one = run(&["--threads", "1", "wnh-sim", "--n", "48", "--delta", "0.2", "--trials", "4000", "--seed", "3"]);
    let two = run(&["--threads", "2", "wnh-sim", "--n", "48", "--delta", "0.2", "--trials", "4000", "--seed", "3"]);
    assert!(one.status.success());
    assert_eq!(stdout(&one), stdout(&two));
}

#[test]
fn verify_all_passes_and_writes_reports() {
    let dir = temp_dir("verify");
    let out = bin()
        .args([
            "verify-all", "--profile", "desk", "--seed", "1729",
            "--out", dir.to_str().unwrap(), "--formats", "csv,json,svg",
        ])
        .output()
        .expect("binary runs");
    let text = stdout(&out);
    assert!(out.status.success(), "verify-all failed:\n{text}");
    for id in 1..=11 {
        assert!(text.contains(&format!("criterion {id:02} ")), "missing criterion {id}:\n{text}");
    }
    assert!(text.contains("verify-all: PASS"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("verify_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 11);
    for name in [
        "plateau.csv",
        "plateau.json",
        "plateau.svg",
        "step_scaling_large.csv",
        "avg_error_bound.csv",
        "avg_error_decay.svg",
        "highd_d3.json",
        "wnh_mse.json",
        "identities.json",
        "discrepancy.json",
    ] {
        assert!(dir.join(name).exists(), "missing artifact {name}");
    }
}
