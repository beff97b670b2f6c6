//! End-to-end checks of the command-line interface: exit codes, report
//! contents, config overrides and error surfacing.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn descriptor(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("descriptors/{name}.json"))
}

fn hlsguide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlsguide"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_report(subcommand: &str, kernel: &str, extra: &[&str]) -> (Output, serde_json::Value) {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let mut args = vec![
        subcommand.to_string(),
        descriptor(kernel).display().to_string(),
        descriptor("platform").display().to_string(),
        "--report".into(),
        report.display().to_string(),
        "--fixed-timestamp".into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let out = Command::new(env!("CARGO_BIN_EXE_hlsguide"))
        .args(&args)
        .output()
        .expect("binary runs");
    let json = std::fs::read_to_string(&report)
        .map(|text| serde_json::from_str(&text).expect("report is valid JSON"))
        .unwrap_or(serde_json::Value::Null);
    (out, json)
}

#[test]
fn run_aes_exits_zero_with_five_accepted_steps() {
    let (out, report) = run_with_report("run", "aes", &[]);
    assert_eq!(out.status.code(), Some(0));
    let steps = report["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 5);
    assert!(steps.iter().all(|s| s["accepted"].as_bool().unwrap()));
    assert!(report["final"]["breakdown"]["speedup"].as_f64().unwrap() > 1.0);
    // Every number is recomputable from the embedded echoes.
    assert!(report["kernel"]["job_count"].is_u64());
    assert!(report["platform"]["clock_hz"].is_f64() || report["platform"]["clock_hz"].is_u64());
}

#[test]
fn run_bfs_warns_but_exits_zero() {
    let (out, report) = run_with_report("run", "bfs", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report["gate"]["decision"], "warn");
}

#[test]
fn run_spmv_exits_two_with_gate_ratio() {
    let (out, report) = run_with_report("run", "spmv", &[]);
    assert_eq!(out.status.code(), Some(2));
    let ratio = report["gate"]["ratio"].as_f64().unwrap();
    assert!((ratio - 1.3).abs() < 1e-2, "ratio {ratio}");
    assert_eq!(report["gate"]["decision"], "reject");
    assert_eq!(report["steps"].as_array().unwrap().len(), 0);
}

#[test]
fn missing_file_exits_one() {
    let out = hlsguide(&[
        "run",
        "/nonexistent/kernel.json",
        descriptor("platform").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cannot read"), "{stderr}");
}

#[test]
fn whatif_evaluates_exact_config() {
    let (out, report) = run_with_report(
        "whatif",
        "aes",
        &[
            "--set",
            "caching=batch:65536",
            "--set",
            "pipelined=true",
            "--set",
            "pe_factor=16",
            "--set",
            "buffer_width_bits=256",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report["config"]["pe_factor"], 16);
    assert_eq!(report["config"]["partition_factor"], 16);
    assert_eq!(report["config"]["buffer_width_bits"], 256);
    let templates: Vec<&str> = report["templates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap())
        .collect();
    assert_eq!(templates, vec!["fig4a", "fig4b", "fig4d"]);
}

#[test]
fn whatif_rejects_non_power_of_two_pe() {
    let out = hlsguide(&[
        "whatif",
        descriptor("aes").to_str().unwrap(),
        descriptor("platform").to_str().unwrap(),
        "--set",
        "caching=batch:65536",
        "--set",
        "pe_factor=3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("power of two"), "{stderr}");
}

#[test]
fn whatif_rejects_unknown_key_listing_valid_ones() {
    let out = hlsguide(&[
        "whatif",
        descriptor("aes").to_str().unwrap(),
        descriptor("platform").to_str().unwrap(),
        "--set",
        "bogus=1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown config key"), "{stderr}");
    assert!(stderr.contains("pe_factor"), "{stderr}");
    assert!(stderr.contains("double_buffered"), "{stderr}");
}

#[test]
fn whatif_surfaces_inapplicable_double_buffering_verbatim() {
    let out = hlsguide(&[
        "whatif",
        descriptor("bfs").to_str().unwrap(),
        descriptor("platform").to_str().unwrap(),
        "--set",
        "caching=batch:65536",
        "--set",
        "double_buffered=true",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("output of each iteration feeds the next iteration's load"),
        "{stderr}"
    );
}

#[test]
fn sweep_grid_is_bounded_and_best_matches_run() {
    let (out, sweep) = run_with_report("sweep", "aes", &[]);
    assert_eq!(out.status.code(), Some(0));
    let grid = sweep["grid"].as_array().unwrap();
    assert!(grid.len() <= 32, "grid has {} rows", grid.len());
    for row in grid {
        assert!(row["total_s"].is_f64());
        assert!(row["fits"].is_boolean());
    }
    // The guideline reached the reorg step for aes, so the best sweep row
    // must equal its final config.
    let (_, run) = run_with_report("run", "aes", &[]);
    let best = &sweep["best"];
    assert_eq!(best["buffer_width_bits"], run["final"]["config"]["buffer_width_bits"]);
    assert_eq!(best["pe_factor"], run["final"]["config"]["pe_factor"]);
}

#[test]
fn sweep_notes_when_nothing_fits() {
    // A platform with a 10-block fabric cannot fit any wide design.
    let dir = tempfile::tempdir().unwrap();
    let platform = dir.path().join("tiny.json");
    std::fs::write(
        &platform,
        r#"{"bram_blocks_total": 10, "bram_usable_bits": 100000}"#,
    )
    .unwrap();
    let report_path = dir.path().join("report.json");
    let out = hlsguide(&[
        "sweep",
        descriptor("bfs").to_str().unwrap(),
        platform.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
        "--fixed-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["grid"].as_array().unwrap().iter().all(|r| r["fits"] == false));
    assert!(
        report["note"].as_str().unwrap().contains("no feasible wide design"),
        "{}",
        report["note"]
    );
    assert!(report["best"].is_null());
}

#[test]
fn reports_print_to_stdout_without_report_flag() {
    let out = hlsguide(&[
        "run",
        descriptor("gemm").to_str().unwrap(),
        descriptor("platform").to_str().unwrap(),
        "--fixed-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    assert_eq!(parsed["kernel"]["name"], "gemm");
}
