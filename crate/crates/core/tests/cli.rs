//! End-to-end checks of the command-line driver and its file outputs.

use std::fs;

use vfsim_core::cli::cli_main;
use vfsim_core::io::{read_frames, read_manifest};
use vfsim_core::solver::Termination;

fn write_config(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const SMALL_RUN: &str = r#"{
    "solver": {"grid": 64, "dt": 1e-4, "horizon": 2e-3},
    "outputs": {"frame_stride": 5,
                "diagnostics": {"geometry": true, "energy_orders": [3]}}
}"#;

#[test]
fn run_writes_manifest_frames_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.json", SMALL_RUN);
    let out = dir.path().join("out");
    let code = cli_main([
        "vfsim".into(),
        "run".to_string(),
        format!("--config={}", config.display()),
        format!("--out={}", out.display()),
        "--quiet".into(),
    ]);
    assert_eq!(code, 0);

    let manifest = read_manifest(&out).unwrap();
    assert_eq!(manifest.termination, Termination::Completed);
    assert!(manifest.run_config.is_some());
    let frames = read_frames(&out.join(&manifest.frames_file)).unwrap();
    assert_eq!(frames.len(), manifest.frame_count);
    assert!(frames.len() >= 2);

    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let header = diag.lines().next().unwrap();
    assert_eq!(header, "t,arc_length,min_speed,kappa_max,e_3,ratio_3");
    assert_eq!(diag.lines().count(), frames.len() + 1);
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.json", SMALL_RUN);
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let code = cli_main([
            "vfsim".to_string(),
            "run".into(),
            format!("--config={}", config.display()),
            format!("--out={}", out.display()),
            "--quiet".into(),
        ]);
        assert_eq!(code, 0);
        outputs.push((
            fs::read(out.join("frames.jsonl")).unwrap(),
            fs::read(out.join("diagnostics.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
}

#[test]
fn a_frame_file_can_seed_a_new_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.json", SMALL_RUN);
    let first = dir.path().join("first");
    assert_eq!(
        cli_main([
            "vfsim".to_string(),
            "run".into(),
            format!("--config={}", config.display()),
            format!("--out={}", first.display()),
            "--quiet".into(),
        ]),
        0
    );
    let seeded = format!(
        r#"{{
            "solver": {{"grid": 64, "dt": 1e-4, "horizon": 1e-3}},
            "initial": {{"kind": "file", "path": "{}"}}
        }}"#,
        first.join("frames.jsonl").display()
    );
    let config2 = write_config(dir.path(), "seeded.json", &seeded);
    let second = dir.path().join("second");
    assert_eq!(
        cli_main([
            "vfsim".to_string(),
            "run".into(),
            format!("--config={}", config2.display()),
            format!("--out={}", second.display()),
            "--quiet".into(),
        ]),
        0
    );
    let first_frames = read_frames(&first.join("frames.jsonl")).unwrap();
    let second_frames = read_frames(&second.join("frames.jsonl")).unwrap();
    assert_eq!(second_frames[0].positions, first_frames[0].positions);
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    assert_eq!(cli_main(["vfsim".to_string(), "run".into()]), 2);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(cli_main(["vfsim".to_string(), "frobnicate".into()]), 2);
}

#[test]
fn bad_config_values_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.json",
        r#"{"solver": {"alpha": 0.5}}"#,
    );
    let code = cli_main([
        "vfsim".to_string(),
        "run".into(),
        format!("--config={}", config.display()),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn energy_report_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "er.json",
        r#"{"solver": {"grid": 64, "sobolev_order": 6},
            "outputs": {"diagnostics": {"energy_orders": [3, 4]}}}"#,
    );
    let out = dir.path().join("out");
    let code = cli_main([
        "vfsim".to_string(),
        "energy-report".into(),
        format!("--config={}", config.display()),
        format!("--out={}", out.display()),
        "--quiet".into(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(out.join("energy_report.json")).unwrap();
    let reports: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert!(reports[0]["e_k"].as_f64().unwrap() > 0.0);
}

#[test]
fn help_exits_zero() {
    assert_eq!(cli_main(["vfsim".to_string(), "--help".into()]), 0);
}
