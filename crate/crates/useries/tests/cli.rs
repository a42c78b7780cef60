//! End-to-end checks of the command-line interface: exit codes, report
//! files, audits, and the documented failure diagnostics.

use std::path::Path;
use std::process::Command;

use useries::config::RunConfig;
use useries::constructor::JobRecord;
use useries::report::{CoefficientRecord, JobReport, JobStatus, RunReport};

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_useries"))
        .args(args)
        .output()
        .expect("binary must spawn");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const EASY_CONFIG: &str = r#"{
    "dimension": 1,
    "enumeration": "graded-lex",
    "mu": "all",
    "jobs": [
        {
            "variable_factors": [{"disc": {"center": [2.0, 0.0], "radius": 1.0}}],
            "target": "one",
            "tol": 0.5
        }
    ],
    "options": {"verify_per_factor": 64}
}"#;

#[test]
fn run_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("easy.json");
    write(&cfg, EASY_CONFIG);
    let (code, stdout, _) = run_cli(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("job 0: certified"), "{stdout}");
    // Default report path swaps the extension.
    let report_path = dir.path().join("easy.report.json");
    assert!(report_path.exists());
    let report = RunReport::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.jobs.len(), 1);
    assert_eq!(report.jobs[0].status, JobStatus::Certified);
    assert!(!report.coefficients.is_empty());
}

#[test]
fn zero_filled_variable_compact_exits_two_citing_the_requirement() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(
        &cfg,
        r#"{
            "dimension": 2,
            "enumeration": "graded-lex",
            "mu": "all",
            "jobs": [
                {
                    "variable_factors": [
                        {"disc": {"center": [0.0, 0.0], "radius": 1.0}},
                        {"disc": {"center": [0.0, 0.0], "radius": 1.0}}
                    ],
                    "target": "zero",
                    "tol": 0.1
                }
            ]
        }"#,
    );
    let (code, _, stderr) = run_cli(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("excludes 0"), "{stderr}");
    assert!(stderr.contains("jobs[0].variable_factors"), "{stderr}");
}

#[test]
fn malformed_json_and_missing_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    write(&cfg, "{ not json");
    let (code, _, stderr) = run_cli(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("config parse error"), "{stderr}");

    let missing = dir.path().join("nope.json");
    let (code, _, stderr) = run_cli(&["run", missing.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("cannot read config"), "{stderr}");
}

#[test]
fn verify_round_trip_and_tamper_detection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("easy.json");
    let report_path = dir.path().join("easy.report.json");
    write(&cfg, EASY_CONFIG);
    let (code, _, _) = run_cli(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);

    let (code, stdout, _) = run_cli(&[
        "verify",
        report_path.to_str().unwrap(),
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("verified 1 certified job"), "{stdout}");

    // Corrupt one stored coefficient: the audit must exit 1 and name job 0.
    let mut report = RunReport::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    report.coefficients[0].terms[0].re += 1.0;
    write(&report_path, &report.to_json_pretty());
    let (code, stdout, _) = run_cli(&[
        "verify",
        report_path.to_str().unwrap(),
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("[0]"), "{stdout}");
}

#[test]
fn hand_written_zero_report_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = r#"{
        "dimension": 1,
        "enumeration": "graded-lex",
        "mu": {"arith": {"start": 3, "step": 5}},
        "jobs": [
            {
                "variable_factors": [{"disc": {"center": [2.0, 0.0], "radius": 1.0}}],
                "target": "zero",
                "tol": 0.1
            }
        ],
        "options": {"verify_per_factor": 32}
    }"#;
    let cfg = dir.path().join("zero.json");
    write(&cfg, cfg_text);
    // An all-zero sequence checked out at the first checkpoint matches the
    // zero target exactly, so a report claiming error 0 must audit clean.
    let report = RunReport {
        version: "0.0.0".to_owned(),
        config: RunConfig::from_json(cfg_text).unwrap(),
        jobs: vec![JobReport {
            index: 0,
            status: JobStatus::Certified,
            message: None,
            record: Some(JobRecord {
                lambda: 3,
                certified_error: 0.0,
                i0: 0,
                l_plus_1: 0,
                monomial_sup: 1.0,
                degrees: vec![0],
                fitted_error: 0.0,
                condition_flag: false,
            }),
            seconds: 0.0,
        }],
        coefficients: (0..=3)
            .map(|k| CoefficientRecord {
                k,
                n_k: vec![k as u32],
                terms: vec![],
            })
            .collect(),
        total_seconds: 0.0,
    };
    let report_path = dir.path().join("zero.report.json");
    write(&report_path, &report.to_json_pretty());
    let (code, stdout, stderr) = run_cli(&[
        "verify",
        report_path.to_str().unwrap(),
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
}

#[test]
fn failed_job_exits_one_but_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hard.json");
    write(
        &cfg,
        r#"{
            "dimension": 1,
            "enumeration": "graded-lex",
            "mu": "all",
            "jobs": [
                {
                    "variable_factors": [{"disc": {"center": [2.0, 0.0], "radius": 1.0}}],
                    "target": "exp-sum",
                    "tol": 1e-12
                }
            ],
            "options": {"max_basis": 2, "stagnation_rounds": 1, "verify_per_factor": 16}
        }"#,
    );
    let (code, stdout, _) = run_cli(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("job 0: failed"), "{stdout}");
    let report_path = dir.path().join("hard.report.json");
    let report = RunReport::from_json(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(report.jobs[0].status, JobStatus::Failed);
    assert!(report.jobs[0].message.is_some());
}

#[test]
fn dump_grid_writes_per_point_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("easy.json");
    let dump = dir.path().join("grid.csv");
    write(&cfg, EASY_CONFIG);
    let (code, _, _) = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--dump-grid",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&dump).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("job,z1_re,z1_im,abs_error"));
    assert_eq!(lines.count(), 64);
}

#[test]
fn seed_check_and_max_points_flags_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("easy.json");
    write(&cfg, EASY_CONFIG);
    let (code, stdout, _) = run_cli(&[
        "run",
        cfg.to_str().unwrap(),
        "--seed-check",
        "--max-points",
        "64",
    ]);
    assert_eq!(code, 0, "{stdout}");
    let report_path = dir.path().join("easy.report.json");
    let (code, stdout, _) = run_cli(&[
        "verify",
        report_path.to_str().unwrap(),
        cfg.to_str().unwrap(),
        "--max-points",
        "64",
    ]);
    assert_eq!(code, 0, "{stdout}");
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, stderr) = run_cli(&["frobnicate"]);
    assert_eq!(code, 2, "{stderr}");
    let (code, _, _) = run_cli(&["run"]);
    assert_eq!(code, 2);
}
