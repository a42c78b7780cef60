//! Command-line front end: `run` executes a configured construction and
//! writes a JSON report; `verify` audits an existing report against its
//! configuration on a fresh, denser grid.
//!
//! Exit codes: 0 = success, 1 = a job failed or an audit found a mismatch,
//! 2 = configuration, report, or file errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use useries::config::RunConfig;
use useries::report::{JobStatus, RunReport};
use useries::runner::{execute_run, execute_verify, RunFlags, VERIFY_SLACK};

#[derive(Parser)]
#[command(
    name = "useries",
    version,
    about = "Builds one power-series coefficient sequence \
whose partial sums approximate a schedule of target functions on product compacta, \
with certified sup-norm errors."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the schedule in a config file and write a JSON report.
    Run {
        /// Path to the JSON run configuration.
        config: PathBuf,
        /// Report destination; defaults to the config path with a
        /// `.report.json` extension.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write a CSV of per-point errors on the verification grid.
        #[arg(long)]
        dump_grid: Option<PathBuf>,
        /// Re-check construction invariants at every step.
        #[arg(long)]
        seed_check: bool,
        /// Cap every sampling grid at this many points.
        #[arg(long)]
        max_points: Option<u64>,
    },
    /// Re-check a report's certified errors against its configuration.
    Verify {
        /// Report produced by a previous `run`.
        report: PathBuf,
        /// The configuration to audit against.
        config: PathBuf,
        /// Cap every sampling grid at this many points.
        #[arg(long)]
        max_points: Option<u64>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            report,
            dump_grid,
            seed_check,
            max_points,
        } => run_command(&config, report, dump_grid, seed_check, max_points),
        Command::Verify {
            report,
            config,
            max_points,
        } => verify_command(&report, &config, max_points),
    }
}

fn run_command(
    config_path: &Path,
    report_path: Option<PathBuf>,
    dump_grid: Option<PathBuf>,
    seed_check: bool,
    max_points: Option<u64>,
) -> ExitCode {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let flags = RunFlags {
        seed_check,
        max_points,
        dump_grid: dump_grid.is_some(),
    };
    let output = match execute_run(&config, &flags) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for job in &output.report.jobs {
        match job.status {
            JobStatus::Certified => {
                let r = job.record.as_ref().expect("certified jobs carry a record");
                println!(
                    "job {}: certified at lambda = {} with error {:.6e} ({:.3} s)",
                    job.index, r.lambda, r.certified_error, job.seconds
                );
            }
            JobStatus::Failed => println!(
                "job {}: failed: {}",
                job.index,
                job.message.as_deref().unwrap_or("unknown error")
            ),
            JobStatus::Skipped => println!("job {}: skipped", job.index),
        }
    }
    let report_path = report_path.unwrap_or_else(|| config_path.with_extension("report.json"));
    if let Err(e) = std::fs::write(&report_path, output.report.to_json_pretty()) {
        eprintln!("error: cannot write report {}: {e}", report_path.display());
        return ExitCode::from(2);
    }
    println!("report written to {}", report_path.display());
    if let (Some(path), Some(csv)) = (dump_grid, &output.grid_dump) {
        if let Err(e) = std::fs::write(&path, csv) {
            eprintln!("error: cannot write grid dump {}: {e}", path.display());
            return ExitCode::from(2);
        }
        println!("grid dump written to {}", path.display());
    }
    if output.all_certified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn verify_command(report_path: &Path, config_path: &Path, max_points: Option<u64>) -> ExitCode {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let report_text = match std::fs::read_to_string(report_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read report {}: {e}", report_path.display());
            return ExitCode::from(2);
        }
    };
    let report = match RunReport::from_json(&report_text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let flags = RunFlags {
        max_points,
        ..RunFlags::default()
    };
    match execute_verify(&report, &config, &flags) {
        Ok(verdict) if verdict.failures.is_empty() => {
            println!(
                "verified {} certified job(s) within {VERIFY_SLACK}x of the recorded errors",
                verdict.checked
            );
            ExitCode::SUCCESS
        }
        Ok(verdict) => {
            println!(
                "verification failed for job(s) {:?}: fresh error above {VERIFY_SLACK}x \
                 the recorded value",
                verdict.failures
            );
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read config {}: {e}", path.display());
        ExitCode::from(2)
    })?;
    RunConfig::from_json(&text).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
