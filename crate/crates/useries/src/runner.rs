//! Orchestration behind the command-line verbs: execute a configured
//! construction into a report, optionally dump per-point verification
//! errors, and audit an existing report against its configuration.

use std::time::Instant;

use thiserror::Error;

use crate::compacta::product_grid;
use crate::config::{CompiledRun, ConfigError, RunConfig};
use crate::constructor::{
    extend_for_job, verify_job, ApproximationJob, ConstructionError, ConstructionState,
};
use crate::report::{
    coefficient_records, sequence_from_records, JobReport, JobStatus, ReportError, RunReport,
};
use crate::series::partial_sum_eval;

/// Acceptance threshold for an audit: a fresh error may exceed the recorded
/// one by at most this factor before the job counts as a mismatch.
pub const VERIFY_SLACK: f64 = 1.5;

/// Command-line switches that adjust a run without editing the config file.
#[derive(Debug, Clone, Default)]
pub struct RunFlags {
    /// Re-check construction invariants (prefix immutability, padding nullity).
    pub seed_check: bool,
    /// Cap every sampling grid at this many points.
    pub max_points: Option<u64>,
    /// Collect a per-point error table over the verification grid.
    pub dump_grid: bool,
}

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Report(#[from] ReportError),
}

/// Everything `run` produces: the report, the overall verdict, and the
/// optional CSV error table.
#[derive(Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub all_certified: bool,
    pub grid_dump: Option<String>,
}

/// Audit verdict: indices of jobs whose fresh error exceeds the slack.
#[derive(Debug, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub checked: usize,
    pub failures: Vec<usize>,
}

/// Compiles and executes the configured schedule, timing each job.
pub fn execute_run(config: &RunConfig, flags: &RunFlags) -> Result<RunOutput, RunnerError> {
    let mut compiled = config.compile()?;
    apply_flags(&mut compiled, flags);
    let started = Instant::now();
    let mut state = ConstructionState::new(config.parameters);
    let mut jobs = Vec::with_capacity(compiled.jobs.len());
    let mut aborted = false;
    for (index, job) in compiled.jobs.iter().enumerate() {
        if aborted {
            jobs.push(JobReport {
                index,
                status: JobStatus::Skipped,
                message: Some("not attempted: an earlier job failed".to_owned()),
                record: None,
                seconds: 0.0,
            });
            continue;
        }
        let job_start = Instant::now();
        let outcome = extend_for_job(
            &mut state,
            job,
            &compiled.enumeration,
            &compiled.transform,
            &compiled.mu,
            &compiled.options,
        );
        let seconds = job_start.elapsed().as_secs_f64();
        match outcome {
            Ok(record) => jobs.push(JobReport {
                index,
                status: JobStatus::Certified,
                message: None,
                record: Some(record),
                seconds,
            }),
            Err(err) => {
                let record = match &err {
                    ConstructionError::NotCertified { record, .. } => Some((**record).clone()),
                    _ => None,
                };
                jobs.push(JobReport {
                    index,
                    status: JobStatus::Failed,
                    message: Some(err.to_string()),
                    record,
                    seconds,
                });
                if !compiled.options.continue_on_failure {
                    aborted = true;
                }
            }
        }
    }
    let all_certified = jobs.iter().all(|j| j.status == JobStatus::Certified);
    let grid_dump = if flags.dump_grid {
        Some(render_grid_dump(
            &compiled,
            &state,
            &jobs,
            config.parameters,
        ))
    } else {
        None
    };
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.clone(),
        jobs,
        coefficients: coefficient_records(state.coefficients(), &compiled.enumeration),
        total_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        report,
        all_certified,
        grid_dump,
    })
}

/// Recomputes every certified job's error on a fresh grid at twice the
/// verification density and compares against the recorded value.
pub fn execute_verify(
    report: &RunReport,
    config: &RunConfig,
    flags: &RunFlags,
) -> Result<VerifyOutcome, RunnerError> {
    let mut compiled = config.compile()?;
    apply_flags(&mut compiled, flags);
    let a = sequence_from_records(
        &report.coefficients,
        config.parameters,
        &compiled.enumeration,
    )?;
    let density = compiled.options.verify_per_factor.saturating_mul(2);
    let mut checked = 0;
    let mut failures = Vec::new();
    for job_report in &report.jobs {
        if job_report.status != JobStatus::Certified {
            continue;
        }
        let record = job_report.record.as_ref().ok_or_else(|| {
            ReportError(format!(
                "jobs[{}]: certified status without a record",
                job_report.index
            ))
        })?;
        let job = compiled.jobs.get(job_report.index).ok_or_else(|| {
            ReportError(format!(
                "jobs[{}]: index out of range for the supplied config",
                job_report.index
            ))
        })?;
        checked += 1;
        let fresh = verify_job(
            &a,
            job,
            &compiled.enumeration,
            &compiled.transform,
            record.lambda,
            density,
        );
        match fresh {
            Ok(err) if err <= VERIFY_SLACK * record.certified_error => {}
            _ => failures.push(job_report.index),
        }
    }
    Ok(VerifyOutcome { checked, failures })
}

fn apply_flags(compiled: &mut CompiledRun, flags: &RunFlags) {
    if flags.seed_check {
        compiled.options.check_invariants = true;
    }
    if let Some(n) = flags.max_points {
        let o = &mut compiled.options;
        o.max_verify_points = o.max_verify_points.min(n);
        o.approx.max_fit_points = o.approx.max_fit_points.min(n);
        o.approx.max_cert_points = o.approx.max_cert_points.min(n);
    }
}

/// CSV with one row per verification-grid point of each certified job:
/// the point's coordinates and |S_λ − target| there.
fn render_grid_dump(
    compiled: &CompiledRun,
    state: &ConstructionState,
    jobs: &[JobReport],
    r: usize,
) -> String {
    let d = compiled.enumeration.dimension();
    let mut csv = String::from("job");
    for p in 1..=r {
        csv.push_str(&format!(",w{p}_re,w{p}_im"));
    }
    for v in 1..=d {
        csv.push_str(&format!(",z{v}_re,z{v}_im"));
    }
    csv.push_str(",abs_error\n");
    for job_report in jobs {
        let (Some(record), JobStatus::Certified) = (&job_report.record, job_report.status) else {
            continue;
        };
        let job = &compiled.jobs[job_report.index];
        for (point, error) in job_errors(compiled, state, job, record.lambda, r) {
            csv.push_str(&job_report.index.to_string());
            for c in point {
                csv.push_str(&format!(",{},{}", c.re, c.im));
            }
            csv.push_str(&format!(",{error}\n"));
        }
    }
    csv
}

fn job_errors(
    compiled: &CompiledRun,
    state: &ConstructionState,
    job: &ApproximationJob,
    lambda: u64,
    r: usize,
) -> Vec<(Vec<num_complex::Complex64>, f64)> {
    let arity = job.param_compact.arity() + job.var_compact.arity();
    let mut counts = vec![compiled.options.verify_per_factor.max(2); arity];
    while counts.iter().map(|&c| c as u128).product::<u128>()
        > compiled.options.max_verify_points as u128
    {
        let v = (0..counts.len())
            .filter(|&v| counts[v] > 2)
            .max_by_key(|&v| counts[v])
            .expect("dump grid cannot shrink below 2 points per factor");
        counts[v] /= 2;
    }
    let mut samples = job.param_compact.factor_samples(&counts[..r], 0.25);
    samples.extend(job.var_compact.factor_samples(&counts[r..], 0.25));
    let grid = product_grid(&samples, u64::MAX).expect("dump grid already capped");
    let sums = partial_sum_eval(
        state.coefficients(),
        &compiled.transform,
        &compiled.enumeration,
        lambda,
        &grid,
    );
    grid.points()
        .zip(&sums)
        .map(|(pt, s)| {
            let (w, z) = pt.split_at(r);
            let error = if job.target.in_domain(w, z) {
                (job.target.eval(w, z) - s).norm()
            } else {
                f64::NAN
            };
            (pt.to_vec(), error)
        })
        .collect()
}
