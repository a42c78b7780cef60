//! Schedule-driven construction of a universal coefficient sequence.
//!
//! Each job asks for one designated partial sum S_λ to approximate a target
//! on F × T within a tolerance. A step picks the zero-free factor i₀, finds
//! the largest used exponent l there, fits the current residual over the
//! basis shifted by z_{i₀}^{l+1} (so new monomials land strictly beyond the
//! frozen prefix), writes the solved coefficients plus zero padding up to a
//! λ from the checkpoint set, and certifies the result on an independent
//! grid. Earlier coefficients are never touched again.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{approximate_shifted, ApproxError, ApproxOptions};
use crate::compacta::{product_grid, ProductCompact};
use crate::enumeration::{Enumeration, MuSet, MultiIndex};
use crate::series::{
    monomial_value, partial_sum_eval, CoefficientSequence, ParamPolynomial, TargetFunction,
};
use crate::transforms::SequenceTransform;

/// Displayed-coefficient modulus allowed at padded indices.
pub const PADDING_NULL_TOL: f64 = 1e-12;

/// One approximation demand: target, compacta, tolerance.
#[derive(Debug, Clone)]
pub struct ApproximationJob {
    /// Parameter compact F (arity r, possibly the empty product).
    pub param_compact: ProductCompact,
    /// Variable compact T (arity d ≥ 1).
    pub var_compact: ProductCompact,
    pub target: TargetFunction,
    pub tol: f64,
}

impl ApproximationJob {
    /// Checks tolerance positivity and arity agreement with (r, d).
    pub fn validate(&self, r: usize, d: usize) -> Result<(), ConstructionError> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(ConstructionError::NonPositiveTolerance(self.tol));
        }
        let mismatches = [
            (self.param_compact.arity(), r, "parameter compact"),
            (self.var_compact.arity(), d, "variable compact"),
            (self.target.param_arity(), r, "target parameter arity"),
            (self.target.var_arity(), d, "target variable arity"),
        ];
        for (found, expected, what) in mismatches {
            if found != expected {
                return Err(ConstructionError::ArityMismatch {
                    detail: format!("{what} has arity {found}, expected {expected}"),
                });
            }
        }
        Ok(())
    }
}

/// Outcome bookkeeping for one completed construction step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    /// Designated index λ, drawn from the checkpoint set.
    pub lambda: u64,
    /// Sup |S_λ − target| on the independent verification grid.
    pub certified_error: f64,
    /// Zero-free factor used for the exponent shift (0-based).
    pub i0: usize,
    /// Exponent of the shift z_{i₀}^{l+1}.
    pub l_plus_1: u32,
    /// Sup of |z^{l+1}_{i₀}| over T.
    pub monomial_sup: f64,
    /// Per-variable exponent bounds the inner fit ended at.
    pub degrees: Vec<u32>,
    /// Inner fit residual on its fitting grid.
    pub fitted_error: f64,
    /// Inner fit flagged marginal conditioning.
    pub condition_flag: bool,
}

/// The growing sequence plus its frozen frontier and step history.
#[derive(Debug, Clone)]
pub struct ConstructionState {
    a: CoefficientSequence,
    frontier: Option<u64>,
    history: Vec<JobRecord>,
}

impl ConstructionState {
    pub fn new(param_arity: usize) -> Self {
        ConstructionState {
            a: CoefficientSequence::new(param_arity),
            frontier: None,
            history: Vec::new(),
        }
    }

    pub fn coefficients(&self) -> &CoefficientSequence {
        &self.a
    }

    /// Largest written index; `None` before the first job.
    pub fn frontier(&self) -> Option<u64> {
        self.frontier
    }

    pub fn history(&self) -> &[JobRecord] {
        &self.history
    }
}

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("no factor of the variable compact excludes 0; pick compacta with a zero-free factor")]
    NoZeroFreeFactor,
    #[error("job arity mismatch: {detail}")]
    ArityMismatch { detail: String },
    #[error("job tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error("partial sum certified at {certified:e}, above the job tolerance {tol:e}")]
    NotCertified {
        certified: f64,
        tol: f64,
        record: Box<JobRecord>,
    },
}

/// Knobs for the construction loop and its verification grids.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub approx: ApproxOptions,
    /// Verification samples per factor before capping.
    pub verify_per_factor: usize,
    /// Cap on total verification-grid points.
    pub max_verify_points: u64,
    /// Relative sup change below which grid doubling stops.
    pub doubling_threshold: f64,
    /// Run the bit-immutability and padding-nullity assertions.
    pub check_invariants: bool,
    /// Keep processing later jobs after a failure.
    pub continue_on_failure: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            approx: ApproxOptions::default(),
            verify_per_factor: 1024,
            max_verify_points: 1 << 18,
            doubling_threshold: 1e-3,
            check_invariants: false,
            continue_on_failure: false,
        }
    }
}

/// Runs one density-lemma step, mutating `state` in place.
///
/// On `NotCertified` the coefficients stay written (the certificate failed,
/// not the construction); on any other error the state is untouched.
pub fn extend_for_job(
    state: &mut ConstructionState,
    job: &ApproximationJob,
    e: &Enumeration,
    b: &SequenceTransform,
    mu: &MuSet,
    opts: &BuildOptions,
) -> Result<JobRecord, ConstructionError> {
    let r = state.a.param_arity();
    let d = e.dimension();
    job.validate(r, d)?;

    let i0 = job
        .var_compact
        .zero_free_factor()
        .ok_or(ConstructionError::NoZeroFreeFactor)?;
    let l_plus_1: u32 = match state.frontier {
        None => 0,
        Some(n0) => {
            let l = (0..=n0)
                .map(|k| e.enumerate(k).entry(i0))
                .max()
                .unwrap_or(0);
            l + 1
        }
    };
    let shift = MultiIndex::unit(d, i0, l_plus_1);
    let m_sup = job.var_compact.monomial_sup(shift.entries());

    // Residual target − S_frontier, with the transform prefix computed once.
    let prefix: Vec<(ParamPolynomial, MultiIndex)> = match state.frontier {
        None => Vec::new(),
        Some(n0) => (0..=n0)
            .map(|k| (b.apply(&state.a, k), e.enumerate(k)))
            .filter(|(bk, _)| !bk.is_zero())
            .collect(),
    };
    let target = &job.target;
    let residual = |w: &[Complex64], z: &[Complex64]| -> Complex64 {
        let sum: Complex64 = prefix
            .iter()
            .map(|(bk, m)| bk.eval(w) * monomial_value(z, m))
            .sum();
        target.eval(w, z) - sum
    };
    let guard = |w: &[Complex64], z: &[Complex64]| target.in_domain(w, z);

    let fit = approximate_shifted(
        &job.param_compact,
        &job.var_compact,
        &residual,
        Some(&guard),
        job.tol / 2.0,
        shift.entries(),
        &opts.approx,
    )?;

    let snapshot = opts.check_invariants.then(|| bit_snapshot(&state.a));

    // Remap fitted monomials to series indices; all must lie past the frontier.
    let mut fitted: BTreeMap<u64, ParamPolynomial> = BTreeMap::new();
    for (zm, coeff) in fit.polynomial.terms() {
        let k = e.index_of(zm);
        assert!(
            state.frontier.is_none_or(|n0| k > n0),
            "fitted monomial {zm:?} remapped to frozen index {k}"
        );
        fitted.insert(k, coeff.clone());
    }
    let start = state.frontier.map_or(0, |n0| n0 + 1);
    let floor = fitted.keys().next_back().copied().unwrap_or(0).max(start);
    let lambda = mu.next_at_least(floor);
    assert!(
        mu.contains(lambda),
        "chosen index must belong to the checkpoint set"
    );

    // One increasing sweep writes fitted coefficients and zero padding alike,
    // so each solve sees every earlier coefficient regardless of transform.
    let mut padded: Vec<u64> = Vec::new();
    for k in start..=lambda {
        let goal = match fitted.get(&k) {
            Some(coeff) => coeff.clone(),
            None => {
                padded.push(k);
                ParamPolynomial::zero(r)
            }
        };
        let ck = b.solve_last(&state.a, k, &goal);
        state.a.set(k, ck);
    }

    if let Some(before) = snapshot {
        check_prefix_immutable(&before, &state.a, start);
        for &k in &padded {
            let displayed = b.apply(&state.a, k);
            assert!(
                displayed.max_coeff_abs() < PADDING_NULL_TOL,
                "padding at index {k} displays a coefficient of modulus {}",
                displayed.max_coeff_abs()
            );
        }
    }

    let certified = doubling_sup(&state.a, job, e, b, lambda, opts)?;
    let record = JobRecord {
        lambda,
        certified_error: certified,
        i0,
        l_plus_1,
        monomial_sup: m_sup,
        degrees: fit.degrees_used,
        fitted_error: fit.fitted_error,
        condition_flag: fit.condition_flag,
    };
    state.frontier = Some(lambda);
    state.history.push(record.clone());
    if certified < job.tol {
        Ok(record)
    } else {
        Err(ConstructionError::NotCertified {
            certified,
            tol: job.tol,
            record: Box::new(record),
        })
    }
}

/// Per-job result inside a [`ConstructionResult`].
#[derive(Debug, Clone)]
pub enum JobOutcome {
    Certified(JobRecord),
    Failed {
        message: String,
        record: Option<JobRecord>,
    },
    /// Not attempted because an earlier job failed and aborting was requested.
    Skipped,
}

impl JobOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, JobOutcome::Certified(_))
    }
}

#[derive(Debug, Clone)]
pub struct ConstructionResult {
    pub state: ConstructionState,
    pub outcomes: Vec<JobOutcome>,
}

/// Folds [`extend_for_job`] over the schedule in order.
pub fn build(
    jobs: &[ApproximationJob],
    e: &Enumeration,
    b: &SequenceTransform,
    mu: &MuSet,
    opts: &BuildOptions,
) -> ConstructionResult {
    let r = jobs.first().map_or(0, |j| j.param_compact.arity());
    let mut state = ConstructionState::new(r);
    let mut outcomes = Vec::with_capacity(jobs.len());
    let mut aborted = false;
    for job in jobs {
        if aborted {
            outcomes.push(JobOutcome::Skipped);
            continue;
        }
        match extend_for_job(&mut state, job, e, b, mu, opts) {
            Ok(record) => outcomes.push(JobOutcome::Certified(record)),
            Err(err) => {
                let record = match &err {
                    ConstructionError::NotCertified { record, .. } => Some((**record).clone()),
                    _ => None,
                };
                outcomes.push(JobOutcome::Failed {
                    message: err.to_string(),
                    record,
                });
                if !opts.continue_on_failure {
                    aborted = true;
                }
            }
        }
    }
    ConstructionResult { state, outcomes }
}

/// Pure re-check: sup |S_λ(a) − target| on a fresh grid at the given
/// per-factor density; usable by external auditors of a serialized result.
pub fn verify_job(
    a: &CoefficientSequence,
    job: &ApproximationJob,
    e: &Enumeration,
    b: &SequenceTransform,
    lambda: u64,
    density: usize,
) -> Result<f64, ConstructionError> {
    let arity = job.param_compact.arity() + job.var_compact.arity();
    let mut counts = vec![density.max(1); arity];
    cap_counts(&mut counts, 1 << 22);
    grid_sup(a, job, e, b, lambda, &counts, 0.125)
}

/// Verification sup with per-factor doubling until the value stabilizes.
fn doubling_sup(
    a: &CoefficientSequence,
    job: &ApproximationJob,
    e: &Enumeration,
    b: &SequenceTransform,
    lambda: u64,
    opts: &BuildOptions,
) -> Result<f64, ConstructionError> {
    let arity = job.param_compact.arity() + job.var_compact.arity();
    let mut counts = vec![opts.verify_per_factor.max(2); arity];
    cap_counts(&mut counts, opts.max_verify_points);
    let mut sup = grid_sup(a, job, e, b, lambda, &counts, 0.25)?;
    loop {
        let doubled: Vec<usize> = counts.iter().map(|&c| c * 2).collect();
        let total: u128 = doubled.iter().map(|&c| c as u128).product();
        if total > opts.max_verify_points as u128 {
            return Ok(sup);
        }
        let next = grid_sup(a, job, e, b, lambda, &doubled, 0.25)?;
        let settled = (next - sup).abs() <= opts.doubling_threshold * next.max(f64::MIN_POSITIVE);
        sup = sup.max(next);
        if settled {
            return Ok(sup);
        }
        counts = doubled;
    }
}

fn grid_sup(
    a: &CoefficientSequence,
    job: &ApproximationJob,
    e: &Enumeration,
    b: &SequenceTransform,
    lambda: u64,
    counts: &[usize],
    offset: f64,
) -> Result<f64, ConstructionError> {
    let r = job.param_compact.arity();
    let mut samples = job.param_compact.factor_samples(&counts[..r], offset);
    samples.extend(job.var_compact.factor_samples(&counts[r..], offset));
    let grid = product_grid(&samples, u64::MAX).map_err(ApproxError::Grid)?;
    let sums = partial_sum_eval(a, b, e, lambda, &grid);
    let mut sup: f64 = 0.0;
    for (pt, s) in grid.points().zip(&sums) {
        let (w, z) = pt.split_at(r);
        let value = job.target.eval(w, z);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(ConstructionError::Approx(ApproxError::Evaluation {
                detail: format!("non-finite target value at (w, z) = ({w:?}, {z:?})"),
            }));
        }
        sup = sup.max((value - s).norm());
    }
    Ok(sup)
}

fn cap_counts(counts: &mut [usize], cap: u64) {
    loop {
        let total: u128 = counts.iter().map(|&c| c as u128).product();
        if total <= cap as u128 {
            return;
        }
        let v = (0..counts.len())
            .filter(|&v| counts[v] > 2)
            .max_by_key(|&v| counts[v])
            .expect("verification grid cannot shrink below 2 points per factor");
        counts[v] /= 2;
    }
}

type BitTerms = Vec<(MultiIndex, u64, u64)>;

fn bit_snapshot(a: &CoefficientSequence) -> BTreeMap<u64, BitTerms> {
    a.entries()
        .iter()
        .map(|(&k, p)| {
            let terms = p
                .terms()
                .iter()
                .map(|(m, c)| (m.clone(), c.re.to_bits(), c.im.to_bits()))
                .collect();
            (k, terms)
        })
        .collect()
}

fn check_prefix_immutable(
    before: &BTreeMap<u64, BitTerms>,
    after: &CoefficientSequence,
    start: u64,
) {
    let now = bit_snapshot(after);
    for (k, terms) in before {
        assert!(
            *k < start,
            "snapshot holds an index at or past the write window"
        );
        assert_eq!(
            now.get(k),
            Some(terms),
            "coefficient at frozen index {k} changed bits"
        );
    }
}
