//! Run reports: serialized output of a construction run, and the round trip
//! from a report's coefficient block back into a coefficient sequence for
//! independent verification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::constructor::JobRecord;
use crate::enumeration::{Enumeration, MultiIndex};
use crate::series::{CoefficientSequence, ParamPolynomial};

#[derive(Debug, Error, PartialEq)]
#[error("{0}")]
pub struct ReportError(pub String);

/// Full output of one `run` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    /// Crate version that produced the report.
    pub version: String,
    /// Echo of the configuration the run was started with.
    pub config: RunConfig,
    pub jobs: Vec<JobReport>,
    /// Built coefficients in increasing slot order; exact bit-level values.
    pub coefficients: Vec<CoefficientRecord>,
    pub total_seconds: f64,
}

/// Outcome of one scheduled job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobReport {
    pub index: usize,
    pub status: JobStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub record: Option<JobRecord>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Certified,
    Failed,
    Skipped,
}

/// One stored coefficient a_k together with its exponent slot N_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub k: u64,
    #[serde(rename = "N_k")]
    pub n_k: Vec<u32>,
    /// Parameter-monomial terms in increasing exponent order; empty for an
    /// explicit zero coefficient.
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub w_exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

impl RunReport {
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError(format!("report parse error: {e}")))
    }

    /// Deterministic pretty serialization: struct field order is fixed and
    /// all maps were flattened into sorted vectors at build time.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Flattens a coefficient sequence into sorted, exact serialization records.
pub fn coefficient_records(a: &CoefficientSequence, e: &Enumeration) -> Vec<CoefficientRecord> {
    a.entries()
        .iter()
        .map(|(&k, poly)| CoefficientRecord {
            k,
            n_k: e.enumerate(k).entries().to_vec(),
            terms: poly
                .terms()
                .iter()
                .map(|(m, c)| TermRecord {
                    w_exponents: m.entries().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        })
        .collect()
}

/// Rebuilds the coefficient sequence from a report, checking that each slot
/// exponent matches the enumeration the verifying config supplies.
pub fn sequence_from_records(
    records: &[CoefficientRecord],
    param_arity: usize,
    e: &Enumeration,
) -> Result<CoefficientSequence, ReportError> {
    let mut a = CoefficientSequence::new(param_arity);
    let mut last_k: Option<u64> = None;
    for rec in records {
        if let Some(prev) = last_k {
            if rec.k <= prev {
                return Err(ReportError(format!(
                    "coefficients: slot {} repeats or breaks increasing order",
                    rec.k
                )));
            }
        }
        last_k = Some(rec.k);
        let expected = e.enumerate(rec.k);
        if expected.entries() != rec.n_k.as_slice() {
            return Err(ReportError(format!(
                "coefficients: slot {} records exponent {:?} but the configured \
                 enumeration assigns {:?}",
                rec.k,
                rec.n_k,
                expected.entries()
            )));
        }
        let mut poly = ParamPolynomial::zero(param_arity);
        for term in &rec.terms {
            if term.w_exponents.len() != param_arity {
                return Err(ReportError(format!(
                    "coefficients: slot {} has a term with {} parameter exponents, \
                     expected {}",
                    rec.k,
                    term.w_exponents.len(),
                    param_arity
                )));
            }
            poly.add_term(
                MultiIndex(term.w_exponents.clone()),
                Complex64::new(term.re, term.im),
            );
        }
        a.set(rec.k, poly);
    }
    Ok(a)
}
