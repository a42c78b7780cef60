//! Run configuration: the JSON schema for a construction run, semantic
//! validation with field-path diagnostics, and compilation into the
//! enumeration, checkpoint set, transform, job list, and budgets that the
//! constructor consumes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compacta::{PlanarCompact, ProductCompact};
use crate::constructor::{ApproximationJob, BuildOptions};
use crate::enumeration::{Enumeration, MuSet, MultiIndex};
use crate::series::{ParamPolynomial, PolyWZ, TargetFunction};
use crate::transforms::SequenceTransform;

/// Guard slack for targets with poles: points closer than this to a pole are
/// reported as outside the domain instead of being evaluated.
pub const POLE_GUARD: f64 = 1e-12;

/// Validation failure; the message starts with the dotted path of the field.
#[derive(Debug, Error, PartialEq)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Top-level run description as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Number of series variables d ≥ 1.
    pub dimension: usize,
    /// Number of parameters r ≥ 0.
    #[serde(default)]
    pub parameters: usize,
    pub enumeration: EnumerationConfig,
    pub mu: MuConfig,
    #[serde(default)]
    pub transform: TransformConfig,
    pub jobs: Vec<JobConfig>,
    #[serde(default)]
    pub options: OptionsConfig,
}

/// Exponent enumeration: a named scheme or an explicit prefix table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnumerationConfig {
    /// "graded-lex" or "graded-max".
    Named(String),
    Table {
        table: TableConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    /// Leading exponent tuples, one per slot, before the automatic tail.
    pub prefix: Vec<Vec<u32>>,
}

/// Checkpoint index set: "all", an arithmetic progression, or a finite list
/// followed by an arithmetic tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuConfig {
    /// "all".
    Named(String),
    Arith {
        arith: ArithConfig,
    },
    ListArith {
        #[serde(rename = "list+arith")]
        list_arith: ListArithConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArithConfig {
    pub start: u64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListArithConfig {
    pub list: Vec<u64>,
    pub start: u64,
    pub step: u64,
}

/// Coefficient transform: "identity", "cesaro", or an explicit row table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransformConfig {
    Named(String),
    Custom { custom: CustomTransformConfig },
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig::Named("identity".to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTransformConfig {
    /// Row index (as a decimal string key) to its coefficients c_k0..c_kk,
    /// each complex value written as [re, im]. Absent rows act as identity.
    pub rows: BTreeMap<String, Vec<[f64; 2]>>,
}

/// One planar factor of a product compact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FactorConfig {
    Disc { center: [f64; 2], radius: f64 },
    Segment { a: [f64; 2], b: [f64; 2] },
    Polygon { vertices: Vec<[f64; 2]> },
}

/// One approximation job of the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Parameter compact F, one factor per parameter (empty when r = 0).
    #[serde(default)]
    pub parameter_factors: Vec<FactorConfig>,
    /// Variable compact T, one factor per series variable.
    pub variable_factors: Vec<FactorConfig>,
    pub target: TargetConfig,
    /// Certified sup-norm error to reach on F × T.
    pub tol: f64,
}

/// Target function tag. Coordinate indices are 1-based in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetConfig {
    /// "zero", "one", or "exp-sum" (exp of the sum of all variables).
    Named(String),
    Coordinate {
        coordinate: usize,
    },
    Reciprocal {
        #[serde(rename = "reciprocal-coordinate")]
        reciprocal_coordinate: usize,
    },
    Cauchy {
        cauchy: CauchyConfig,
    },
    Poly {
        poly: PolyConfig,
    },
}

/// 1/(z_i − w_j) with 1-based factor indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    pub z: usize,
    pub w: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyConfig {
    pub terms: Vec<PolyTermConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTermConfig {
    pub w_exponents: Vec<u32>,
    pub z_exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Optional grid and budget overrides; absent fields keep library defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsConfig {
    pub start_degree: Option<u32>,
    pub samples_per_degree: Option<usize>,
    pub min_samples_per_factor: Option<usize>,
    pub cert_multiplier: Option<usize>,
    pub max_basis: Option<usize>,
    pub max_fit_points: Option<u64>,
    pub max_cert_points: Option<u64>,
    pub stagnation_rounds: Option<usize>,
    pub verify_per_factor: Option<usize>,
    pub max_verify_points: Option<u64>,
    pub continue_on_failure: Option<bool>,
}

/// Everything the constructor needs, produced by `RunConfig::compile`.
#[derive(Debug)]
pub struct CompiledRun {
    pub enumeration: Enumeration,
    pub mu: MuSet,
    pub transform: SequenceTransform,
    pub jobs: Vec<ApproximationJob>,
    pub options: BuildOptions,
}

impl RunConfig {
    /// Parses the JSON text; syntax errors keep serde's line/column info.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| bad(format!("config parse error: {e}")))
    }

    /// Validates every field and builds the construction inputs.
    pub fn compile(&self) -> Result<CompiledRun, ConfigError> {
        let d = self.dimension;
        let r = self.parameters;
        if d == 0 {
            return Err(bad("dimension: must be at least 1"));
        }
        let enumeration = compile_enumeration(&self.enumeration, d)?;
        let mu = compile_mu(&self.mu)?;
        let transform = compile_transform(&self.transform)?;
        if self.jobs.is_empty() {
            return Err(bad("jobs: at least one job is required"));
        }
        let mut jobs = Vec::with_capacity(self.jobs.len());
        for (j, job) in self.jobs.iter().enumerate() {
            jobs.push(compile_job(job, r, d, j)?);
        }
        let options = compile_options(&self.options)?;
        Ok(CompiledRun {
            enumeration,
            mu,
            transform,
            jobs,
            options,
        })
    }
}

fn compile_enumeration(cfg: &EnumerationConfig, d: usize) -> Result<Enumeration, ConfigError> {
    match cfg {
        EnumerationConfig::Named(tag) => match tag.as_str() {
            "graded-lex" => {
                Enumeration::graded_lex(d).map_err(|e| bad(format!("enumeration: {e}")))
            }
            "graded-max" => {
                Enumeration::graded_max(d).map_err(|e| bad(format!("enumeration: {e}")))
            }
            other => Err(bad(format!(
                "enumeration: unknown tag {other:?}; expected \"graded-lex\", \
                 \"graded-max\", or an object {{\"table\": {{\"prefix\": [...]}}}}"
            ))),
        },
        EnumerationConfig::Table { table } => {
            let prefix: Vec<MultiIndex> = table
                .prefix
                .iter()
                .map(|row| MultiIndex(row.clone()))
                .collect();
            Enumeration::new(d, crate::enumeration::EnumerationScheme::Table { prefix })
                .map_err(|e| bad(format!("enumeration.table.prefix: {e}")))
        }
    }
}

fn compile_mu(cfg: &MuConfig) -> Result<MuSet, ConfigError> {
    match cfg {
        MuConfig::Named(tag) => match tag.as_str() {
            "all" => Ok(MuSet::All),
            other => Err(bad(format!(
                "mu: unknown tag {other:?}; expected \"all\", {{\"arith\": ...}}, \
                 or {{\"list+arith\": ...}}"
            ))),
        },
        MuConfig::Arith { arith } => {
            MuSet::arithmetic(arith.start, arith.step).map_err(|e| bad(format!("mu.arith: {e}")))
        }
        MuConfig::ListArith { list_arith } => {
            MuSet::list_then_arithmetic(list_arith.list.clone(), list_arith.start, list_arith.step)
                .map_err(|e| bad(format!("mu.list+arith: {e}")))
        }
    }
}

fn compile_transform(cfg: &TransformConfig) -> Result<SequenceTransform, ConfigError> {
    match cfg {
        TransformConfig::Named(tag) => match tag.as_str() {
            "identity" => Ok(SequenceTransform::Identity),
            "cesaro" => Ok(SequenceTransform::Cesaro),
            other => Err(bad(format!(
                "transform: unknown tag {other:?}; expected \"identity\", \"cesaro\", \
                 or {{\"custom\": {{\"rows\": ...}}}}"
            ))),
        },
        TransformConfig::Custom { custom } => {
            let mut rows = BTreeMap::new();
            for (key, entries) in &custom.rows {
                let k: u64 = key.parse().map_err(|_| {
                    bad(format!(
                        "transform.custom.rows: key {key:?} is not a nonnegative integer"
                    ))
                })?;
                let row: Vec<Complex64> = entries
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                rows.insert(k, row);
            }
            SequenceTransform::custom(rows).map_err(|e| bad(format!("transform.custom: {e}")))
        }
    }
}

fn compile_factor(cfg: &FactorConfig, path: &str) -> Result<PlanarCompact, ConfigError> {
    let c = |p: &[f64; 2]| Complex64::new(p[0], p[1]);
    let built = match cfg {
        FactorConfig::Disc { center, radius } => PlanarCompact::disc(c(center), *radius),
        FactorConfig::Segment { a, b } => PlanarCompact::segment(c(a), c(b)),
        FactorConfig::Polygon { vertices } => {
            PlanarCompact::polygon(vertices.iter().map(c).collect())
        }
    };
    built.map_err(|e| bad(format!("{path}: {e}")))
}

fn compile_job(
    cfg: &JobConfig,
    r: usize,
    d: usize,
    j: usize,
) -> Result<ApproximationJob, ConfigError> {
    if cfg.parameter_factors.len() != r {
        return Err(bad(format!(
            "jobs[{j}].parameter_factors: expected {r} factors to match `parameters`, \
             found {}",
            cfg.parameter_factors.len()
        )));
    }
    if cfg.variable_factors.len() != d {
        return Err(bad(format!(
            "jobs[{j}].variable_factors: expected {d} factors to match `dimension`, \
             found {}",
            cfg.variable_factors.len()
        )));
    }
    let mut param_factors = Vec::with_capacity(r);
    for (i, f) in cfg.parameter_factors.iter().enumerate() {
        param_factors.push(compile_factor(
            f,
            &format!("jobs[{j}].parameter_factors[{i}]"),
        )?);
    }
    let mut var_factors = Vec::with_capacity(d);
    for (i, f) in cfg.variable_factors.iter().enumerate() {
        var_factors.push(compile_factor(
            f,
            &format!("jobs[{j}].variable_factors[{i}]"),
        )?);
    }
    let var_compact = ProductCompact::new(var_factors);
    if var_compact.zero_free_factor().is_none() {
        return Err(bad(format!(
            "jobs[{j}].variable_factors: every factor contains 0, but the construction \
             requires at least one variable factor that excludes 0"
        )));
    }
    if !cfg.tol.is_finite() || cfg.tol <= 0.0 {
        return Err(bad(format!(
            "jobs[{j}].tol: must be a positive finite number, got {}",
            cfg.tol
        )));
    }
    let target = compile_target(&cfg.target, r, d, j)?;
    Ok(ApproximationJob {
        param_compact: ProductCompact::new(param_factors),
        var_compact,
        target,
        tol: cfg.tol,
    })
}

fn compile_target(
    cfg: &TargetConfig,
    r: usize,
    d: usize,
    j: usize,
) -> Result<TargetFunction, ConfigError> {
    let zero = Complex64::new(0.0, 0.0);
    match cfg {
        TargetConfig::Named(tag) => match tag.as_str() {
            "zero" => Ok(TargetFunction::new("zero", r, d, move |_w, _z| zero)),
            "one" => Ok(TargetFunction::new("one", r, d, move |_w, _z| {
                Complex64::new(1.0, 0.0)
            })),
            "exp-sum" => Ok(TargetFunction::new("exp-sum", r, d, move |_w, z| {
                z.iter().sum::<Complex64>().exp()
            })),
            other => Err(bad(format!(
                "jobs[{j}].target: unknown tag {other:?}; expected \"zero\", \"one\", \
                 \"exp-sum\", {{\"coordinate\": i}}, {{\"reciprocal-coordinate\": i}}, \
                 {{\"cauchy\": {{\"z\": i, \"w\": j}}}}, or {{\"poly\": ...}}"
            ))),
        },
        TargetConfig::Coordinate { coordinate } => {
            let i = check_index(
                *coordinate,
                d,
                &format!("jobs[{j}].target.coordinate"),
                "dimension",
            )?;
            Ok(TargetFunction::new(
                format!("coordinate {coordinate}"),
                r,
                d,
                move |_w, z| z[i],
            ))
        }
        TargetConfig::Reciprocal {
            reciprocal_coordinate,
        } => {
            let i = check_index(
                *reciprocal_coordinate,
                d,
                &format!("jobs[{j}].target.reciprocal-coordinate"),
                "dimension",
            )?;
            Ok(TargetFunction::new(
                format!("reciprocal coordinate {reciprocal_coordinate}"),
                r,
                d,
                move |_w, z| z[i].inv(),
            )
            .with_guard(move |_w, z| z[i].norm() > POLE_GUARD))
        }
        TargetConfig::Cauchy { cauchy } => {
            let zi = check_index(
                cauchy.z,
                d,
                &format!("jobs[{j}].target.cauchy.z"),
                "dimension",
            )?;
            let wj = check_index(
                cauchy.w,
                r,
                &format!("jobs[{j}].target.cauchy.w"),
                "parameters",
            )?;
            Ok(TargetFunction::new(
                format!("cauchy z{} w{}", cauchy.z, cauchy.w),
                r,
                d,
                move |w, z| (z[zi] - w[wj]).inv(),
            )
            .with_guard(move |w, z| (z[zi] - w[wj]).norm() > POLE_GUARD))
        }
        TargetConfig::Poly { poly } => {
            let mut p = PolyWZ::zero(r, d);
            for (t, term) in poly.terms.iter().enumerate() {
                if term.w_exponents.len() != r {
                    return Err(bad(format!(
                        "jobs[{j}].target.poly.terms[{t}].w_exponents: expected {r} \
                         entries to match `parameters`, found {}",
                        term.w_exponents.len()
                    )));
                }
                if term.z_exponents.len() != d {
                    return Err(bad(format!(
                        "jobs[{j}].target.poly.terms[{t}].z_exponents: expected {d} \
                         entries to match `dimension`, found {}",
                        term.z_exponents.len()
                    )));
                }
                if !term.re.is_finite() || !term.im.is_finite() {
                    return Err(bad(format!(
                        "jobs[{j}].target.poly.terms[{t}]: coefficient must be finite"
                    )));
                }
                p.add_term(
                    MultiIndex(term.z_exponents.clone()),
                    ParamPolynomial::monomial(
                        MultiIndex(term.w_exponents.clone()),
                        Complex64::new(term.re, term.im),
                    ),
                );
            }
            Ok(TargetFunction::new("poly", r, d, move |w, z| p.eval(w, z)))
        }
    }
}

fn check_index(
    one_based: usize,
    arity: usize,
    path: &str,
    bound_name: &str,
) -> Result<usize, ConfigError> {
    if one_based == 0 || one_based > arity {
        return Err(bad(format!(
            "{path}: index {one_based} out of range; must be between 1 and \
             {bound_name} = {arity}"
        )));
    }
    Ok(one_based - 1)
}

fn compile_options(cfg: &OptionsConfig) -> Result<BuildOptions, ConfigError> {
    let mut opts = BuildOptions::default();
    if let Some(v) = cfg.start_degree {
        require_positive(v as u64, "options.start_degree")?;
        opts.approx.start_degree = v;
    }
    if let Some(v) = cfg.samples_per_degree {
        require_positive(v as u64, "options.samples_per_degree")?;
        opts.approx.samples_per_degree = v;
    }
    if let Some(v) = cfg.min_samples_per_factor {
        require_positive(v as u64, "options.min_samples_per_factor")?;
        opts.approx.min_samples_per_factor = v;
    }
    if let Some(v) = cfg.cert_multiplier {
        if v < 2 {
            return Err(bad(format!(
                "options.cert_multiplier: must be at least 2 so the certification grid \
                 is denser than the fitting grid, got {v}"
            )));
        }
        opts.approx.cert_multiplier = v;
    }
    if let Some(v) = cfg.max_basis {
        require_positive(v as u64, "options.max_basis")?;
        opts.approx.max_basis = v;
    }
    if let Some(v) = cfg.max_fit_points {
        require_positive(v, "options.max_fit_points")?;
        opts.approx.max_fit_points = v;
    }
    if let Some(v) = cfg.max_cert_points {
        require_positive(v, "options.max_cert_points")?;
        opts.approx.max_cert_points = v;
    }
    if let Some(v) = cfg.stagnation_rounds {
        require_positive(v as u64, "options.stagnation_rounds")?;
        opts.approx.stagnation_rounds = v;
    }
    if let Some(v) = cfg.verify_per_factor {
        require_positive(v as u64, "options.verify_per_factor")?;
        opts.verify_per_factor = v;
    }
    if let Some(v) = cfg.max_verify_points {
        require_positive(v, "options.max_verify_points")?;
        opts.max_verify_points = v;
    }
    if let Some(v) = cfg.continue_on_failure {
        opts.continue_on_failure = v;
    }
    Ok(opts)
}

fn require_positive(v: u64, path: &str) -> Result<(), ConfigError> {
    if v == 0 {
        return Err(bad(format!("{path}: must be positive")));
    }
    Ok(())
}
