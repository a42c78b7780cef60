//! Coefficient sequences, parameterized polynomials, and partial sums.
//!
//! Coefficients a_k live in ℂ[w] ([`ParamPolynomial`]); a sparse map k ↦ a_k
//! forms a [`CoefficientSequence`]; a polynomial in both the parameters w and
//! the series variables z is a [`PolyWZ`]. The generalized partial sum
//! S_n(a)(w)(z) = Σ_{k≤n} (b_k(a₀,…,a_k))(w)·z^{N_k} is evaluated on grids
//! with the transform values computed once per k, not per point.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::compacta::SampleGrid;
use crate::enumeration::{Enumeration, MultiIndex};
use crate::transforms::SequenceTransform;

/// Polynomial in the parameters w ∈ ℂʳ; canonical (no stored zero terms).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPolynomial {
    arity: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl ParamPolynomial {
    pub fn zero(arity: usize) -> Self {
        ParamPolynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, value: Complex64) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(MultiIndex::zero(arity), value);
        p
    }

    pub fn monomial(exponents: MultiIndex, value: Complex64) -> Self {
        let mut p = Self::zero(exponents.dim());
        p.add_term(exponents, value);
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `value`·w^exponents, pruning the term if the sum cancels exactly.
    pub fn add_term(&mut self, exponents: MultiIndex, value: Complex64) {
        assert_eq!(exponents.dim(), self.arity, "parameter arity mismatch");
        let entry = self
            .terms
            .entry(exponents.clone())
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += value;
        if entry.re == 0.0 && entry.im == 0.0 {
            self.terms.remove(&exponents);
        }
    }

    pub fn add(&self, other: &ParamPolynomial) -> ParamPolynomial {
        assert_eq!(self.arity, other.arity, "parameter arity mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &ParamPolynomial) -> ParamPolynomial {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> ParamPolynomial {
        let mut out = Self::zero(self.arity);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    /// Value at w; uses per-variable power tables.
    pub fn eval(&self, w: &[Complex64]) -> Complex64 {
        assert_eq!(w.len(), self.arity, "parameter point arity mismatch");
        let powers = PowerTable::for_support(w, self.terms.keys());
        self.terms.iter().map(|(m, c)| c * powers.monomial(m)).sum()
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_coeff_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Finitely-supported map k ↦ a_k; absent indices denote the zero function,
/// while explicitly stored zero polynomials mark deliberate padding.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    param_arity: usize,
    entries: BTreeMap<u64, ParamPolynomial>,
}

impl CoefficientSequence {
    pub fn new(param_arity: usize) -> Self {
        CoefficientSequence {
            param_arity,
            entries: BTreeMap::new(),
        }
    }

    pub fn param_arity(&self) -> usize {
        self.param_arity
    }

    pub fn set(&mut self, k: u64, value: ParamPolynomial) {
        assert_eq!(value.arity(), self.param_arity, "parameter arity mismatch");
        self.entries.insert(k, value);
    }

    pub fn get(&self, k: u64) -> Option<&ParamPolynomial> {
        self.entries.get(&k)
    }

    /// Largest stored index, counting explicit zeros.
    pub fn max_index(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn entries(&self) -> &BTreeMap<u64, ParamPolynomial> {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Polynomial Σ_α c_α(w)·z^α with multi-index z-support; canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyWZ {
    param_arity: usize,
    var_arity: usize,
    terms: BTreeMap<MultiIndex, ParamPolynomial>,
}

impl PolyWZ {
    pub fn zero(param_arity: usize, var_arity: usize) -> Self {
        PolyWZ {
            param_arity,
            var_arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn param_arity(&self) -> usize {
        self.param_arity
    }

    pub fn var_arity(&self) -> usize {
        self.var_arity
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, ParamPolynomial> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges `coeff`·z^exponents into the polynomial, pruning zero results.
    pub fn add_term(&mut self, exponents: MultiIndex, coeff: ParamPolynomial) {
        assert_eq!(exponents.dim(), self.var_arity, "variable arity mismatch");
        assert_eq!(coeff.arity(), self.param_arity, "parameter arity mismatch");
        let merged = match self.terms.remove(&exponents) {
            Some(existing) => existing.add(&coeff),
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(exponents, merged);
        }
    }

    pub fn eval(&self, w: &[Complex64], z: &[Complex64]) -> Complex64 {
        assert_eq!(w.len(), self.param_arity, "parameter point arity mismatch");
        assert_eq!(z.len(), self.var_arity, "variable point arity mismatch");
        let powers = PowerTable::for_support(z, self.terms.keys());
        self.terms
            .iter()
            .map(|(m, c)| c.eval(w) * powers.monomial(m))
            .sum()
    }

    /// Per-variable maximum z-exponent (all zeros for the zero polynomial).
    pub fn degrees_per_variable(&self) -> Vec<u32> {
        let mut degs = vec![0u32; self.var_arity];
        for m in self.terms.keys() {
            for (v, &e) in m.entries().iter().enumerate() {
                degs[v] = degs[v].max(e);
            }
        }
        degs
    }
}

/// Cached powers of each coordinate up to the highest exponent in a support.
struct PowerTable {
    powers: Vec<Vec<Complex64>>,
}

impl PowerTable {
    fn for_support<'a>(point: &[Complex64], support: impl Iterator<Item = &'a MultiIndex>) -> Self {
        let mut max_deg = vec![0u32; point.len()];
        for m in support {
            for (v, &e) in m.entries().iter().enumerate() {
                max_deg[v] = max_deg[v].max(e);
            }
        }
        let powers = point
            .iter()
            .zip(&max_deg)
            .map(|(&x, &top)| {
                let mut col = Vec::with_capacity(top as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                col.push(acc);
                for _ in 0..top {
                    acc *= x;
                    col.push(acc);
                }
                col
            })
            .collect();
        PowerTable { powers }
    }

    fn monomial(&self, m: &MultiIndex) -> Complex64 {
        m.entries()
            .iter()
            .enumerate()
            .map(|(v, &e)| self.powers[v][e as usize])
            .product()
    }
}

/// z^m by direct powering, for one-off evaluations without a table.
pub fn monomial_value(z: &[Complex64], m: &MultiIndex) -> Complex64 {
    assert_eq!(z.len(), m.dim(), "variable point arity mismatch");
    z.iter()
        .zip(m.entries())
        .map(|(&x, &e)| x.powi(e as i32))
        .product()
}

/// Shared evaluator (w, z) ↦ value used by [`TargetFunction`].
pub type EvalFn = dyn Fn(&[Complex64], &[Complex64]) -> Complex64 + Send + Sync;
/// Shared domain predicate used by [`TargetFunction`].
pub type GuardFn = dyn Fn(&[Complex64], &[Complex64]) -> bool + Send + Sync;

/// Black-box target h(w, z) with an optional domain-of-holomorphy guard.
#[derive(Clone)]
pub struct TargetFunction {
    name: String,
    param_arity: usize,
    var_arity: usize,
    evaluator: Arc<EvalFn>,
    guard: Option<Arc<GuardFn>>,
}

impl TargetFunction {
    pub fn new(
        name: impl Into<String>,
        param_arity: usize,
        var_arity: usize,
        evaluator: impl Fn(&[Complex64], &[Complex64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        TargetFunction {
            name: name.into(),
            param_arity,
            var_arity,
            evaluator: Arc::new(evaluator),
            guard: None,
        }
    }

    /// Attaches a predicate that must hold at every evaluation point.
    pub fn with_guard(
        mut self,
        guard: impl Fn(&[Complex64], &[Complex64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.guard = Some(Arc::new(guard));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn param_arity(&self) -> usize {
        self.param_arity
    }

    pub fn var_arity(&self) -> usize {
        self.var_arity
    }

    pub fn eval(&self, w: &[Complex64], z: &[Complex64]) -> Complex64 {
        (self.evaluator)(w, z)
    }

    /// True when the point passes the guard (or no guard is set).
    pub fn in_domain(&self, w: &[Complex64], z: &[Complex64]) -> bool {
        self.guard.as_ref().is_none_or(|g| g(w, z))
    }
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("name", &self.name)
            .field("param_arity", &self.param_arity)
            .field("var_arity", &self.var_arity)
            .field("guarded", &self.guard.is_some())
            .finish()
    }
}

/// Σ_{k≤n} a_k·z^{N_k} as an explicit polynomial (identity transform view).
pub fn assemble(a: &CoefficientSequence, e: &Enumeration, n: u64) -> PolyWZ {
    let mut out = PolyWZ::zero(a.param_arity(), e.dimension());
    for k in 0..=n {
        if let Some(coeff) = a.get(k) {
            if !coeff.is_zero() {
                out.add_term(e.enumerate(k), coeff.clone());
            }
        }
    }
    out
}

/// S_n(a)(w)(z) on every grid point; grid arity must be param_arity + d.
pub fn partial_sum_eval(
    a: &CoefficientSequence,
    b: &SequenceTransform,
    e: &Enumeration,
    n: u64,
    grid: &SampleGrid,
) -> Vec<Complex64> {
    let r = a.param_arity();
    let d = e.dimension();
    assert_eq!(grid.arity(), r + d, "grid arity must equal r + d");
    // Zero summands are dropped up front; only surviving terms touch points.
    let terms: Vec<(ParamPolynomial, MultiIndex)> = (0..=n)
        .map(|k| (b.apply(a, k), e.enumerate(k)))
        .filter(|(bk, _)| !bk.is_zero())
        .collect();
    grid.points()
        .map(|pt| {
            let (w, z) = pt.split_at(r);
            let powers = PowerTable::for_support(z, terms.iter().map(|(_, m)| m));
            terms
                .iter()
                .map(|(bk, m)| bk.eval(w) * powers.monomial(m))
                .sum()
        })
        .collect()
}
