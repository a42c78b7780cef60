//! Polynomial least-squares approximation on product boundary grids.
//!
//! Targets are fitted over the monomial basis w^β·z^α (optionally with a
//! fixed exponent shift on the z part) by modified Gram–Schmidt
//! orthogonalization of the sample matrix, one reorthogonalization pass, and
//! back substitution. Degrees escalate per variable until an independently
//! sampled certification grid puts the sup error under tolerance, the basis
//! budget runs out, or progress stalls.

use num_complex::Complex64;
use thiserror::Error;

use crate::compacta::{product_grid, CompactError, ProductCompact, SampleGrid};
use crate::enumeration::MultiIndex;
use crate::series::{ParamPolynomial, PolyWZ, TargetFunction};

/// Relative column-norm floor below which the basis counts as rank deficient.
pub const RANK_TOL: f64 = 1e-12;
/// Relative column-norm floor below which the condition flag is raised.
pub const CONDITION_TOL: f64 = 1e-8;

/// Knobs for grid density, escalation, and budgets.
#[derive(Debug, Clone)]
pub struct ApproxOptions {
    /// Initial per-variable degree bound.
    pub start_degree: u32,
    /// Fitting samples per unit of polynomial degree, per factor.
    pub samples_per_degree: usize,
    /// Floor on fitting samples per factor.
    pub min_samples_per_factor: usize,
    /// Certification grid density as a multiple of the fitting density.
    pub cert_multiplier: usize,
    /// Budget on the number of basis monomials.
    pub max_basis: usize,
    /// Cap on total fitting-grid points.
    pub max_fit_points: u64,
    /// Cap on total certification-grid points.
    pub max_cert_points: u64,
    /// Consecutive rounds without a 10% certified-error improvement before
    /// escalation gives up.
    pub stagnation_rounds: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            start_degree: 4,
            samples_per_degree: 4,
            min_samples_per_factor: 32,
            cert_multiplier: 3,
            max_basis: 10_000,
            max_fit_points: 65_536,
            max_cert_points: 1_048_576,
            stagnation_rounds: 4,
        }
    }
}

/// A fitted polynomial with its on-grid and independently certified errors.
#[derive(Debug, Clone)]
pub struct PolyApproxResult {
    pub polynomial: PolyWZ,
    /// Sup |target − polynomial| on the fitting grid.
    pub fitted_error: f64,
    /// Sup on an independent grid at `cert_multiplier` × fitting density.
    pub certified_error: f64,
    /// Per-variable exponent bounds (w variables first, shifts included).
    pub degrees_used: Vec<u32>,
    /// Orthogonalization came close to rank deficiency.
    pub condition_flag: bool,
}

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("basis is rank deficient at monomial {monomial:?}")]
    RankDeficient { monomial: Vec<u32> },
    #[error("grid has {points} points for {basis} basis monomials")]
    Underdetermined { points: usize, basis: usize },
    #[error(
        "degree escalation exhausted after {rounds} rounds; best certified error {}",
        best.as_ref().map_or(f64::INFINITY, |b| b.certified_error)
    )]
    BudgetExhausted {
        best: Option<Box<PolyApproxResult>>,
        rounds: usize,
    },
    #[error("target not evaluable: {detail}")]
    Evaluation { detail: String },
    #[error(transparent)]
    Grid(#[from] CompactError),
}

type TargetEval<'a> = &'a dyn Fn(&[Complex64], &[Complex64]) -> Complex64;
type TargetGuard<'a> = Option<&'a dyn Fn(&[Complex64], &[Complex64]) -> bool>;

/// Least-squares fit over the basis w^β·z^α with β ≤ w_bounds, α ≤ z_bounds.
pub fn fit_polynomial(
    grid: &SampleGrid,
    values: &[Complex64],
    w_bounds: &[u32],
    z_bounds: &[u32],
) -> Result<PolyWZ, ApproxError> {
    let zero_shift = vec![0u32; z_bounds.len()];
    fit_shifted(grid, values, w_bounds, z_bounds, &zero_shift).map(|(poly, _)| poly)
}

/// Like [`fit_polynomial`], but every z-monomial carries the fixed extra
/// exponent `z_shift`; also reports whether conditioning was marginal.
pub fn fit_shifted(
    grid: &SampleGrid,
    values: &[Complex64],
    w_bounds: &[u32],
    z_bounds: &[u32],
    z_shift: &[u32],
) -> Result<(PolyWZ, bool), ApproxError> {
    let r = w_bounds.len();
    let d = z_bounds.len();
    assert_eq!(grid.arity(), r + d, "grid arity must equal r + d");
    assert_eq!(values.len(), grid.n_points(), "one value per grid point");
    assert_eq!(z_shift.len(), d, "one shift entry per z variable");

    let basis = odometer(&[w_bounds, z_bounds].concat());
    let n = basis.len();
    let m = grid.n_points();
    if m < n {
        return Err(ApproxError::Underdetermined {
            points: m,
            basis: n,
        });
    }

    // Per-point powers of each coordinate, z coordinates raised to bound+shift.
    let mut tops: Vec<u32> = w_bounds.to_vec();
    for (j, &b) in z_bounds.iter().enumerate() {
        tops.push(b + z_shift[j]);
    }
    let offsets: Vec<usize> = tops
        .iter()
        .scan(0usize, |acc, &t| {
            let here = *acc;
            *acc += t as usize + 1;
            Some(here)
        })
        .collect();
    let width: usize = tops.iter().map(|&t| t as usize + 1).sum();
    let mut powers = vec![Complex64::new(0.0, 0.0); m * width];
    for (i, pt) in grid.points().enumerate() {
        for (v, &x) in pt.iter().enumerate() {
            let mut acc = Complex64::new(1.0, 0.0);
            for e in 0..=tops[v] {
                powers[i * width + offsets[v] + e as usize] = acc;
                if e < tops[v] {
                    acc *= x;
                }
            }
        }
    }
    let column_entry = |i: usize, exps: &[u32]| -> Complex64 {
        let row = &powers[i * width..(i + 1) * width];
        let mut acc = Complex64::new(1.0, 0.0);
        for (v, &e) in exps.iter().enumerate() {
            let shift = if v < r { 0 } else { z_shift[v - r] };
            acc *= row[offsets[v] + (e + shift) as usize];
        }
        acc
    };

    // Modified Gram–Schmidt with one reorthogonalization pass.
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut upper = vec![Complex64::new(0.0, 0.0); n * n];
    let mut flag = false;
    for (j, exps) in basis.iter().enumerate() {
        let mut col: Vec<Complex64> = (0..m).map(|i| column_entry(i, exps)).collect();
        let raw_norm = vec_norm(&col);
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let proj = dot(qi, &col);
                axpy(&mut col, qi, -proj);
                upper[i * n + j] += proj;
            }
        }
        let diag = vec_norm(&col);
        if diag <= RANK_TOL * raw_norm {
            let mut monomial = exps.clone();
            for (jz, s) in z_shift.iter().enumerate() {
                monomial[r + jz] += s;
            }
            return Err(ApproxError::RankDeficient { monomial });
        }
        if diag < CONDITION_TOL * raw_norm {
            flag = true;
        }
        upper[j * n + j] = Complex64::new(diag, 0.0);
        let inv = 1.0 / diag;
        for entry in &mut col {
            *entry *= inv;
        }
        q.push(col);
    }

    // Project the data, then back-substitute R x = Qᴴb.
    let mut rhs = values.to_vec();
    let mut projected = vec![Complex64::new(0.0, 0.0); n];
    for _pass in 0..2 {
        for (i, qi) in q.iter().enumerate() {
            let proj = dot(qi, &rhs);
            axpy(&mut rhs, qi, -proj);
            projected[i] += proj;
        }
    }
    let mut solution = vec![Complex64::new(0.0, 0.0); n];
    for j in (0..n).rev() {
        let mut acc = projected[j];
        for i in j + 1..n {
            acc -= upper[j * n + i] * solution[i];
        }
        solution[j] = acc / upper[j * n + j];
    }

    let mut poly = PolyWZ::zero(r, d);
    for (exps, coeff) in basis.iter().zip(&solution) {
        if coeff.re == 0.0 && coeff.im == 0.0 {
            continue;
        }
        let w_part = MultiIndex(exps[..r].to_vec());
        let z_part = MultiIndex(
            exps[r..]
                .iter()
                .zip(z_shift)
                .map(|(&e, &s)| e + s)
                .collect(),
        );
        poly.add_term(z_part, ParamPolynomial::monomial(w_part, *coeff));
    }
    Ok((poly, flag))
}

/// Escalating fit of `target` on F × T until certified below `tol`.
pub fn approximate_on_product(
    param_compact: &ProductCompact,
    var_compact: &ProductCompact,
    target: &TargetFunction,
    tol: f64,
    opts: &ApproxOptions,
) -> Result<PolyApproxResult, ApproxError> {
    let eval = |w: &[Complex64], z: &[Complex64]| target.eval(w, z);
    let guard = |w: &[Complex64], z: &[Complex64]| target.in_domain(w, z);
    let zero_shift = vec![0u32; var_compact.arity()];
    approximate_shifted(
        param_compact,
        var_compact,
        &eval,
        Some(&guard),
        tol,
        &zero_shift,
        opts,
    )
}

/// Escalating fit over the shifted basis w^β·z^{α+shift}.
pub fn approximate_shifted(
    param_compact: &ProductCompact,
    var_compact: &ProductCompact,
    target: TargetEval,
    guard: TargetGuard,
    tol: f64,
    z_shift: &[u32],
    opts: &ApproxOptions,
) -> Result<PolyApproxResult, ApproxError> {
    let r = param_compact.arity();
    let d = var_compact.arity();
    assert_eq!(z_shift.len(), d, "one shift entry per z variable");
    assert!(tol > 0.0, "tolerance must be positive");

    let mut bounds = vec![opts.start_degree; r + d];

    // Zero-candidate pre-check: a target already below tolerance needs no fit.
    {
        let fit = sampled_grid(param_compact, var_compact, &bounds, z_shift, 1, 0.0, opts)?;
        let cert = sampled_grid(
            param_compact,
            var_compact,
            &bounds,
            z_shift,
            opts.cert_multiplier,
            0.5,
            opts,
        )?;
        let sup_fit = sup_abs(&eval_values(&fit, r, target, guard)?);
        let sup_cert = sup_abs(&eval_values(&cert, r, target, guard)?);
        if sup_fit < tol && sup_cert < tol {
            return Ok(PolyApproxResult {
                polynomial: PolyWZ::zero(r, d),
                fitted_error: sup_fit,
                certified_error: sup_cert,
                degrees_used: vec![0; r + d],
                condition_flag: false,
            });
        }
    }

    let mut best: Option<PolyApproxResult> = None;
    let mut stall = 0usize;
    let mut rounds = 0usize;
    loop {
        let n_basis: u128 = bounds.iter().map(|&b| b as u128 + 1).product();
        if n_basis > opts.max_basis as u128 {
            return Err(ApproxError::BudgetExhausted {
                best: best.map(Box::new),
                rounds,
            });
        }
        rounds += 1;

        let fit_grid = sampled_grid(param_compact, var_compact, &bounds, z_shift, 1, 0.0, opts)?;
        let fit_values = eval_values(&fit_grid, r, target, guard)?;
        let (poly, flag) =
            fit_shifted(&fit_grid, &fit_values, &bounds[..r], &bounds[r..], z_shift)?;
        let fitted_error = sup_residual(&poly, &fit_grid, r, &fit_values);
        let cert_grid = sampled_grid(
            param_compact,
            var_compact,
            &bounds,
            z_shift,
            opts.cert_multiplier,
            0.5,
            opts,
        )?;
        let cert_values = eval_values(&cert_grid, r, target, guard)?;
        let certified_error = sup_residual(&poly, &cert_grid, r, &cert_values);

        let result = PolyApproxResult {
            polynomial: poly,
            fitted_error,
            certified_error,
            degrees_used: shifted_bounds(&bounds, r, z_shift),
            condition_flag: flag,
        };
        if certified_error < tol {
            return Ok(result);
        }
        let improved = best
            .as_ref()
            .is_none_or(|b| certified_error < 0.9 * b.certified_error);
        if best
            .as_ref()
            .is_none_or(|b| certified_error < b.certified_error)
        {
            best = Some(result.clone());
        }
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= opts.stagnation_rounds {
                return Err(ApproxError::BudgetExhausted {
                    best: best.map(Box::new),
                    rounds,
                });
            }
        }

        let v = escalation_variable(&result.polynomial, &bounds, r, z_shift);
        bounds[v] = ((3 * bounds[v]).div_ceil(2)).max(bounds[v] + 1);
    }
}

/// Sup |target − poly| on an independent grid at `multiplier` × the density
/// implied by the polynomial's own degrees, with half-step sample offsets.
pub fn certify(
    poly: &PolyWZ,
    param_compact: &ProductCompact,
    var_compact: &ProductCompact,
    target: TargetEval,
    guard: TargetGuard,
    multiplier: usize,
    opts: &ApproxOptions,
) -> Result<f64, ApproxError> {
    let r = param_compact.arity();
    let mut degrees = param_degrees(poly, r);
    degrees.extend(poly.degrees_per_variable());
    let zero_shift = vec![0u32; var_compact.arity()];
    let grid = sampled_grid(
        param_compact,
        var_compact,
        &degrees,
        &zero_shift,
        multiplier,
        0.5,
        opts,
    )?;
    let values = eval_values(&grid, r, target, guard)?;
    Ok(sup_residual(poly, &grid, r, &values))
}

/// Max w-exponent per parameter variable across all coefficients.
fn param_degrees(poly: &PolyWZ, r: usize) -> Vec<u32> {
    let mut degs = vec![0u32; r];
    for coeff in poly.terms().values() {
        for wm in coeff.terms().keys() {
            for (v, &e) in wm.entries().iter().enumerate() {
                degs[v] = degs[v].max(e);
            }
        }
    }
    degs
}

/// All exponent tuples e ≤ bounds, first coordinate slowest.
fn odometer(bounds: &[u32]) -> Vec<Vec<u32>> {
    let total: u128 = bounds.iter().map(|&b| b as u128 + 1).product();
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![0u32; bounds.len()];
    loop {
        out.push(cur.clone());
        let mut v = bounds.len();
        loop {
            if v == 0 {
                return out;
            }
            v -= 1;
            if cur[v] < bounds[v] {
                cur[v] += 1;
                break;
            }
            cur[v] = 0;
        }
    }
}

fn shifted_bounds(bounds: &[u32], r: usize, z_shift: &[u32]) -> Vec<u32> {
    bounds
        .iter()
        .enumerate()
        .map(|(v, &b)| if v < r { b } else { b + z_shift[v - r] })
        .collect()
}

/// Boundary grid over F × T at the density rule: `samples_per_degree` per
/// unit of (shifted) degree, floored, capped by halving the largest factor.
fn sampled_grid(
    param_compact: &ProductCompact,
    var_compact: &ProductCompact,
    bounds: &[u32],
    z_shift: &[u32],
    multiplier: usize,
    offset: f64,
    opts: &ApproxOptions,
) -> Result<SampleGrid, ApproxError> {
    let r = param_compact.arity();
    let full = shifted_bounds(bounds, r, z_shift);
    let mut counts: Vec<usize> = full
        .iter()
        .map(|&deg| {
            (opts.samples_per_degree * deg as usize).max(opts.min_samples_per_factor) * multiplier
        })
        .collect();
    let floors: Vec<usize> = full.iter().map(|&deg| (deg as usize + 1).max(8)).collect();
    let cap = if multiplier == 1 {
        opts.max_fit_points
    } else {
        opts.max_cert_points
    };
    loop {
        let total: u128 = counts.iter().map(|&c| c as u128).product();
        if total <= cap as u128 {
            break;
        }
        let candidate = (0..counts.len())
            .filter(|&v| counts[v] / 2 >= floors[v])
            .max_by_key(|&v| counts[v]);
        match candidate {
            Some(v) => counts[v] /= 2,
            None => {
                return Err(ApproxError::Grid(CompactError::GridTooLarge {
                    requested: counts.iter().map(|&c| c as u128).product(),
                    cap,
                }))
            }
        }
    }
    let mut samples = param_compact.factor_samples(&counts[..r], offset);
    samples.extend(var_compact.factor_samples(&counts[r..], offset));
    Ok(product_grid(&samples, cap)?)
}

fn eval_values(
    grid: &SampleGrid,
    r: usize,
    target: TargetEval,
    guard: TargetGuard,
) -> Result<Vec<Complex64>, ApproxError> {
    let mut out = Vec::with_capacity(grid.n_points());
    for pt in grid.points() {
        let (w, z) = pt.split_at(r);
        if let Some(g) = guard {
            if !g(w, z) {
                return Err(ApproxError::Evaluation {
                    detail: format!(
                        "holomorphy guard rejected the grid point (w, z) = ({w:?}, {z:?})"
                    ),
                });
            }
        }
        let value = target(w, z);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(ApproxError::Evaluation {
                detail: format!("non-finite value at (w, z) = ({w:?}, {z:?})"),
            });
        }
        out.push(value);
    }
    Ok(out)
}

fn sup_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn sup_residual(poly: &PolyWZ, grid: &SampleGrid, r: usize, values: &[Complex64]) -> f64 {
    grid.points()
        .zip(values)
        .map(|(pt, v)| {
            let (w, z) = pt.split_at(r);
            (v - poly.eval(w, z)).norm()
        })
        .fold(0.0, f64::max)
}

/// Variable whose top-degree coefficient slice is largest in modulus.
fn escalation_variable(poly: &PolyWZ, bounds: &[u32], r: usize, z_shift: &[u32]) -> usize {
    let mut marginal = vec![0.0f64; bounds.len()];
    for (zm, coeff) in poly.terms() {
        for (wm, c) in coeff.terms() {
            let mag = c.norm();
            for v in 0..r {
                if wm.entry(v) == bounds[v] && mag > marginal[v] {
                    marginal[v] = mag;
                }
            }
            for j in 0..z_shift.len() {
                let free = zm.entry(j) - z_shift[j];
                if free == bounds[r + j] && mag > marginal[r + j] {
                    marginal[r + j] = mag;
                }
            }
        }
    }
    let mut arg = 0;
    for (v, &m) in marginal.iter().enumerate() {
        if m > marginal[arg] {
            arg = v;
        }
    }
    arg
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(target: &mut [Complex64], source: &[Complex64], factor: Complex64) {
    for (t, s) in target.iter_mut().zip(source) {
        *t += factor * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compacta::PlanarCompact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const RECOVERY_TOL: f64 = 1e-12;
    const EXP_COEFF_TOL: f64 = 1e-8;
    const TAIL_BOUND: f64 = 4.76837158203125e-7; // 2^-21
    const EXACTNESS_TOL: f64 = 1e-9;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_circle_grid(count: usize, offset: f64) -> SampleGrid {
        let disc = PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap();
        product_grid(&[disc.boundary_samples(count, offset)], 1 << 20).unwrap()
    }

    fn scalar_coeff(poly: &PolyWZ, z_exps: &[u32]) -> Complex64 {
        poly.terms()
            .get(&MultiIndex(z_exps.to_vec()))
            .map(|p| {
                p.terms()
                    .get(&MultiIndex(vec![]))
                    .copied()
                    .unwrap_or(c(0.0, 0.0))
            })
            .unwrap_or(c(0.0, 0.0))
    }

    fn poly_distance(a: &PolyWZ, b: &PolyWZ) -> f64 {
        let mut worst: f64 = 0.0;
        let keys: std::collections::BTreeSet<&MultiIndex> =
            a.terms().keys().chain(b.terms().keys()).collect();
        for key in keys {
            let zero = ParamPolynomial::zero(a.param_arity());
            let pa = a.terms().get(key).unwrap_or(&zero);
            let pb = b.terms().get(key).unwrap_or(&zero);
            worst = worst.max(pa.sub(pb).max_coeff_abs());
        }
        worst
    }

    #[test]
    fn recovers_degree_three_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let coeffs: Vec<Complex64> = (0..4)
            .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let grid = unit_circle_grid(64, 0.0);
        let values: Vec<Complex64> = grid
            .points()
            .map(|pt| {
                let z = pt[0];
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &ck)| ck * z.powi(k as i32))
                    .sum()
            })
            .collect();
        let poly = fit_polynomial(&grid, &values, &[], &[3]).unwrap();
        for (k, &ck) in coeffs.iter().enumerate() {
            let got = scalar_coeff(&poly, &[k as u32]);
            assert!(
                (got - ck).norm() < RECOVERY_TOL,
                "coefficient {k}: got {got}, wanted {ck}"
            );
        }
    }

    #[test]
    fn exp_fit_matches_taylor_coefficients() {
        let grid = unit_circle_grid(256, 0.0);
        let values: Vec<Complex64> = grid.points().map(|pt| pt[0].exp()).collect();
        let poly = fit_polynomial(&grid, &values, &[], &[10]).unwrap();
        let mut factorial = 1.0f64;
        for k in 0..=10u32 {
            if k > 0 {
                factorial *= k as f64;
            }
            let got = scalar_coeff(&poly, &[k]);
            assert!(
                (got - c(1.0 / factorial, 0.0)).norm() < EXP_COEFF_TOL,
                "coefficient {k} off: {got}"
            );
        }
    }

    #[test]
    fn reciprocal_fit_meets_tail_bound() {
        let grid = unit_circle_grid(256, 0.0);
        let pole = c(2.0, 0.0);
        let values: Vec<Complex64> = grid.points().map(|pt| (pt[0] - pole).inv()).collect();
        let poly = fit_polynomial(&grid, &values, &[], &[20]).unwrap();
        // Taylor coefficients of 1/(z-2) are -2^-(k+1).
        for k in 0..=20u32 {
            let expected = c(-(0.5f64.powi(k as i32 + 1)), 0.0);
            assert!((scalar_coeff(&poly, &[k]) - expected).norm() < 1e-9);
        }
        let dense = unit_circle_grid(2048, 0.5);
        let sup = dense
            .points()
            .map(|pt| ((pt[0] - pole).inv() - poly.eval(&[], pt)).norm())
            .fold(0.0f64, f64::max);
        assert!(sup <= TAIL_BOUND + 1e-9, "sup {sup} above tail bound");
        assert!(sup >= 0.9 * TAIL_BOUND, "sup {sup} implausibly small");
    }

    #[test]
    fn zero_target_returns_zero_polynomial() {
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(2.0, 0.0), 1.0).unwrap()]);
        let target = TargetFunction::new("zero", 0, 1, |_, _| c(0.0, 0.0));
        let res = approximate_on_product(
            &ProductCompact::point(),
            &t,
            &target,
            1e-6,
            &ApproxOptions::default(),
        )
        .unwrap();
        assert!(res.polynomial.is_zero());
        assert_eq!(res.certified_error, 0.0);
        assert_eq!(res.fitted_error, 0.0);
    }

    #[test]
    fn exp_sum_two_variables_certifies() {
        let t = ProductCompact::new(vec![
            PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap(),
            PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap(),
        ]);
        let target = TargetFunction::new("exp-sum", 0, 2, |_, z: &[Complex64]| (z[0] + z[1]).exp());
        let res = approximate_on_product(
            &ProductCompact::point(),
            &t,
            &target,
            1e-6,
            &ApproxOptions::default(),
        )
        .unwrap();
        assert!(
            res.certified_error < 1e-6,
            "certified {}",
            res.certified_error
        );
        assert!(
            res.degrees_used.iter().all(|&d| d <= 14),
            "degrees {:?}",
            res.degrees_used
        );
    }

    #[test]
    fn cauchy_kernel_with_parameter_certifies() {
        let f = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(3.0, 0.0), 1.0).unwrap()]);
        let target = TargetFunction::new("cauchy", 1, 1, |w: &[Complex64], z: &[Complex64]| {
            (z[0] - w[0]).inv()
        });
        let res = approximate_on_product(&f, &t, &target, 1e-3, &ApproxOptions::default()).unwrap();
        assert!(
            res.certified_error < 1e-3,
            "certified {}",
            res.certified_error
        );
    }

    #[test]
    fn certify_exact_polynomial_is_zero() {
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);
        let mut poly = PolyWZ::zero(0, 1);
        poly.add_term(
            MultiIndex(vec![2]),
            ParamPolynomial::constant(0, c(0.5, -1.0)),
        );
        poly.add_term(
            MultiIndex(vec![0]),
            ParamPolynomial::constant(0, c(1.0, 0.25)),
        );
        let clone = poly.clone();
        let eval = move |_w: &[Complex64], z: &[Complex64]| clone.eval(&[], z);
        let err = certify(
            &poly,
            &ProductCompact::point(),
            &t,
            &eval,
            None,
            3,
            &ApproxOptions::default(),
        )
        .unwrap();
        assert!(err <= 1e-13, "self-certification {err}");
    }

    #[test]
    fn certify_zero_poly_against_one() {
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);
        let eval = |_w: &[Complex64], _z: &[Complex64]| c(1.0, 0.0);
        let err = certify(
            &PolyWZ::zero(0, 1),
            &ProductCompact::point(),
            &t,
            &eval,
            None,
            3,
            &ApproxOptions::default(),
        )
        .unwrap();
        assert!((err - 1.0).abs() < 1e-12);
    }

    #[test]
    fn certification_density_is_stable() {
        let opts = ApproxOptions::default();
        let point = ProductCompact::point();
        let circle = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);

        let grid = unit_circle_grid(256, 0.0);
        let exp_values: Vec<Complex64> = grid.points().map(|pt| pt[0].exp()).collect();
        let exp_poly = fit_polynomial(&grid, &exp_values, &[], &[6]).unwrap();
        let exp_eval = |_w: &[Complex64], z: &[Complex64]| z[0].exp();

        let pole = c(2.0, 0.0);
        let rec_values: Vec<Complex64> = grid.points().map(|pt| (pt[0] - pole).inv()).collect();
        let rec_poly = fit_polynomial(&grid, &rec_values, &[], &[12]).unwrap();
        let rec_eval = move |_w: &[Complex64], z: &[Complex64]| (z[0] - pole).inv();

        let pairs: Vec<(f64, f64)> = vec![
            (
                certify(&exp_poly, &point, &circle, &exp_eval, None, 3, &opts).unwrap(),
                certify(&exp_poly, &point, &circle, &exp_eval, None, 6, &opts).unwrap(),
            ),
            (
                certify(&rec_poly, &point, &circle, &rec_eval, None, 3, &opts).unwrap(),
                certify(&rec_poly, &point, &circle, &rec_eval, None, 6, &opts).unwrap(),
            ),
        ];
        for (three, six) in pairs {
            assert!(three <= 1.5 * six, "3x grid {three} vs 6x grid {six}");
        }
    }

    #[test]
    fn fitted_error_never_rises_with_degree() {
        let grid = unit_circle_grid(512, 0.0);
        let targets: Vec<Vec<Complex64>> = vec![
            grid.points().map(|pt| pt[0].exp()).collect(),
            grid.points()
                .map(|pt| (pt[0] - c(2.0, 0.0)).inv())
                .collect(),
        ];
        for values in &targets {
            let mut previous = f64::INFINITY;
            for degree in 4..=16u32 {
                let poly = fit_polynomial(&grid, values, &[], &[degree]).unwrap();
                let sup = grid
                    .points()
                    .zip(values)
                    .map(|(pt, v)| (v - poly.eval(&[], pt)).norm())
                    .fold(0.0f64, f64::max);
                assert!(
                    sup <= previous + 1e-12,
                    "degree {degree}: {sup} above previous {previous}"
                );
                previous = sup;
            }
        }
    }

    #[test]
    fn polynomials_pass_through_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut original = PolyWZ::zero(1, 1);
        for ze in 0..=3u32 {
            for we in 0..=2u32 {
                original.add_term(
                    MultiIndex(vec![ze]),
                    ParamPolynomial::monomial(
                        MultiIndex(vec![we]),
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    ),
                );
            }
        }
        let f = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);
        let reference = original.clone();
        let target = TargetFunction::new("poly", 1, 1, move |w: &[Complex64], z: &[Complex64]| {
            reference.eval(w, z)
        });
        let res =
            approximate_on_product(&f, &t, &target, 1e-10, &ApproxOptions::default()).unwrap();
        assert!(
            poly_distance(&res.polynomial, &original) < EXACTNESS_TOL,
            "distance {}",
            poly_distance(&res.polynomial, &original)
        );
    }

    #[test]
    fn degenerate_grid_reports_rank_deficiency() {
        let same_point = vec![c(1.0, 0.0); 40];
        let grid = product_grid(&[same_point], 100).unwrap();
        let values = vec![c(1.0, 0.0); 40];
        match fit_polynomial(&grid, &values, &[], &[3]) {
            Err(ApproxError::RankDeficient { monomial }) => assert_eq!(monomial, vec![1]),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn too_few_points_is_rejected() {
        let grid = unit_circle_grid(3, 0.0);
        let values = vec![c(0.0, 0.0); 3];
        assert!(matches!(
            fit_polynomial(&grid, &values, &[], &[3]),
            Err(ApproxError::Underdetermined {
                points: 3,
                basis: 4
            })
        ));
    }

    #[test]
    fn guard_rejection_surfaces_as_error() {
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);
        let target = TargetFunction::new("guarded", 0, 1, |_, z: &[Complex64]| z[0])
            .with_guard(|_, _| false);
        assert!(matches!(
            approximate_on_product(
                &ProductCompact::point(),
                &t,
                &target,
                1e-3,
                &ApproxOptions::default()
            ),
            Err(ApproxError::Evaluation { .. })
        ));
    }

    #[test]
    fn singular_value_on_grid_surfaces_as_error() {
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(0.0, 0.0), 1.0).unwrap()]);
        let target = TargetFunction::new("pole-on-grid", 0, 1, |_, z: &[Complex64]| {
            (z[0] - c(1.0, 0.0)).inv()
        });
        assert!(matches!(
            approximate_on_product(
                &ProductCompact::point(),
                &t,
                &target,
                1e-3,
                &ApproxOptions::default()
            ),
            Err(ApproxError::Evaluation { .. })
        ));
    }

    #[test]
    fn shifted_basis_only_emits_shifted_monomials() {
        let disc = PlanarCompact::disc(c(2.0, 0.0), 1.0).unwrap();
        let grid = product_grid(&[disc.boundary_samples(64, 0.0)], 1 << 20).unwrap();
        let values: Vec<Complex64> = grid.points().map(|pt| pt[0].inv()).collect();
        let (poly, _) = fit_shifted(&grid, &values, &[], &[6], &[2]).unwrap();
        for zm in poly.terms().keys() {
            assert!(zm.entry(0) >= 2, "unshifted monomial {zm:?} in output");
            assert!(zm.entry(0) <= 8);
        }
    }

    #[test]
    fn budget_exhaustion_reports_best_attempt() {
        let t = ProductCompact::new(vec![PlanarCompact::disc(c(2.0, 0.0), 1.0).unwrap()]);
        // |z| is not holomorphic, so escalation cannot reach the tolerance.
        let target = |_w: &[Complex64], z: &[Complex64]| c(z[0].norm(), 0.0);
        let opts = ApproxOptions {
            max_basis: 30,
            ..ApproxOptions::default()
        };
        match approximate_shifted(
            &ProductCompact::point(),
            &t,
            &target,
            None,
            1e-12,
            &[0],
            &opts,
        ) {
            Err(ApproxError::BudgetExhausted { best, rounds }) => {
                assert!(rounds >= 1);
                let best = best.expect("a best attempt must be recorded");
                assert!(best.certified_error.is_finite());
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }
}
