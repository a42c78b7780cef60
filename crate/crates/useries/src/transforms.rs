//! Lower-triangular sequence transforms b_k and their last-argument solver.
//!
//! A transform maps raw coefficients to displayed ones via
//! b_k(a₀,…,a_k) = Σ_{i≤k} c_{k,i}·a_i with c_{k,k} ≠ 0; the nonzero diagonal
//! makes [`SequenceTransform::solve_last`] an exact inverse in the last
//! argument, which is what lets construction prescribe displayed coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::series::{CoefficientSequence, ParamPolynomial};

/// Smallest diagonal magnitude accepted for custom rows.
pub const MIN_DIAGONAL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("custom row {k} has {found} entries, expected {expected}")]
    RowLength {
        k: u64,
        expected: usize,
        found: usize,
    },
    #[error("custom row {k} diagonal magnitude {magnitude:e} is below the {MIN_DIAGONAL:e} floor")]
    SmallDiagonal { k: u64, magnitude: f64 },
}

/// The b_k family: identity, Cesàro averaging, or explicit triangular rows.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceTransform {
    Identity,
    Cesaro,
    /// Explicit rows k ↦ (c_{k,0}, …, c_{k,k}); absent rows act as identity.
    Custom {
        rows: BTreeMap<u64, Vec<Complex64>>,
    },
}

impl SequenceTransform {
    /// Validates row lengths and diagonal magnitudes before accepting rows.
    pub fn custom(rows: BTreeMap<u64, Vec<Complex64>>) -> Result<Self, TransformError> {
        for (&k, row) in &rows {
            let expected = k as usize + 1;
            if row.len() != expected {
                return Err(TransformError::RowLength {
                    k,
                    expected,
                    found: row.len(),
                });
            }
            let magnitude = row[k as usize].norm();
            if magnitude < MIN_DIAGONAL {
                return Err(TransformError::SmallDiagonal { k, magnitude });
            }
        }
        Ok(SequenceTransform::Custom { rows })
    }

    /// c_{k,i} for i ≤ k.
    pub fn coefficient(&self, k: u64, i: u64) -> Complex64 {
        debug_assert!(i <= k);
        match self {
            SequenceTransform::Identity => Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0),
            SequenceTransform::Cesaro => Complex64::new(1.0 / (k as f64 + 1.0), 0.0),
            SequenceTransform::Custom { rows } => match rows.get(&k) {
                Some(row) => row[i as usize],
                None => Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0),
            },
        }
    }

    /// True when row k reduces to b_k(a₀..a_k) = a_k.
    fn is_identity_row(&self, k: u64) -> bool {
        match self {
            SequenceTransform::Identity => true,
            SequenceTransform::Cesaro => k == 0,
            SequenceTransform::Custom { rows } => !rows.contains_key(&k),
        }
    }

    /// b_k(a₀,…,a_k); reads only indices ≤ k.
    pub fn apply(&self, a: &CoefficientSequence, k: u64) -> ParamPolynomial {
        let arity = a.param_arity();
        if self.is_identity_row(k) {
            return a
                .get(k)
                .cloned()
                .unwrap_or_else(|| ParamPolynomial::zero(arity));
        }
        let mut out = ParamPolynomial::zero(arity);
        for i in 0..=k {
            if let Some(ai) = a.get(i) {
                if !ai.is_zero() {
                    out = out.add(&ai.scale(self.coefficient(k, i)));
                }
            }
        }
        out
    }

    /// The unique c_k with b_k(a₀,…,a_{k−1}, c_k) = target; indices ≥ k in
    /// `a` are ignored. Diagonals are nonzero by construction, so this is
    /// total.
    pub fn solve_last(
        &self,
        a: &CoefficientSequence,
        k: u64,
        target: &ParamPolynomial,
    ) -> ParamPolynomial {
        if self.is_identity_row(k) {
            return target.clone();
        }
        let mut residue = target.clone();
        for i in 0..k {
            if let Some(ai) = a.get(i) {
                if !ai.is_zero() {
                    residue = residue.sub(&ai.scale(self.coefficient(k, i)));
                }
            }
        }
        residue.scale(self.coefficient(k, k).inv())
    }
}
