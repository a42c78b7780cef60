//! Enumerations of ℕᵈ and infinite index sets.
//!
//! An [`Enumeration`] fixes a bijection k ↦ N_k from ℕ onto ℕᵈ together with a
//! closed-form inverse; partial sums collect monomials in exactly this order.
//! A [`MuSet`] is an infinite subset of ℕ from which checkpoint indices are
//! drawn. Ranks are computed by counting formulas, not stored tables, so
//! arbitrarily large indices work.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exponent vector m = (m₁, …, m_d) with nonnegative entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    /// The zero vector in the given dimension.
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Zero everywhere except `value` at `slot`.
    pub fn unit(dim: usize, slot: usize, value: u32) -> Self {
        let mut entries = vec![0; dim];
        entries[slot] = value;
        MultiIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entry(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Sum of entries |m|₁.
    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    /// Largest entry |m|_∞ (0 for the empty index).
    pub fn max_degree(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Entrywise sum; dimensions must match.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("enumeration dimension must be at least 1")]
    ZeroDimension,
    #[error("table prefix entry {position} has dimension {found}, expected {expected}")]
    PrefixDimension {
        position: usize,
        found: usize,
        expected: usize,
    },
    #[error("table prefix entries {first} and {second} are equal")]
    DuplicatePrefix { first: usize, second: usize },
}

/// Ordering scheme for an [`Enumeration`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnumerationScheme {
    /// Total degree, then lexicographic.
    GradedLex,
    /// Max-norm shells, then lexicographic.
    GradedMax,
    /// Explicit finite prefix, then graded-lex over the complement.
    Table { prefix: Vec<MultiIndex> },
}

/// A bijection k ↦ N_k from ℕ onto ℕᵈ with inverse lookup.
#[derive(Debug, Clone)]
pub struct Enumeration {
    dim: usize,
    scheme: EnumerationScheme,
    // Table bookkeeping: graded-lex ranks of the prefix entries, sorted.
    prefix_ranks: Vec<u64>,
}

impl Enumeration {
    pub fn new(dim: usize, scheme: EnumerationScheme) -> Result<Self, EnumerationError> {
        if dim == 0 {
            return Err(EnumerationError::ZeroDimension);
        }
        let mut prefix_ranks = Vec::new();
        if let EnumerationScheme::Table { prefix } = &scheme {
            for (i, m) in prefix.iter().enumerate() {
                if m.dim() != dim {
                    return Err(EnumerationError::PrefixDimension {
                        position: i,
                        found: m.dim(),
                        expected: dim,
                    });
                }
                for (j, other) in prefix.iter().enumerate().skip(i + 1) {
                    if m == other {
                        return Err(EnumerationError::DuplicatePrefix {
                            first: i,
                            second: j,
                        });
                    }
                }
            }
            prefix_ranks = prefix.iter().map(glex_rank).collect();
            prefix_ranks.sort_unstable();
        }
        Ok(Enumeration {
            dim,
            scheme,
            prefix_ranks,
        })
    }

    pub fn graded_lex(dim: usize) -> Result<Self, EnumerationError> {
        Self::new(dim, EnumerationScheme::GradedLex)
    }

    pub fn graded_max(dim: usize) -> Result<Self, EnumerationError> {
        Self::new(dim, EnumerationScheme::GradedMax)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// N_k.
    pub fn enumerate(&self, k: u64) -> MultiIndex {
        match &self.scheme {
            EnumerationScheme::GradedLex => glex_unrank(self.dim, k),
            EnumerationScheme::GradedMax => gmax_unrank(self.dim, k),
            EnumerationScheme::Table { prefix } => {
                if (k as usize) < prefix.len() {
                    prefix[k as usize].clone()
                } else {
                    // k-th element of ℕᵈ in graded-lex order, skipping the prefix.
                    let mut g = k - prefix.len() as u64;
                    for &pr in &self.prefix_ranks {
                        if pr <= g {
                            g += 1;
                        } else {
                            break;
                        }
                    }
                    glex_unrank(self.dim, g)
                }
            }
        }
    }

    /// The k with N_k = m.
    pub fn index_of(&self, m: &MultiIndex) -> u64 {
        assert_eq!(m.dim(), self.dim, "multi-index dimension mismatch");
        match &self.scheme {
            EnumerationScheme::GradedLex => glex_rank(m),
            EnumerationScheme::GradedMax => gmax_rank(m),
            EnumerationScheme::Table { prefix } => {
                if let Some(pos) = prefix.iter().position(|p| p == m) {
                    return pos as u64;
                }
                let g = glex_rank(m);
                let below = self.prefix_ranks.partition_point(|&pr| pr < g) as u64;
                prefix.len() as u64 + g - below
            }
        }
    }
}

/// C(n, k) in u128; exact stepwise multiply-then-divide.
fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    acc
}

/// Number of m ∈ ℕᵈ with total degree ≤ t.
fn glex_count_upto(t: u64, dim: usize) -> u128 {
    binomial(t + dim as u64, dim as u64)
}

fn glex_unrank(dim: usize, k: u64) -> MultiIndex {
    if dim == 1 {
        return MultiIndex(vec![
            u32::try_from(k).expect("index exceeds u32 degree range")
        ]);
    }
    let mut t: u64 = 0;
    while glex_count_upto(t, dim) <= k as u128 {
        t += 1;
    }
    let below = if t == 0 {
        0
    } else {
        glex_count_upto(t - 1, dim)
    };
    let mut r = k as u128 - below;
    let mut entries = vec![0u32; dim];
    let mut deg = t;
    for (i, entry) in entries.iter_mut().enumerate() {
        let rem = (dim - i - 1) as u64;
        if rem == 0 {
            *entry = u32::try_from(deg).expect("degree exceeds u32");
            break;
        }
        for v in 0..=deg {
            let c = binomial(deg - v + rem - 1, rem - 1);
            if r < c {
                *entry = u32::try_from(v).expect("degree exceeds u32");
                deg -= v;
                break;
            }
            r -= c;
        }
    }
    MultiIndex(entries)
}

fn glex_rank(m: &MultiIndex) -> u64 {
    let dim = m.dim();
    if dim == 1 {
        return m.0[0] as u64;
    }
    let t = m.total_degree();
    let mut r: u128 = if t == 0 {
        0
    } else {
        glex_count_upto(t - 1, dim)
    };
    let mut deg = t;
    for i in 0..dim {
        let rem = (dim - i - 1) as u64;
        if rem == 0 {
            break;
        }
        for v in 0..m.0[i] as u64 {
            r += binomial(deg - v + rem - 1, rem - 1);
        }
        deg -= m.0[i] as u64;
    }
    u64::try_from(r).expect("rank exceeds u64")
}

fn pow_u128(base: u64, exp: u64) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128).expect("shell count overflow");
    }
    acc
}

fn gmax_unrank(dim: usize, k: u64) -> MultiIndex {
    if dim == 1 {
        return MultiIndex(vec![
            u32::try_from(k).expect("index exceeds u32 degree range")
        ]);
    }
    let d = dim as u64;
    let mut s: u64 = 0;
    while pow_u128(s + 1, d) <= k as u128 {
        s += 1;
    }
    let mut r = k as u128 - pow_u128(s, d);
    let mut entries = vec![0u32; dim];
    let mut has_max = false;
    for (i, entry) in entries.iter_mut().enumerate() {
        let rem = (dim - i - 1) as u64;
        for v in 0..=s {
            let c = if has_max || v == s {
                pow_u128(s + 1, rem)
            } else {
                pow_u128(s + 1, rem) - pow_u128(s, rem)
            };
            if r < c {
                *entry = u32::try_from(v).expect("degree exceeds u32");
                has_max |= v == s;
                break;
            }
            r -= c;
        }
    }
    MultiIndex(entries)
}

fn gmax_rank(m: &MultiIndex) -> u64 {
    let dim = m.dim();
    if dim == 1 {
        return m.0[0] as u64;
    }
    let d = dim as u64;
    let s = m.max_degree() as u64;
    let mut r: u128 = pow_u128(s, d);
    let mut has_max = false;
    for i in 0..dim {
        let rem = (dim - i - 1) as u64;
        for v in 0..m.0[i] as u64 {
            r += if has_max || v == s {
                pow_u128(s + 1, rem)
            } else {
                pow_u128(s + 1, rem) - pow_u128(s, rem)
            };
        }
        has_max |= m.0[i] as u64 == s;
    }
    u64::try_from(r).expect("rank exceeds u64")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MuSetError {
    #[error("arithmetic step must be at least 1")]
    ZeroStep,
    #[error("explicit list must be strictly increasing")]
    UnsortedList,
}

/// An infinite subset of ℕ; checkpoint indices λ are drawn from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MuSet {
    /// All of ℕ.
    All,
    /// start + step·n for n = 0, 1, …
    Arithmetic { start: u64, step: u64 },
    /// Finite sorted list, then an arithmetic tail.
    ListThenArithmetic {
        list: Vec<u64>,
        start: u64,
        step: u64,
    },
}

impl MuSet {
    pub fn arithmetic(start: u64, step: u64) -> Result<Self, MuSetError> {
        if step == 0 {
            return Err(MuSetError::ZeroStep);
        }
        Ok(MuSet::Arithmetic { start, step })
    }

    pub fn list_then_arithmetic(list: Vec<u64>, start: u64, step: u64) -> Result<Self, MuSetError> {
        if step == 0 {
            return Err(MuSetError::ZeroStep);
        }
        if list.windows(2).any(|p| p[0] >= p[1]) {
            return Err(MuSetError::UnsortedList);
        }
        Ok(MuSet::ListThenArithmetic { list, start, step })
    }

    /// Smallest element ≥ n_min.
    pub fn next_at_least(&self, n_min: u64) -> u64 {
        match self {
            MuSet::All => n_min,
            MuSet::Arithmetic { start, step } => arith_next(*start, *step, n_min),
            MuSet::ListThenArithmetic { list, start, step } => {
                let from_list = list.iter().copied().find(|&n| n >= n_min);
                let from_tail = arith_next(*start, *step, n_min);
                from_list.map_or(from_tail, |n| n.min(from_tail))
            }
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            MuSet::All => true,
            MuSet::Arithmetic { start, step } => n >= *start && (n - start).is_multiple_of(*step),
            MuSet::ListThenArithmetic { list, start, step } => {
                list.binary_search(&n).is_ok() || (n >= *start && (n - start).is_multiple_of(*step))
            }
        }
    }
}

fn arith_next(start: u64, step: u64, n_min: u64) -> u64 {
    if n_min <= start {
        start
    } else {
        start + (n_min - start).div_ceil(step) * step
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force oracle: all m with |m|₁ ≤ max_deg, sorted by (degree, lex).
    fn oracle_graded_lex(dim: usize, max_deg: u32) -> Vec<MultiIndex> {
        let mut all = Vec::new();
        gen_bounded(dim, max_deg as u64, &mut vec![], &mut all, |m| {
            m.total_degree() <= max_deg as u64
        });
        all.sort_by_key(|m| (m.total_degree(), m.0.clone()));
        all
    }

    /// Brute-force oracle: all m with |m|_∞ ≤ max_shell, sorted by (shell, lex).
    fn oracle_graded_max(dim: usize, max_shell: u32) -> Vec<MultiIndex> {
        let mut all = Vec::new();
        gen_bounded(dim, max_shell as u64, &mut vec![], &mut all, |_| true);
        all.sort_by_key(|m| (m.max_degree(), m.0.clone()));
        all
    }

    fn gen_bounded(
        dim: usize,
        cap: u64,
        cur: &mut Vec<u32>,
        out: &mut Vec<MultiIndex>,
        keep: impl Fn(&MultiIndex) -> bool + Copy,
    ) {
        if cur.len() == dim {
            let m = MultiIndex(cur.clone());
            if keep(&m) {
                out.push(m);
            }
            return;
        }
        for v in 0..=cap {
            cur.push(v as u32);
            gen_bounded(dim, cap, cur, out, keep);
            cur.pop();
        }
    }

    #[test]
    fn graded_lex_d1_is_identity() {
        let e = Enumeration::graded_lex(1).unwrap();
        assert_eq!(e.enumerate(7), MultiIndex(vec![7]));
        assert_eq!(e.index_of(&MultiIndex(vec![7])), 7);
    }

    #[test]
    fn graded_lex_d2_first_six() {
        let e = Enumeration::graded_lex(2).unwrap();
        let expected = [
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![0, 2],
            vec![1, 1],
            vec![2, 0],
        ];
        for (k, want) in expected.iter().enumerate() {
            assert_eq!(e.enumerate(k as u64).0, *want, "k = {k}");
        }
        assert_eq!(e.index_of(&MultiIndex(vec![1, 1])), 4);
    }

    #[test]
    fn graded_lex_matches_oracle() {
        for dim in 1..=3 {
            let e = Enumeration::graded_lex(dim).unwrap();
            let oracle = oracle_graded_lex(dim, 6);
            for (k, want) in oracle.iter().enumerate() {
                assert_eq!(&e.enumerate(k as u64), want, "dim {dim} k {k}");
            }
        }
    }

    #[test]
    fn graded_max_matches_oracle() {
        for dim in 1..=3 {
            let e = Enumeration::graded_max(dim).unwrap();
            let oracle = oracle_graded_max(dim, 4);
            for (k, want) in oracle.iter().enumerate() {
                assert_eq!(&e.enumerate(k as u64), want, "dim {dim} k {k}");
            }
        }
    }

    #[test]
    fn graded_max_d2_k3() {
        // Shell 0 is {(0,0)}; shell 1 in lex order is (0,1),(1,0),(1,1).
        let e = Enumeration::graded_max(2).unwrap();
        assert_eq!(e.enumerate(3), MultiIndex(vec![1, 1]));
    }

    #[test]
    fn zero_index_is_first_in_graded_schemes() {
        let e = Enumeration::graded_lex(3).unwrap();
        assert_eq!(e.index_of(&MultiIndex::zero(3)), 0);
        let e = Enumeration::graded_max(3).unwrap();
        assert_eq!(e.index_of(&MultiIndex::zero(3)), 0);
    }

    #[test]
    fn surjectivity_prefix_graded_lex_d2() {
        let e = Enumeration::graded_lex(2).unwrap();
        for big_d in 0u64..=20 {
            let count = (big_d + 1) * (big_d + 2) / 2;
            let mut prefix: Vec<MultiIndex> = (0..count).map(|k| e.enumerate(k)).collect();
            let mut expected = oracle_graded_lex(2, big_d as u32);
            prefix.sort();
            expected.sort();
            assert_eq!(prefix, expected, "D = {big_d}");
        }
    }

    #[test]
    fn table_prefix_then_skipping_tail() {
        let prefix = vec![MultiIndex(vec![3]), MultiIndex(vec![5])];
        let e = Enumeration::new(1, EnumerationScheme::Table { prefix }).unwrap();
        let expected = [3, 5, 0, 1, 2, 4, 6, 7, 8];
        for (k, want) in expected.iter().enumerate() {
            assert_eq!(e.enumerate(k as u64), MultiIndex(vec![*want]), "k = {k}");
        }
        assert_eq!(e.index_of(&MultiIndex(vec![5])), 1);
        assert_eq!(e.index_of(&MultiIndex(vec![4])), 5);
    }

    #[test]
    fn table_rejects_bad_prefixes() {
        let dup = vec![MultiIndex(vec![2]), MultiIndex(vec![2])];
        assert_eq!(
            Enumeration::new(1, EnumerationScheme::Table { prefix: dup }).unwrap_err(),
            EnumerationError::DuplicatePrefix {
                first: 0,
                second: 1
            }
        );
        let wrong_dim = vec![MultiIndex(vec![1, 2])];
        assert!(matches!(
            Enumeration::new(1, EnumerationScheme::Table { prefix: wrong_dim }).unwrap_err(),
            EnumerationError::PrefixDimension { position: 0, .. }
        ));
    }

    #[test]
    fn roundtrip_all_schemes() {
        let table_prefix = |dim: usize| {
            vec![
                MultiIndex::unit(dim, 0, 4),
                MultiIndex::zero(dim),
                MultiIndex::unit(dim, dim - 1, 2),
            ]
        };
        for dim in 1..=3 {
            let schemes = [
                Enumeration::graded_lex(dim).unwrap(),
                Enumeration::graded_max(dim).unwrap(),
                Enumeration::new(
                    dim,
                    EnumerationScheme::Table {
                        prefix: table_prefix(dim),
                    },
                )
                .unwrap(),
            ];
            for e in &schemes {
                for k in 0..2000u64 {
                    let m = e.enumerate(k);
                    assert_eq!(e.index_of(&m), k, "dim {dim} scheme {:?}", e.scheme);
                }
            }
        }
    }

    #[test]
    fn roundtrip_k17() {
        let e = Enumeration::graded_max(2).unwrap();
        assert_eq!(e.index_of(&e.enumerate(17)), 17);
    }

    #[test]
    fn mu_next_examples() {
        let evens = MuSet::arithmetic(0, 2).unwrap();
        assert_eq!(evens.next_at_least(7), 8);
        let one_mod_three = MuSet::arithmetic(1, 3).unwrap();
        assert_eq!(one_mod_three.next_at_least(10), 10);
        let listed = MuSet::list_then_arithmetic(vec![3, 5], 100, 7).unwrap();
        assert_eq!(listed.next_at_least(6), 100);
        assert_eq!(listed.next_at_least(4), 5);
        assert_eq!(MuSet::All.next_at_least(42), 42);
    }

    #[test]
    fn mu_rejects_invalid() {
        assert_eq!(MuSet::arithmetic(0, 0).unwrap_err(), MuSetError::ZeroStep);
        assert_eq!(
            MuSet::list_then_arithmetic(vec![5, 3], 10, 1).unwrap_err(),
            MuSetError::UnsortedList
        );
    }

    proptest! {
        #[test]
        fn roundtrip_random_indices(k in 0u64..100_000, dim in 1usize..4) {
            for e in [Enumeration::graded_lex(dim).unwrap(), Enumeration::graded_max(dim).unwrap()] {
                let m = e.enumerate(k);
                prop_assert_eq!(e.index_of(&m), k);
            }
        }

        #[test]
        fn mu_next_is_minimal_member(n_min in 0u64..10_000, start in 0u64..50, step in 1u64..9) {
            for mu in [
                MuSet::All,
                MuSet::arithmetic(start, step).unwrap(),
                MuSet::list_then_arithmetic(vec![1, 4, 9], start + 100, step).unwrap(),
            ] {
                let n = mu.next_at_least(n_min);
                prop_assert!(n >= n_min);
                prop_assert!(mu.contains(n));
                for between in n_min..n {
                    prop_assert!(!mu.contains(between));
                }
            }
        }
    }
}
