//! Restricted multiplicative convolutions `c_m = Σ_{n_1⋯n_k = m, n_j <= N} ∏ w(n_j)`.
//!
//! The (k-1)-fold table is built densely by scattering; the k-th level is
//! streamed in disjoint segments of `[1, N^k]`, so callers that only fold
//! over the entries never hold the full table.

use std::collections::HashMap;

use rayon::prelude::*;
use rug::{Float, Rational};

use crate::error::{Error, Result};

/// Values that can be accumulated in a convolution table.
pub trait Scalar: Clone + Send + Sync {
    fn is_zero(&self) -> bool;
    /// `self += a * b`
    fn add_mul(&mut self, a: &Self, b: &Self);
}

impl Scalar for u64 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = a
            .checked_mul(*b)
            .and_then(|p| self.checked_add(p))
            .expect("restricted divisor count overflowed u64");
    }
}

impl Scalar for f64 {
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl Scalar for Rational {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }
}

impl Scalar for Float {
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// Storage limits for convolution tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableBudget {
    /// Largest support stored as a dense array.
    pub dense_limit: u64,
    /// Hard cap on the support `N^k`.
    pub max_entries: u64,
}

impl Default for TableBudget {
    fn default() -> Self {
        TableBudget {
            dense_limit: 1 << 26,
            max_entries: 1 << 28,
        }
    }
}

pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 18;

/// `N^k`, or a budget error if it does not fit.
pub fn support_bound(n: u64, k: u32, budget: &TableBudget) -> Result<u64> {
    let required = (n as u128).checked_pow(k).unwrap_or(u128::MAX);
    if required > budget.max_entries as u128 {
        return Err(Error::BudgetExceeded {
            required,
            available: budget.max_entries,
        });
    }
    Ok(required as u64)
}

pub(crate) struct Convolver<T> {
    n: u64,
    k: u32,
    support: u64,
    /// `weights[a]` for `1 <= a <= N`; index 0 unused.
    weights: Vec<T>,
    /// Dense (k-1)-fold table, index `0..=N^{k-1}`; empty when `k == 1`.
    base: Vec<T>,
    zero: T,
}

impl<T: Scalar> Convolver<T> {
    pub(crate) fn new(
        n: u64,
        k: u32,
        zero: T,
        weight: impl Fn(u64) -> T,
        budget: &TableBudget,
    ) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::invalid("convolution needs N >= 1 and k >= 1"));
        }
        let support = support_bound(n, k, budget)?;
        let base_len = n.pow(k - 1);
        if base_len > budget.dense_limit {
            return Err(Error::BudgetExceeded {
                required: base_len as u128,
                available: budget.dense_limit,
            });
        }
        let mut weights = Vec::with_capacity(n as usize + 1);
        weights.push(zero.clone());
        weights.extend((1..=n).map(&weight));

        let mut base = Vec::new();
        if k >= 2 {
            base = weights.clone();
            for _ in 2..k {
                base = scatter(&base, &weights, &zero);
            }
        }
        Ok(Convolver {
            n,
            k,
            support,
            weights,
            base,
            zero,
        })
    }

    pub(crate) fn support(&self) -> u64 {
        self.support
    }

    /// Entries `c_m` for `m` in `[lo, hi)`, `1 <= lo <= hi <= N^k + 1`.
    pub(crate) fn segment(&self, lo: u64, hi: u64) -> Vec<T> {
        let len = (hi - lo) as usize;
        if self.k == 1 {
            return (lo..hi)
                .map(|m| {
                    if m <= self.n {
                        self.weights[m as usize].clone()
                    } else {
                        self.zero.clone()
                    }
                })
                .collect();
        }
        let mut out = vec![self.zero.clone(); len];
        let bmax = (self.base.len() - 1) as u64;
        for a in 1..=self.n {
            let wa = &self.weights[a as usize];
            if wa.is_zero() {
                continue;
            }
            let b_lo = lo.div_ceil(a).max(1);
            let b_hi = ((hi - 1) / a).min(bmax);
            for b in b_lo..=b_hi {
                let cb = &self.base[b as usize];
                if !cb.is_zero() {
                    out[(a * b - lo) as usize].add_mul(cb, wa);
                }
            }
        }
        out
    }

    /// Apply `f(lo, entries)` to every segment of `[1, N^k]` in parallel and
    /// return the results in segment order.
    pub(crate) fn map_segments<R: Send>(
        &self,
        segment_len: u64,
        f: impl Fn(u64, &[T]) -> R + Sync,
    ) -> Vec<R> {
        let seg = segment_len.max(1);
        let count = self.support.div_ceil(seg);
        (0..count)
            .into_par_iter()
            .map(|i| {
                let lo = 1 + i * seg;
                let hi = (lo + seg).min(self.support + 1);
                let entries = self.segment(lo, hi);
                f(lo, &entries)
            })
            .collect()
    }
}

fn scatter<T: Scalar>(prev: &[T], weights: &[T], zero: &T) -> Vec<T> {
    let n = (weights.len() - 1) as u64;
    let prev_max = (prev.len() - 1) as u64;
    let mut out = vec![zero.clone(); (prev_max * n + 1) as usize];
    for e in 1..=prev_max {
        let ce = &prev[e as usize];
        if ce.is_zero() {
            continue;
        }
        for a in 1..=n {
            let wa = &weights[a as usize];
            if !wa.is_zero() {
                out[(e * a) as usize].add_mul(ce, wa);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub enum TableStorage<T> {
    /// Indexed by `m`; slot 0 unused.
    Dense(Vec<T>),
    /// Nonzero entries only.
    Sparse(HashMap<u64, T>),
}

/// The k-fold restricted convolution of a weight supported on `[1, N]`.
#[derive(Debug, Clone)]
pub struct ConvolutionTable<T> {
    pub k: u32,
    pub n: u64,
    pub support_bound: u64,
    pub storage: TableStorage<T>,
}

impl<T: Scalar> ConvolutionTable<T> {
    pub fn get(&self, m: u64) -> Option<&T> {
        match &self.storage {
            TableStorage::Dense(v) => v
                .get(m as usize)
                .filter(|_| m >= 1)
                .filter(|c| !c.is_zero()),
            TableStorage::Sparse(h) => h.get(&m),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, TableStorage::Dense(_))
    }

    /// Nonzero entries in ascending order of `m`.
    pub fn entries(&self) -> Vec<(u64, &T)> {
        match &self.storage {
            TableStorage::Dense(v) => v
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m as u64, c))
                .collect(),
            TableStorage::Sparse(h) => {
                let mut e: Vec<_> = h.iter().map(|(m, c)| (*m, c)).collect();
                e.sort_unstable_by_key(|(m, _)| *m);
                e
            }
        }
    }
}

/// Materialize `c_m = Σ_{n_1⋯n_k = m, n_j <= N} ∏ weight(n_j)` for `1 <= m <= N^k`.
pub fn restricted_divisor_table<T: Scalar>(
    n: u64,
    k: u32,
    zero: T,
    weight: impl Fn(u64) -> T,
    budget: &TableBudget,
) -> Result<ConvolutionTable<T>> {
    let conv = Convolver::new(n, k, zero.clone(), weight, budget)?;
    let support = conv.support();
    let segments = conv.map_segments(DEFAULT_SEGMENT_LEN, |lo, entries| (lo, entries.to_vec()));
    let storage = if support <= budget.dense_limit {
        let mut dense = Vec::with_capacity(support as usize + 1);
        dense.push(zero);
        for (_, seg) in segments {
            dense.extend(seg);
        }
        TableStorage::Dense(dense)
    } else {
        let mut sparse = HashMap::new();
        for (lo, seg) in segments {
            for (i, c) in seg.into_iter().enumerate() {
                if !c.is_zero() {
                    sparse.insert(lo + i as u64, c);
                }
            }
        }
        TableStorage::Sparse(sparse)
    };
    Ok(ConvolutionTable {
        k,
        n,
        support_bound: support,
        storage,
    })
}
