//! Arithmetic substrate: prime tables, factorization, multiplicative
//! functions, smooth numbers and Dickman's function.

mod dickman;
mod smooth;

pub use dickman::dickman_rho;
pub use smooth::{
    psi_product_estimate, psi_smooth_count, psi_smooth_count_capped, smooth_set, SmoothSet,
};

use std::sync::OnceLock;

use rug::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default sieve limit backing trial-division factorization.
pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let len = limit as usize + 1;
    let mut composite = vec![false; len];
    let mut primes = Vec::with_capacity(prime_count_hint(limit));
    for i in 2..len {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j < len {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

fn prime_count_hint(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize + 8
    }
}

/// Number of primes `<= x`.
pub fn prime_pi(x: u64) -> usize {
    let table = PrimeTable::global();
    if x <= table.limit {
        table.primes.partition_point(|&p| p <= x)
    } else {
        primes_up_to(x).len()
    }
}

/// Immutable prime table used for trial division. Shareable across threads.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Self {
        PrimeTable {
            limit,
            primes: primes_up_to(limit),
        }
    }

    /// Process-wide table with [`DEFAULT_SIEVE_LIMIT`].
    pub fn global() -> &'static PrimeTable {
        static TABLE: OnceLock<PrimeTable> = OnceLock::new();
        TABLE.get_or_init(|| PrimeTable::new(DEFAULT_SIEVE_LIMIT))
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `<= x`, borrowed from the table when it is large enough.
    pub fn primes_le(&self, x: u64) -> std::borrow::Cow<'_, [u64]> {
        if x <= self.limit {
            let end = self.primes.partition_point(|&p| p <= x);
            std::borrow::Cow::Borrowed(&self.primes[..end])
        } else {
            std::borrow::Cow::Owned(primes_up_to(x))
        }
    }

    pub fn factorize(&self, n: u64) -> Result<FactoredInteger> {
        if n == 0 {
            return Err(Error::invalid("cannot factorize 0"));
        }
        let mut rem = n;
        let mut factors = Vec::new();
        for &p in &self.primes {
            if p.saturating_mul(p) > rem {
                break;
            }
            if rem.is_multiple_of(p) {
                let mut e = 0;
                while rem.is_multiple_of(p) {
                    rem /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        if rem > 1 {
            // Every prime <= limit was tried, so a cofactor below (limit+1)² is prime.
            let reach = (self.limit as u128 + 1) * (self.limit as u128 + 1);
            if rem as u128 >= reach {
                return Err(Error::domain(format!(
                    "{n} has a cofactor {rem} beyond the reach of the sieve (limit {})",
                    self.limit
                )));
            }
            factors.push((rem, 1));
        }
        Ok(FactoredInteger { n, factors })
    }
}

/// A positive integer with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactoredInteger {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(prime, exponent)` pairs sorted by prime.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.factors.last().map(|&(p, _)| p)
    }

    pub fn reconstruct(&self) -> u128 {
        self.factors
            .iter()
            .fold(1u128, |acc, &(p, e)| acc * (p as u128).pow(e))
    }
}

pub fn factorize(n: u64) -> Result<FactoredInteger> {
    PrimeTable::global().factorize(n)
}

/// Ω(n), the number of prime factors of `n` counted with multiplicity.
///
/// Panics if `n == 0`.
pub fn big_omega(n: u64) -> u32 {
    assert!(n > 0, "big_omega is defined for n >= 1");
    factorize(n)
        .map(|f| f.big_omega())
        .unwrap_or_else(|e| panic!("{e}"))
}

/// Ω(m) for every `m` in `[lo, hi)`, by a segmented sieve. `lo >= 1`.
pub fn big_omega_segment(lo: u64, hi: u64, primes: &[u64]) -> Vec<u8> {
    assert!(lo >= 1 && hi >= lo);
    let len = (hi - lo) as usize;
    let mut rem: Vec<u64> = (lo..hi).collect();
    let mut omega = vec![0u8; len];
    for &p in primes {
        if p.saturating_mul(p) >= hi {
            break;
        }
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m < hi {
            let i = (m - lo) as usize;
            while rem[i].is_multiple_of(p) {
                rem[i] /= p;
                omega[i] += 1;
            }
            m += p;
        }
    }
    for i in 0..len {
        if rem[i] > 1 {
            omega[i] += 1;
        }
    }
    omega
}

/// d_k(p^j) = C(j + k - 1, j), independent of the prime p.
pub fn dk_prime_power(k: u32, j: u32) -> Integer {
    assert!(k >= 1, "d_k is defined for k >= 1");
    Integer::from(Integer::binomial_u(j + k - 1, j))
}
