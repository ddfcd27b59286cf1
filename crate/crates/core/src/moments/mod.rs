//! Pseudomoments `𝓜_{k,ϱ}(N)`, smoothed moments `𝓢_{k,ϱ}(N)` and `L^{2k}` norms
//! of Dirichlet polynomials, evaluated through the diagonal expansion
//!
//! ```text
//! ‖Σ a_n n^{-s}‖_{2k}^{2k} = Σ_m |Σ_{n_1⋯n_k = m} a_{n_1}⋯a_{n_k}|².
//! ```
//!
//! For the twisted partial sums `a_n = ϱ^{Ω(n)} n^{-1/2}` the inner sum is
//! `ϱ^{Ω(m)} d_{k,N}(m) / √m`, so only integer counts are convolved and the
//! twist enters through `(ϱ²)^{Ω(m)}`. Small instances are summed exactly;
//! larger ones are summed in multiple precision, segment by segment.

mod convolution;
mod dirichlet;

use std::time::{Duration, Instant};

use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};
use serde::ser::{Serialize, SerializeStruct, Serializer};

pub use convolution::{
    restricted_divisor_table, support_bound, ConvolutionTable, Scalar, TableBudget, TableStorage,
    DEFAULT_SEGMENT_LEN,
};
pub use dirichlet::{Coefficients, DirichletPolynomial, Normalization};

use crate::arith::{big_omega_segment, PrimeTable};
use crate::error::{Error, Result};
use crate::numeric::{decimal_string, rational_string, with_workers, DEFAULT_PRECISION_BITS};
use convolution::Convolver;

/// Largest support `N^k` summed in exact rational arithmetic by default.
pub const DEFAULT_EXACT_LIMIT: u64 = 1 << 21;

/// Extra working bits carried by the floating-point paths.
const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentOptions {
    pub precision_bits: u32,
    pub budget: TableBudget,
    /// Above this support the exact rational value is not formed.
    pub exact_limit: u64,
    pub segment_len: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            precision_bits: DEFAULT_PRECISION_BITS,
            budget: TableBudget::default(),
            exact_limit: DEFAULT_EXACT_LIMIT,
            segment_len: DEFAULT_SEGMENT_LEN,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentParams {
    pub n: u64,
    pub k: u32,
    pub rho_squared: Rational,
    pub smoothed: bool,
}

#[derive(Debug, Clone)]
pub struct MomentResult {
    pub params: MomentParams,
    pub value_exact: Option<Rational>,
    pub value_float: Float,
    pub precision_bits: u32,
    pub elapsed: Duration,
}

impl MomentResult {
    pub fn to_f64(&self) -> f64 {
        self.value_float.to_f64()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("moment result serializes")
    }
}

// `elapsed` is deliberately left out so that repeated runs serialize identically.
impl Serialize for MomentResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MomentResult", 7)?;
        st.serialize_field("N", &self.params.n)?;
        st.serialize_field("k", &self.params.k)?;
        st.serialize_field("rho_squared", &rational_string(&self.params.rho_squared))?;
        st.serialize_field("smoothed", &self.params.smoothed)?;
        st.serialize_field(
            "value_exact",
            &self.value_exact.as_ref().map(rational_string),
        )?;
        st.serialize_field("value_float", &decimal_string(&self.value_float))?;
        st.serialize_field("precision_bits", &self.precision_bits)?;
        st.end()
    }
}

fn check_params(n: u64, k: u32, rho_squared: &Rational) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if *rho_squared < 0 {
        return Err(Error::invalid("rho^2 must be nonnegative"));
    }
    Ok(())
}

/// `𝓜_{k,ϱ}(N) = Σ_m d_{k,N}(m)² (ϱ²)^{Ω(m)} / m`.
pub fn pseudomoment(
    n: u64,
    k: u32,
    rho_squared: &Rational,
    opts: &MomentOptions,
) -> Result<MomentResult> {
    check_params(n, k, rho_squared)?;
    let start = Instant::now();
    let support = support_bound(n, k, &opts.budget)?;
    let conv = Convolver::new(n, k, 0u64, |_| 1, &opts.budget)?;
    let primes = omega_primes(support);
    let seg = opts.segment_len;
    let params = MomentParams {
        n,
        k,
        rho_squared: rho_squared.clone(),
        smoothed: false,
    };

    let (value_exact, value_float) = if support <= opts.exact_limit {
        let weights = omega_weights(rho_squared, max_omega(support));
        let parts = with_workers(opts.workers, || {
            conv.map_segments(seg, |lo, counts| {
                let omega = big_omega_segment(lo, lo + counts.len() as u64, &primes);
                let terms: Vec<(Integer, Integer)> = counts
                    .iter()
                    .zip(&omega)
                    .enumerate()
                    .filter(|(_, (d, w))| **d != 0 && weights.numer[**w as usize] != 0)
                    .map(|(i, (d, w))| {
                        let d = Integer::from(*d);
                        let num = Integer::from(&d * &d) * &weights.numer[*w as usize];
                        (num, Integer::from(lo + i as u64))
                    })
                    .collect();
                split_sum(&terms)
            })
        });
        let (p, q) = merge_fractions(parts);
        let exact = Rational::from((p, q * &weights.denom));
        let float = Float::with_val(opts.precision_bits, &exact);
        (Some(exact), float)
    } else {
        let prec = opts.precision_bits + GUARD_BITS;
        let parts = with_workers(opts.workers, || {
            conv.map_segments(seg, |lo, counts| {
                let omega = big_omega_segment(lo, lo + counts.len() as u64, &primes);
                let mut acc: Vec<Float> = Vec::new();
                let mut term = Float::new(prec);
                for (i, (&d, &w)) in counts.iter().zip(&omega).enumerate() {
                    if d == 0 {
                        continue;
                    }
                    let w = w as usize;
                    if acc.len() <= w {
                        acc.resize(w + 1, Float::new(prec));
                    }
                    term.assign(d);
                    term *= d;
                    term /= lo + i as u64;
                    acc[w] += &term;
                }
                acc
            })
        });
        let value = combine_by_omega(parts, rho_squared, prec);
        (None, Float::with_val(opts.precision_bits, &value))
    };

    Ok(MomentResult {
        params,
        value_exact,
        value_float,
        precision_bits: opts.precision_bits,
        elapsed: start.elapsed(),
    })
}

/// `𝓢_{k,ϱ}(N)`: the twisted moment with every factor `n_j` additionally
/// weighted by `1 − log n_j / log N`.
pub fn smoothed_pseudomoment(
    n: u64,
    k: u32,
    rho_squared: &Rational,
    opts: &MomentOptions,
) -> Result<MomentResult> {
    check_params(n, k, rho_squared)?;
    if n < 2 {
        return Err(Error::invalid("the smoothed moment needs N >= 2"));
    }
    let start = Instant::now();
    let prec = opts.precision_bits + GUARD_BITS;
    let support = support_bound(n, k, &opts.budget)?;
    let log_n = Float::with_val(prec, n).ln();
    let conv = Convolver::new(
        n,
        k,
        Float::new(prec),
        |m| {
            let w = 1 - Float::with_val(prec, m).ln() / &log_n;
            // log m / log N is rounded; the endpoint weight is exactly zero.
            if m == n {
                Float::new(prec)
            } else {
                w
            }
        },
        &opts.budget,
    )?;
    let primes = omega_primes(support);
    let parts = with_workers(opts.workers, || {
        conv.map_segments(opts.segment_len, |lo, t| {
            let omega = big_omega_segment(lo, lo + t.len() as u64, &primes);
            let mut acc: Vec<Float> = Vec::new();
            let mut term = Float::new(prec);
            for (i, (c, &w)) in t.iter().zip(&omega).enumerate() {
                if c.is_zero() {
                    continue;
                }
                let w = w as usize;
                if acc.len() <= w {
                    acc.resize(w + 1, Float::new(prec));
                }
                term.assign(c.square_ref());
                term /= lo + i as u64;
                acc[w] += &term;
            }
            acc
        })
    });
    let value = combine_by_omega(parts, rho_squared, prec);
    Ok(MomentResult {
        params: MomentParams {
            n,
            k,
            rho_squared: rho_squared.clone(),
            smoothed: true,
        },
        value_exact: None,
        value_float: Float::with_val(opts.precision_bits, &value),
        precision_bits: opts.precision_bits,
        elapsed: start.elapsed(),
    })
}

/// `‖f‖_{2k}^{2k}` on the polytorus. Exact when the coefficients are rational.
pub fn l2k_norm(f: &DirichletPolynomial, k: u32, opts: &MomentOptions) -> Result<MomentResult> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let start = Instant::now();
    let n = f.length();
    let half = f.normalization() == Normalization::HalfShift;
    let params = MomentParams {
        n,
        k,
        rho_squared: Rational::from(1),
        smoothed: false,
    };
    let (value_exact, value_float) = match f.coefficients() {
        Coefficients::Exact(map) => {
            let conv = Convolver::new(
                n,
                k,
                Rational::new(),
                |m| map.get(&m).cloned().unwrap_or_default(),
                &opts.budget,
            )?;
            let parts = with_workers(opts.workers, || {
                conv.map_segments(opts.segment_len, |lo, c| {
                    let terms: Vec<(Integer, Integer)> = c
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| **c != 0)
                        .map(|(i, c)| {
                            let sq = Rational::from(c.square_ref());
                            let (num, den) = sq.into_numer_denom();
                            let den = if half { den * (lo + i as u64) } else { den };
                            (num, den)
                        })
                        .collect();
                    split_sum(&terms)
                })
            });
            let exact = Rational::from(merge_fractions(parts));
            let float = Float::with_val(opts.precision_bits, &exact);
            (Some(exact), float)
        }
        Coefficients::Real(map) => {
            let prec = opts.precision_bits + GUARD_BITS;
            let conv = Convolver::new(
                n,
                k,
                Float::new(prec),
                |m| {
                    map.get(&m)
                        .map_or(Float::new(prec), |c| Float::with_val(prec, c))
                },
                &opts.budget,
            )?;
            let parts = with_workers(opts.workers, || {
                conv.map_segments(opts.segment_len, |lo, c| {
                    let mut acc = Float::new(prec);
                    for (i, c) in c.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut term = Float::with_val(prec, c.square_ref());
                        if half {
                            term /= lo + i as u64;
                        }
                        acc += &term;
                    }
                    acc
                })
            });
            let mut total = Float::new(prec);
            for p in parts {
                total += &p;
            }
            (None, Float::with_val(opts.precision_bits, &total))
        }
    };
    Ok(MomentResult {
        params,
        value_exact,
        value_float,
        precision_bits: opts.precision_bits,
        elapsed: start.elapsed(),
    })
}

/// `sup_t |f(it)| = Σ a_n` for a polynomial with nonnegative coefficients,
/// attained at the point of the polytorus with every coordinate equal to 1.
pub fn sup_norm_nonneg(f: &DirichletPolynomial, precision_bits: u32) -> Result<Float> {
    if !f.is_nonnegative() {
        return Err(Error::domain(
            "sup norm by coefficient sum needs nonnegative coefficients",
        ));
    }
    let prec = precision_bits + GUARD_BITS;
    let mut total = Float::new(prec);
    for n in f.support() {
        total += f.coefficient(n, prec);
    }
    Ok(Float::with_val(precision_bits, &total))
}

/// Primes needed to sieve Ω over `[1, support]`.
fn omega_primes(support: u64) -> Vec<u64> {
    PrimeTable::global().primes_le(support.isqrt()).into_owned()
}

fn max_omega(support: u64) -> usize {
    support.max(1).ilog2() as usize
}

/// `(ϱ²)^ω = numer[ω] / denom` over a common denominator.
struct OmegaWeights {
    numer: Vec<Integer>,
    denom: Integer,
}

fn omega_weights(rho_squared: &Rational, max_omega: usize) -> OmegaWeights {
    let (a, b) = (rho_squared.numer(), rho_squared.denom());
    let numer = (0..=max_omega)
        .map(|w| Integer::from(a.pow(w as u32)) * Integer::from(b.pow((max_omega - w) as u32)))
        .collect();
    OmegaWeights {
        numer,
        denom: Integer::from(b.pow(max_omega as u32)),
    }
}

/// `Σ p_i / q_i` as an unreduced fraction, by binary splitting.
fn split_sum(terms: &[(Integer, Integer)]) -> (Integer, Integer) {
    match terms.len() {
        0 => (Integer::new(), Integer::from(1)),
        1 => terms[0].clone(),
        len => {
            let (l, r) = terms.split_at(len / 2);
            let (p1, q1) = split_sum(l);
            let (p2, q2) = split_sum(r);
            (p1 * &q2 + p2 * &q1, q1 * q2)
        }
    }
}

fn merge_fractions(mut parts: Vec<(Integer, Integer)>) -> (Integer, Integer) {
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => {
                    let p = Integer::from(&a.0 * &b.1) + Integer::from(&b.0 * &a.1);
                    (p, Integer::from(&a.1 * &b.1))
                }
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    parts.pop().unwrap_or((Integer::new(), Integer::from(1)))
}

/// Merge per-segment sums grouped by Ω in segment order, then apply `(ϱ²)^ω`.
fn combine_by_omega(parts: Vec<Vec<Float>>, rho_squared: &Rational, prec: u32) -> Float {
    let mut totals: Vec<Float> = Vec::new();
    for part in parts {
        if totals.len() < part.len() {
            totals.resize(part.len(), Float::new(prec));
        }
        for (t, p) in totals.iter_mut().zip(&part) {
            *t += p;
        }
    }
    let mut value = Float::new(prec);
    for (w, t) in totals.iter().enumerate() {
        let r = Rational::from(rho_squared.pow(w as i32));
        if r != 0 {
            value += Float::with_val(prec, t * Float::with_val(prec, &r));
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big_omega;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    /// Direct enumeration of all 2k-tuples with equal half products.
    fn brute_force(n: u64, k: u32, rho_squared: &Rational) -> Rational {
        let mut by_product: std::collections::HashMap<u64, u64> = Default::default();
        let mut tuple = vec![1u64; k as usize];
        'outer: loop {
            *by_product.entry(tuple.iter().product()).or_default() += 1;
            for slot in tuple.iter_mut() {
                *slot += 1;
                if *slot <= n {
                    continue 'outer;
                }
                *slot = 1;
            }
            break;
        }
        // Pairs (left, right) with the same product m contribute ϱ^{2Ω(m)}/m each.
        let mut total = Rational::new();
        for (m, count) in by_product {
            let twist = Rational::from(rho_squared.pow(big_omega(m) as i32));
            total += twist * Rational::from((count * count, m));
        }
        total
    }

    #[test]
    fn harmonic_number_at_k_one() {
        let res = pseudomoment(10, 1, &r("1"), &MomentOptions::default()).unwrap();
        assert_eq!(res.value_exact, Some(r("7381/2520")));
    }

    #[test]
    fn small_square_moment() {
        let res = pseudomoment(2, 2, &r("1"), &MomentOptions::default()).unwrap();
        assert_eq!(res.value_exact, Some(r("13/4")));
    }

    #[test]
    fn zero_twist_leaves_only_the_constant_term() {
        for (n, k) in [(1, 1), (7, 2), (5, 3)] {
            let res = pseudomoment(n, k, &r("0"), &MomentOptions::default()).unwrap();
            assert_eq!(res.value_exact, Some(r("1")));
        }
    }

    #[test]
    fn exact_agrees_with_tuple_enumeration() {
        for n in 1..=12 {
            for k in 1..=2 {
                for rho in ["0", "1/4", "1", "25/16", "1/2"] {
                    let rho = r(rho);
                    let res = pseudomoment(n, k, &rho, &MomentOptions::default()).unwrap();
                    assert_eq!(
                        res.value_exact.unwrap(),
                        brute_force(n, k, &rho),
                        "n={n} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn float_path_matches_exact_value() {
        let exact = pseudomoment(40, 3, &r("3/2"), &MomentOptions::default()).unwrap();
        let opts = MomentOptions {
            exact_limit: 0,
            segment_len: 1000,
            ..MomentOptions::default()
        };
        let float = pseudomoment(40, 3, &r("3/2"), &opts).unwrap();
        assert!(float.value_exact.is_none());
        let e = Float::with_val(200, exact.value_exact.as_ref().unwrap());
        let diff = Float::with_val(200, &float.value_float - &e).abs();
        let tol = e * Float::with_val(200, Float::i_exp(1, -(128 - 8)));
        assert!(diff <= tol, "diff {diff}");
    }

    #[test]
    fn exact_and_float_views_are_consistent() {
        let res = pseudomoment(30, 2, &r("5/4"), &MomentOptions::default()).unwrap();
        let e = Float::with_val(256, res.value_exact.as_ref().unwrap());
        let diff = Float::with_val(256, &res.value_float - &e).abs();
        assert!(diff <= e * Float::with_val(256, Float::i_exp(1, -120)));
    }

    #[test]
    fn worker_count_does_not_change_the_payload() {
        let mk = |workers| MomentOptions {
            exact_limit: 0,
            segment_len: 333,
            workers: Some(workers),
            ..MomentOptions::default()
        };
        let a = pseudomoment(25, 3, &r("1/2"), &mk(1)).unwrap();
        let b = pseudomoment(25, 3, &r("1/2"), &mk(4)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let a = smoothed_pseudomoment(25, 2, &r("1"), &mk(1)).unwrap();
        let b = smoothed_pseudomoment(25, 2, &r("1"), &mk(3)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_record_shape() {
        let res = pseudomoment(2, 2, &r("1"), &MomentOptions::default()).unwrap();
        let v = res.to_json();
        assert_eq!(v["N"], 2);
        assert_eq!(v["k"], 2);
        assert_eq!(v["rho_squared"], "1/1");
        assert_eq!(v["smoothed"], false);
        assert_eq!(v["value_exact"], "13/4");
        assert_eq!(v["value_float"], "3.25");
        assert_eq!(v["precision_bits"], 128);
        assert!(v.get("elapsed").is_none());
    }

    #[test]
    fn budget_error_propagates() {
        let opts = MomentOptions {
            budget: TableBudget {
                dense_limit: 1 << 10,
                max_entries: 1 << 16,
            },
            ..MomentOptions::default()
        };
        assert!(matches!(
            pseudomoment(1000, 2, &r("1"), &opts),
            Err(Error::BudgetExceeded {
                required: 1_000_000,
                ..
            })
        ));
    }

    #[test]
    fn smoothed_boundary_weight_vanishes() {
        let res = smoothed_pseudomoment(2, 1, &r("1"), &MomentOptions::default()).unwrap();
        assert_eq!(res.value_float, 1);
        assert!(res.value_exact.is_none());
        assert!(res.params.smoothed);
    }

    #[test]
    fn smoothed_k_one_is_a_direct_sum() {
        for n in [10u64, 1000] {
            let res = smoothed_pseudomoment(n, 1, &r("1"), &MomentOptions::default()).unwrap();
            let ln = (n as f64).ln();
            let direct: f64 = (1..=n)
                .map(|m| (1.0 - (m as f64).ln() / ln).powi(2) / m as f64)
                .sum();
            assert!((res.to_f64() - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn smoothed_k_one_grows_like_a_third_of_log() {
        // Σ (1 − log m/log N)²/m = log N / 3 + γ + o(1); the ratio tends to 1 from above.
        let ratio = |n: u64| {
            let res = smoothed_pseudomoment(n, 1, &r("1"), &MomentOptions::default()).unwrap();
            res.to_f64() / ((n as f64).ln() / 3.0)
        };
        let (a, b, c) = (ratio(100), ratio(1000), ratio(100_000));
        assert!(a > b && b > c && c > 1.0, "{a} {b} {c}");
    }

    #[test]
    fn smoothed_two_fold_matches_pair_enumeration() {
        let n = 9u64;
        let ln = (n as f64).ln();
        let w = |m: u64| 1.0 - (m as f64).ln() / ln;
        let rho2 = 0.5f64;
        let mut t = std::collections::HashMap::<u64, f64>::new();
        for a in 1..=n {
            for b in 1..=n {
                *t.entry(a * b).or_default() += w(a) * w(b);
            }
        }
        let direct: f64 = t
            .iter()
            .map(|(m, c)| c * c * rho2.powi(big_omega(*m) as i32) / *m as f64)
            .sum();
        let res = smoothed_pseudomoment(n, 2, &r("1/2"), &MomentOptions::default()).unwrap();
        assert!((res.to_f64() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn l2k_norm_of_two_prime_terms() {
        let f =
            DirichletPolynomial::from_exact(3, Normalization::Plain, [(2, r("1")), (3, r("1"))])
                .unwrap();
        let res = l2k_norm(&f, 2, &MomentOptions::default()).unwrap();
        assert_eq!(res.value_exact, Some(r("6")));
    }

    #[test]
    fn l2k_norm_of_a_constant() {
        let f = DirichletPolynomial::from_exact(1, Normalization::Plain, [(1, r("5"))]).unwrap();
        for k in 1..=4 {
            let res = l2k_norm(&f, k, &MomentOptions::default()).unwrap();
            assert_eq!(
                res.value_exact,
                Some(Rational::from(Integer::from(5).pow(2 * k)))
            );
        }
    }

    #[test]
    fn l2k_norm_reproduces_the_pseudomoment() {
        for (n, k) in [(2u64, 2u32), (9, 2), (6, 3)] {
            let f = DirichletPolynomial::zeta_partial_sum(n);
            let norm = l2k_norm(&f, k, &MomentOptions::default()).unwrap();
            let pm = pseudomoment(n, k, &r("1"), &MomentOptions::default()).unwrap();
            assert_eq!(norm.value_exact, pm.value_exact);
        }
        let rho = r("2/3");
        let f = DirichletPolynomial::twisted_zeta_partial_sum(11, &rho);
        let norm = l2k_norm(&f, 2, &MomentOptions::default()).unwrap();
        let pm = pseudomoment(
            11,
            2,
            &Rational::from(rho.square_ref()),
            &MomentOptions::default(),
        )
        .unwrap();
        assert_eq!(norm.value_exact, pm.value_exact);
    }

    #[test]
    fn l2k_norm_real_coefficients_match_exact() {
        let exact = DirichletPolynomial::from_exact(
            6,
            Normalization::HalfShift,
            [(1, r("1/2")), (2, r("-3/4")), (5, r("2")), (6, r("1/8"))],
        )
        .unwrap();
        let real = DirichletPolynomial::from_real(
            6,
            Normalization::HalfShift,
            128,
            [(1, 0.5), (2, -0.75), (5, 2.0), (6, 0.125)],
        )
        .unwrap();
        let e = l2k_norm(&exact, 3, &MomentOptions::default()).unwrap();
        let f = l2k_norm(&real, 3, &MomentOptions::default()).unwrap();
        assert!(f.value_exact.is_none());
        assert!((e.to_f64() - f.to_f64()).abs() < 1e-14 * e.to_f64());
    }

    #[test]
    fn sup_norm_of_short_sums() {
        let s = sup_norm_nonneg(&DirichletPolynomial::zeta_partial_sum(4), 128).unwrap();
        let direct = 1.0 + 0.5f64.sqrt() + (1.0f64 / 3.0).sqrt() + 0.5;
        assert!((s.to_f64() - direct).abs() < 1e-15);
        let one = DirichletPolynomial::from_exact(9, Normalization::Plain, [(1, r("1"))]).unwrap();
        assert_eq!(sup_norm_nonneg(&one, 64).unwrap(), 1);
    }

    #[test]
    fn sup_norm_is_close_to_twice_root_n() {
        let n = 10_000u64;
        let s = sup_norm_nonneg(&DirichletPolynomial::zeta_partial_sum(n), 128)
            .unwrap()
            .to_f64();
        let direct: f64 = (1..=n).map(|m| 1.0 / (m as f64).sqrt()).sum();
        assert!((s - direct).abs() < 1e-9);
        assert!((s / (2.0 * (n as f64).sqrt()) - 1.0).abs() < 0.01);
    }

    #[test]
    fn sup_norm_rejects_negative_coefficients() {
        let f = DirichletPolynomial::from_exact(2, Normalization::Plain, [(2, r("-1"))]).unwrap();
        assert!(matches!(sup_norm_nonneg(&f, 64), Err(Error::Domain(_))));
    }

    mod properties {
        use super::super::*;
        use proptest::prelude::*;
        use rug::ops::Pow;

        const PREC: u32 = 256;

        fn exact(n: u64, k: u32, rho: &Rational) -> Rational {
            pseudomoment(n, k, rho, &MomentOptions::default())
                .unwrap()
                .value_exact
                .unwrap()
        }

        fn rho_strategy() -> impl Strategy<Value = Rational> {
            (0u32..=7, 1u32..=4).prop_map(|(p, q)| Rational::from((p, q)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn moment_nondecreasing_in_n(n in 1u64..40, k in 1u32..=3, rho in rho_strategy()) {
                prop_assert!(exact(n, k, &rho) <= exact(n + 1, k, &rho));
            }

            #[test]
            fn moment_nondecreasing_in_rho(n in 1u64..30, k in 1u32..=3, a in rho_strategy(), b in rho_strategy()) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(exact(n, k, &lo) <= exact(n, k, &hi));
            }

            #[test]
            fn smoothed_below_plain(n in 2u64..60, k in 1u32..=3, rho in rho_strategy()) {
                let opts = MomentOptions::default();
                let s = smoothed_pseudomoment(n, k, &rho, &opts).unwrap().value_float;
                let m = Float::with_val(PREC, &exact(n, k, &rho));
                prop_assert!(s <= m);
            }

            #[test]
            fn power_means_increase_and_stay_below_sup(n in 1u64..=50) {
                let one = Rational::from(1);
                let norms: Vec<Float> = (1..=3u32)
                    .map(|k| Float::with_val(PREC, &exact(n, k, &one)).pow(Float::with_val(PREC, 1) / (2 * k)))
                    .collect();
                let sup = (1..=n).fold(Float::with_val(PREC, 0), |acc, m| acc + Float::with_val(PREC, m).recip_sqrt());
                // Slack for the rounding of the fractional powers.
                let eps = Float::with_val(PREC, Float::i_exp(1, -200));
                for w in norms.windows(2) {
                    prop_assert!(Float::with_val(PREC, &w[0] - &w[1]) <= eps);
                }
                prop_assert!(Float::with_val(PREC, &norms[2] - &sup) <= eps);
            }
        }
    }
}
