//! Large-prime tails of `Σ_p log L_p(p^{-s})`.
//!
//! With `log L_p = Σ_i c_i p^{-si}` the tail over `p > P` splits into finitely
//! many prime-zeta values `T(si) = Σ_{p>P} p^{-si}` plus a remainder that is
//! bounded by comparison with `Σ_{n>P} n^{-t} <= P^{1-t}/(t-1)`.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::arith::factorize;

/// Which Euler product the coefficients describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Product {
    /// `(1 - 1/p)^{k²ϱ²} Σ_j d_k(p^j)² ϱ^{2j} p^{-j}`
    Arithmetic,
    /// `Σ_j d_k(p^j)² ϱ^{2j} p^{-sj}`
    Diagonal,
}

/// Coefficients of `N_k(y) = Σ_{i<k} C(k-1, i)² y^i`, so that
/// `Σ_j d_k(p^j)² y^j = N_k(y) / (1 - y)^{2k-1}`.
pub(crate) fn numerator_poly(k: u32) -> Vec<Integer> {
    (0..k)
        .map(|i| Integer::from(Integer::binomial_u(k - 1, i)).pow(2))
        .collect()
}

/// `ℓ_1..ℓ_terms` with `log N_k(y) = Σ ℓ_i y^i`.
fn log_series(k: u32, terms: usize) -> Vec<Rational> {
    let n = numerator_poly(k);
    let coeff = |i: usize| n.get(i).cloned().unwrap_or_default();
    let mut l: Vec<Rational> = vec![Rational::new(); terms + 1];
    for i in 1..=terms {
        let mut acc = Rational::from(coeff(i) * i as u32);
        for (j, lj) in l.iter().enumerate().take(i).skip(1) {
            acc -= Rational::from(lj * j as u32) * coeff(i - j);
        }
        l[i] = acc / i as u32;
    }
    l
}

/// `c_1..c_terms` (index 0 unused) with `log L_p = Σ_i c_i x^i`, `x = p^{-s}`.
pub(crate) fn log_coefficients(
    k: u32,
    rho_squared: &Rational,
    product: Product,
    terms: usize,
) -> Vec<Rational> {
    let l = log_series(k, terms);
    let k2r = Rational::from(rho_squared * (k * k));
    let mut c = vec![Rational::new(); terms + 1];
    for i in 1..=terms {
        let ri = Rational::from(rho_squared.pow(i as i32));
        let mut ci = Rational::from(&ri * (2 * k - 1)) / i as u32 + Rational::from(&l[i] * &ri);
        if product == Product::Arithmetic {
            ci -= Rational::from(&k2r / i as u32);
        }
        c[i] = ci;
    }
    c
}

/// `(C, R)` with `|c_i| <= C R^i / i` for every `i >= 1`.
pub(crate) fn coefficient_envelope(
    k: u32,
    rho_squared: &Rational,
    product: Product,
    prec: u32,
) -> (Float, Float) {
    // Fujiwara's bound on the roots of the reversed (monic) numerator polynomial.
    let n = numerator_poly(k);
    let mut b = Float::new(prec);
    for (i, ni) in n.iter().enumerate().skip(1) {
        let root = Float::with_val(prec, ni).pow(Float::with_val(prec, 1) / i as u32);
        if root > b {
            b = root;
        }
    }
    b *= 2;
    let r = Float::with_val(prec, rho_squared);
    let mut big_r = Float::with_val(prec, &r * b.max(&Float::with_val(prec, 1)));
    if big_r < 1 {
        big_r = Float::with_val(prec, 1);
    }
    let mut c = Float::with_val(prec, 3 * k - 2);
    if product == Product::Arithmetic {
        c += Float::with_val(prec, &r * (k * k));
    }
    (c, big_r)
}

/// Bound on `Σ_{i>terms} |c_i| Σ_{p>P} p^{-si}`; infinite when the envelope
/// does not contract.
pub(crate) fn remainder_bound(
    c: &Float,
    big_r: &Float,
    p: u64,
    s: &Float,
    terms: u32,
    prec: u32,
) -> Float {
    let m = terms + 1;
    let ps = Float::with_val(prec, p).pow(s);
    if *big_r >= ps {
        return Float::with_val(prec, rug::float::Special::Infinity);
    }
    let sm = Float::with_val(prec, s * m);
    let lead = Float::with_val(prec, c * Float::with_val(prec, big_r.pow(m))) / m;
    let decay = Float::with_val(prec, p).pow(Float::with_val(prec, 1 - &sm))
        / Float::with_val(prec, &sm - 1);
    let ratio = 1 - Float::with_val(prec, big_r / &ps);
    lead * decay / ratio
}

fn mobius(n: u64) -> i32 {
    let f = factorize(n).expect("small argument factors");
    if f.factors().iter().any(|&(_, e)| e > 1) {
        0
    } else if f.factors().len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `Σ_p p^{-t}` for `t > 1` via `Σ_n μ(n)/n log ζ(nt)`, with a bound on the
/// truncation error.
pub(crate) fn prime_zeta(t: &Float, prec: u32) -> (Float, Float) {
    let wp = prec + 16;
    let target = Float::with_val(wp, Float::i_exp(1, -(prec as i32) - 4));
    let two_t = Float::with_val(wp, 2).pow(Float::with_val(wp, -t));
    let geom = 1 - Float::with_val(wp, &two_t);
    // Σ_{n>n0} (ζ(nt) - 1)/n <= 3·2^{-(n0+1)t} / ((n0+1)(1 - 2^{-t})) once (n0+1)t >= 2.
    let truncation = |n0: u64| {
        let m = n0 + 1;
        Float::with_val(wp, two_t.clone().pow(m)) * 3 / m / &geom
    };
    let mut n0 = 1u64;
    while Float::with_val(wp, t * (n0 + 1)) < 2 || truncation(n0) > target {
        n0 += 1;
    }
    let mut sum = Float::new(wp);
    for n in 1..=n0 {
        let mu = mobius(n);
        if mu == 0 {
            continue;
        }
        let z = Float::with_val(wp, t * n).zeta();
        let term = z.ln() / n;
        if mu > 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    (
        Float::with_val(prec, sum),
        Float::with_val(prec, truncation(n0)),
    )
}
