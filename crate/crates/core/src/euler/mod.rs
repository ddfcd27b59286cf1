//! Euler products built from `d_k(p^j)² ϱ^{2j}`: the arithmetic factor
//! `a(k,ϱ)`, the diagonal series `F_{k,ϱ}(σ,…,σ)`, and the explicit
//! comparison formulas used to read off their size.

mod tail;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::arith::PrimeTable;
use crate::error::{Error, Result};
use crate::numeric::{decimal_string, euler_gamma, rational_string, DEFAULT_PRECISION_BITS};
use tail::{coefficient_envelope, log_coefficients, prime_zeta, remainder_bound, Product};

pub const DEFAULT_TRUNCATION_PRIME: u64 = 100_000;
pub const DEFAULT_CORRECTION_TERMS: u32 = 8;
/// Hard cap on the number of terms of a local series.
pub const MAX_LOCAL_TERMS: usize = 10_000;

const GUARD_BITS: u32 = 32;

/// How the primes above the truncation point are accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    /// Only the comparison bound; nothing is added to the value.
    Elementary,
    /// The leading terms of the tail are added through prime-zeta values and
    /// the rest is bounded.
    Corrected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerOptions {
    pub precision_bits: u32,
    pub truncation_prime: u64,
    /// `ϱ²` is restricted to `[0, 2 − δ]`.
    pub delta: Rational,
    pub tail_mode: TailMode,
    pub correction_terms: u32,
}

impl Default for EulerOptions {
    fn default() -> Self {
        EulerOptions {
            precision_bits: DEFAULT_PRECISION_BITS,
            truncation_prime: DEFAULT_TRUNCATION_PRIME,
            delta: Rational::from((1, 4)),
            tail_mode: TailMode::Corrected,
            correction_terms: DEFAULT_CORRECTION_TERMS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EulerProductValue {
    pub k: u32,
    pub rho_squared: Rational,
    /// `None` for `a(k,ϱ)`.
    pub sigma: Option<f64>,
    pub value: Float,
    pub truncation_prime: u64,
    /// Bound on `|log(true value) − log(value)|`.
    pub tail_bound: Float,
    pub precision_bits: u32,
}

impl EulerProductValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("euler value serializes")
    }
}

impl Serialize for EulerProductValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EulerProductValue", 7)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("rho_squared", &rational_string(&self.rho_squared))?;
        st.serialize_field("sigma", &self.sigma.map(|x| format!("{x:?}")))?;
        st.serialize_field("value", &decimal_string(&self.value))?;
        st.serialize_field("truncation_prime", &self.truncation_prime)?;
        st.serialize_field("tail_bound", &decimal_string(&self.tail_bound))?;
        st.serialize_field("precision_bits", &self.precision_bits)?;
        st.end()
    }
}

fn check_rho(k: u32, rho_squared: &Rational, opts: &EulerOptions) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if *rho_squared < 0 {
        return Err(Error::invalid("rho^2 must be nonnegative"));
    }
    let cap = Rational::from(2 - &opts.delta);
    if *rho_squared > cap {
        return Err(Error::invalid(format!(
            "rho^2 = {} exceeds 2 - delta = {}",
            rational_string(rho_squared),
            rational_string(&cap)
        )));
    }
    Ok(())
}

/// `Σ_j d_k(p^j)² y^j`, summed until the increment drops below
/// `2^{-prec-8}` of the partial sum.
fn local_series(p: u64, k: u32, rho_squared: &Rational, y: &Float, prec: u32) -> Result<Float> {
    let divergence = || Error::Divergence {
        p,
        k,
        rho_squared: rational_string(rho_squared),
        cutoff: MAX_LOCAL_TERMS,
    };
    if *y >= 1 {
        return Err(divergence());
    }
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) - 8));
    let mut sum = Float::with_val(prec, 1);
    let mut power = Float::with_val(prec, 1);
    for j in 1..=MAX_LOCAL_TERMS as u32 {
        power *= y;
        let d = Integer::from(Integer::binomial_u(j + k - 1, j));
        let term = Float::with_val(prec, &power * Integer::from(&d * &d));
        sum += &term;
        // Beyond j the term ratio ((j+k)/(j+1))²·y is below 1 and decreasing.
        let ratio = Float::with_val(prec, y * ((j + k) * (j + k))) / ((j + 1) * (j + 1));
        if ratio < 1 && term <= Float::with_val(prec, &sum * &eps) {
            return Ok(sum);
        }
    }
    Err(divergence())
}

fn check_prime(p: u64) -> Result<()> {
    let table = PrimeTable::global();
    let is_prime = p >= 2 && table.factorize(p).is_ok_and(|f| f.factors() == [(p, 1)]);
    if is_prime {
        Ok(())
    } else {
        Err(Error::invalid(format!("{p} is not a prime")))
    }
}

/// `(1 − 1/p)^{k²ϱ²} Σ_j d_k(p^j)² ϱ^{2j} p^{-j}`.
pub fn local_factor_a(
    p: u64,
    k: u32,
    rho_squared: &Rational,
    opts: &EulerOptions,
) -> Result<Float> {
    check_rho(k, rho_squared, opts)?;
    check_prime(p)?;
    let prec = opts.precision_bits + GUARD_BITS;
    let x = Float::with_val(prec, 1) / p;
    let v = arithmetic_local(p, k, rho_squared, &x, prec)?;
    Ok(Float::with_val(opts.precision_bits, v))
}

/// `Σ_j d_k(p^j)² ϱ^{2j} p^{-(1+2σ)j}`.
pub fn local_factor_f(
    p: u64,
    k: u32,
    rho_squared: &Rational,
    sigma: f64,
    opts: &EulerOptions,
) -> Result<Float> {
    check_rho(k, rho_squared, opts)?;
    check_prime(p)?;
    let prec = opts.precision_bits + GUARD_BITS;
    let s = shift(sigma, prec)?;
    let x = Float::with_val(prec, p).pow(Float::with_val(prec, -&s));
    let y = Float::with_val(prec, &x * rho_squared);
    Ok(Float::with_val(
        opts.precision_bits,
        local_series(p, k, rho_squared, &y, prec)?,
    ))
}

fn arithmetic_local(p: u64, k: u32, rho_squared: &Rational, x: &Float, prec: u32) -> Result<Float> {
    let y = Float::with_val(prec, x * rho_squared);
    let series = local_series(p, k, rho_squared, &y, prec)?;
    let k2r = Float::with_val(prec, Rational::from(rho_squared * (k * k)));
    let damp = (Float::with_val(prec, -x).ln_1p() * k2r).exp();
    Ok(series * damp)
}

fn shift(sigma: f64, prec: u32) -> Result<Float> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma must be a positive real"));
    }
    Ok(1 + Float::with_val(prec, sigma) * 2u32)
}

/// `a(k,ϱ) = ∏_p (1 − 1/p)^{k²ϱ²} Σ_j d_k(p^j)² ϱ^{2j} p^{-j}`.
pub fn arithmetic_factor(
    k: u32,
    rho_squared: &Rational,
    opts: &EulerOptions,
) -> Result<EulerProductValue> {
    check_rho(k, rho_squared, opts)?;
    euler_product(k, rho_squared, None, opts)
}

/// `F_{k,ϱ}(σ,…,σ) = Σ_n d_k(n)² ϱ^{2Ω(n)} n^{-1-2σ}` as an Euler product.
pub fn diagonal_f(
    k: u32,
    rho_squared: &Rational,
    sigma: f64,
    opts: &EulerOptions,
) -> Result<EulerProductValue> {
    check_rho(k, rho_squared, opts)?;
    euler_product(k, rho_squared, Some(sigma), opts)
}

fn euler_product(
    k: u32,
    rho_squared: &Rational,
    sigma: Option<f64>,
    opts: &EulerOptions,
) -> Result<EulerProductValue> {
    let big_p = opts.truncation_prime;
    let k2r = Rational::from(rho_squared * (k * k));
    if big_p < k2r || big_p < 100 {
        return Err(Error::invalid(format!(
            "truncation prime {big_p} must be at least max(k^2 rho^2, 100)"
        )));
    }
    let prec = opts.precision_bits + GUARD_BITS;
    let product = if sigma.is_some() {
        Product::Diagonal
    } else {
        Product::Arithmetic
    };
    let s = match sigma {
        Some(sg) => shift(sg, prec)?,
        None => Float::with_val(prec, 1),
    };
    let result = |value: Float, tail: Float| EulerProductValue {
        k,
        rho_squared: rho_squared.clone(),
        sigma,
        value: Float::with_val(opts.precision_bits, value),
        truncation_prime: big_p,
        tail_bound: Float::with_val(opts.precision_bits, tail),
        precision_bits: opts.precision_bits,
    };

    // Every local factor is identically 1.
    let trivial =
        *rho_squared == 0 || (product == Product::Arithmetic && k == 1 && *rho_squared == 1);
    if trivial {
        return Ok(result(Float::with_val(prec, 1), Float::new(prec)));
    }

    let terms = match (opts.tail_mode, product) {
        (TailMode::Corrected, _) => opts.correction_terms.max(1),
        (TailMode::Elementary, Product::Arithmetic) => 1,
        (TailMode::Elementary, Product::Diagonal) => 0,
    };
    let coeffs = log_coefficients(k, rho_squared, product, terms as usize);

    let primes = PrimeTable::global().primes_le(big_p);
    let mut value = Float::with_val(prec, 1);
    let mut power_sums = vec![Float::new(prec); terms as usize + 1];
    for &p in primes.iter() {
        let x = match product {
            Product::Arithmetic => Float::with_val(prec, 1) / p,
            Product::Diagonal => Float::with_val(prec, p).pow(Float::with_val(prec, -&s)),
        };
        let local = match product {
            Product::Arithmetic => arithmetic_local(p, k, rho_squared, &x, prec)?,
            Product::Diagonal => {
                let y = Float::with_val(prec, &x * rho_squared);
                local_series(p, k, rho_squared, &y, prec)?
            }
        };
        value *= &local;
        let mut xi = Float::with_val(prec, 1);
        for sum in power_sums.iter_mut().skip(1) {
            xi *= &x;
            *sum += &xi;
        }
    }

    let mut correction = Float::new(prec);
    let mut tail = Float::new(prec);
    for (i, ci) in coeffs.iter().enumerate().skip(1) {
        if *ci == 0 {
            continue;
        }
        let t = Float::with_val(prec, &s * i as u32);
        let (pz, err) = prime_zeta(&t, prec);
        let rest = pz - &power_sums[i];
        correction += Float::with_val(prec, &rest * ci);
        tail += err * Float::with_val(prec, ci).abs();
    }
    let (c, big_r) = coefficient_envelope(k, rho_squared, product, prec);
    tail += remainder_bound(&c, &big_r, big_p, &s, terms, prec);

    value *= correction.exp();
    Ok(result(value, tail))
}

/// `exp(−k²ϱ²(log 2σ + log log(k²ϱ²) − C))`, the explicit form of the upper
/// bound for `F_{k,ϱ}(σ,…,σ)` with its implied constant exposed as `C`.
pub fn norton_bound(
    k: u32,
    rho_squared: &Rational,
    sigma: f64,
    c: f64,
    precision_bits: u32,
) -> Result<Float> {
    if k < 2 {
        return Err(Error::invalid("the bound is stated for k >= 2"));
    }
    if !(sigma.is_finite() && sigma > 0.0 && sigma <= 1.0 / (k as f64).ln()) {
        return Err(Error::invalid("sigma must lie in (0, 1/log k]"));
    }
    let prec = precision_bits + GUARD_BITS;
    let k2r = Float::with_val(prec, Rational::from(rho_squared * (k * k)));
    if k2r <= 1 {
        return Err(Error::domain("log log(k^2 rho^2) needs k^2 rho^2 > 1"));
    }
    let inner = Float::with_val(prec, Float::with_val(prec, 2.0 * sigma).ln())
        + Float::with_val(prec, k2r.clone().ln()).ln()
        - c;
    Ok(Float::with_val(precision_bits, (-(k2r * inner)).exp()))
}

/// The smallest `C` for which `F_{k,ϱ}(σ,…,σ) <= norton_bound(k, ϱ², σ, C)`.
pub fn norton_required_constant(
    k: u32,
    rho_squared: &Rational,
    sigma: f64,
    opts: &EulerOptions,
) -> Result<f64> {
    norton_bound(k, rho_squared, sigma, 0.0, opts.precision_bits)?;
    let f = diagonal_f(k, rho_squared, sigma, opts)?;
    let k2r = Rational::from(rho_squared * (k * k)).to_f64();
    let log_f = f.value.clone().ln().to_f64() + f.tail_bound.to_f64();
    Ok(log_f / k2r + (2.0 * sigma).ln() + k2r.ln().ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NortonCalibration {
    /// Largest required constant over the grid.
    pub constant: f64,
    /// `(k, σ, required C)` per grid point.
    pub grid: Vec<(u32, f64, f64)>,
}

pub fn calibrate_norton_constant(
    ks: &[u32],
    sigmas: &[f64],
    rho_squared: &Rational,
    opts: &EulerOptions,
) -> Result<NortonCalibration> {
    let mut grid = Vec::new();
    for &k in ks {
        for &sigma in sigmas {
            grid.push((
                k,
                sigma,
                norton_required_constant(k, rho_squared, sigma, opts)?,
            ));
        }
    }
    let constant = grid.iter().map(|g| g.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(NortonCalibration { constant, grid })
}

/// `−k²ϱ² log(2e^γ log(kϱ))`, the main term of `log a(k,ϱ)`.
pub fn log_a_asymptotic(k: f64, rho_squared: f64) -> Result<f64> {
    if !(k > 0.0 && rho_squared > 0.0) {
        return Err(Error::invalid("k and rho^2 must be positive"));
    }
    let log_k_rho = k.ln() + 0.5 * rho_squared.ln();
    if log_k_rho <= 0.0 {
        return Err(Error::domain("the main term needs k rho > 1"));
    }
    let gamma = euler_gamma(64).to_f64();
    Ok(-k * k * rho_squared * (2.0f64.ln() + gamma + log_k_rho.ln()))
}

pub fn a_asymptotic(k: f64, rho_squared: f64) -> Result<f64> {
    log_a_asymptotic(k, rho_squared).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{pseudomoment, MomentOptions};
    use rug::float::Constant;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn opts(p: u64) -> EulerOptions {
        EulerOptions {
            truncation_prime: p,
            ..EulerOptions::default()
        }
    }

    /// `(1 − x)^{k²ϱ²} N_k(ϱ²x) / (1 − ϱ²x)^{2k−1}` at `x = 1/p`.
    fn closed_form_local(p: u64, k: u32, rho_squared: f64) -> f64 {
        let x = 1.0 / p as f64;
        let y = rho_squared * x;
        let binom =
            |n: u64, i: u64| (0..i).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
        let num: f64 = (0..k as u64)
            .map(|i| binom(k as u64 - 1, i).powi(2) * y.powi(i as i32))
            .sum();
        (1.0 - x).powf((k * k) as f64 * rho_squared) * num / (1.0 - y).powi(2 * k as i32 - 1)
    }

    #[test]
    fn local_factor_examples() {
        let o = EulerOptions::default();
        for p in [2u64, 3, 5, 101] {
            let v = local_factor_a(p, 1, &r("1"), &o).unwrap();
            assert!((v.to_f64() - 1.0).abs() < 1e-30);
        }
        let v = local_factor_a(2, 2, &r("1"), &o).unwrap();
        assert!((v - Float::with_val(128, 0.75)).abs() < 1e-35);
        assert_eq!(local_factor_a(2, 1, &r("0"), &o).unwrap(), 1);
    }

    #[test]
    fn local_factor_matches_closed_form() {
        let o = EulerOptions::default();
        for p in [2u64, 3, 7, 1009] {
            for k in 1..=5 {
                for rho in [0.25, 1.0, 1.5] {
                    let got = local_factor_a(p, k, &Rational::from_f64(rho).unwrap(), &o)
                        .unwrap()
                        .to_f64();
                    let want = closed_form_local(p, k, rho);
                    assert!((got / want - 1.0).abs() < 1e-13, "p={p} k={k} rho={rho}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let o = EulerOptions::default();
        assert!(matches!(
            local_factor_a(4, 2, &r("1"), &o),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            local_factor_a(2, 2, &r("15/8"), &o),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            arithmetic_factor(2, &r("1"), &opts(50)),
            Err(Error::InvalidArgument(_))
        ));
        let loose = EulerOptions {
            delta: r("-2"),
            ..EulerOptions::default()
        };
        assert!(matches!(
            local_factor_a(3, 2, &r("3"), &loose),
            Err(Error::Divergence { p: 3, .. })
        ));
    }

    #[test]
    fn trivial_products() {
        let a = arithmetic_factor(1, &r("1"), &opts(1000)).unwrap();
        assert_eq!(a.value, 1);
        assert_eq!(a.tail_bound, 0);
        for k in 1..=4 {
            let a = arithmetic_factor(k, &r("0"), &opts(1000)).unwrap();
            assert_eq!(a.value, 1);
        }
    }

    #[test]
    fn a_of_two_is_six_over_pi_squared() {
        let a = arithmetic_factor(2, &r("1"), &EulerOptions::default()).unwrap();
        assert!(a.tail_bound < 1e-20, "tail {}", a.tail_bound);
        let pi = Float::with_val(160, Constant::Pi);
        let oracle = Float::with_val(160, 6) / pi.square();
        let rel = (Float::with_val(160, &a.value - &oracle) / &oracle).abs();
        assert!(rel < 1e-30, "rel {rel}");
    }

    #[test]
    fn elementary_tail_is_certified_but_loose() {
        let o = EulerOptions {
            tail_mode: TailMode::Elementary,
            truncation_prime: 10_000,
            ..EulerOptions::default()
        };
        let a = arithmetic_factor(2, &r("1"), &o).unwrap();
        let truth = 6.0 / std::f64::consts::PI.powi(2);
        let gap = (a.to_f64().ln() - truth.ln()).abs();
        assert!(gap <= a.tail_bound.to_f64());
        assert!(a.tail_bound.to_f64() < 1e-2);
    }

    #[test]
    fn zeta_two_from_the_diagonal_series() {
        let f = diagonal_f(1, &r("1"), 0.5, &EulerOptions::default()).unwrap();
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((f.to_f64() - z2).abs() < 1e-14);
        assert!(f.tail_bound < 1e-30);
    }

    #[test]
    fn divisor_square_series_identity() {
        // Σ d(n)²/n² = ζ(2)⁴/ζ(4), summed independently of the Euler product.
        let f = diagonal_f(2, &r("1"), 0.5, &EulerOptions::default()).unwrap();
        let prec = 128;
        let z2 = Float::with_val(prec, 2).zeta();
        let z4 = Float::with_val(prec, 4).zeta();
        let identity = Float::with_val(prec, z2.pow(4u32) / z4);
        assert!((f.to_f64() / identity.to_f64() - 1.0).abs() < 1e-14);
        let n = 200_000u64;
        let mut d = vec![0u64; n as usize + 1];
        for a in 1..=n {
            for m in (a..=n).step_by(a as usize) {
                d[m as usize] += 1;
            }
        }
        let partial: f64 = (1..=n)
            .map(|m| (d[m as usize] * d[m as usize]) as f64 / (m * m) as f64)
            .sum();
        // The omitted terms are about (log n)³/(π² n) ≈ 1e-3.
        assert!(partial < f.to_f64() && f.to_f64() - partial < 5e-3);
    }

    #[test]
    fn pole_of_zeta_near_one() {
        let sigma = 1e-3;
        let f = diagonal_f(1, &r("1"), sigma, &EulerOptions::default()).unwrap();
        assert!((f.to_f64() * 2.0 * sigma - 1.0).abs() < 0.01);
        let zeta = Float::with_val(128, 1.002).zeta().to_f64();
        assert!((f.to_f64() / zeta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_factor_decreases_in_k() {
        let o = opts(10_000);
        let values: Vec<f64> = (1..=3)
            .map(|k| arithmetic_factor(k, &r("1/4"), &o).unwrap().to_f64())
            .collect();
        assert!(values[1] > 0.0 && values[1] < 1.0);
        assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
    }

    #[test]
    fn refinement_stays_within_the_tail() {
        for (k, rho) in [(2u32, "1"), (3, "1/2"), (2, "3/2")] {
            let o = EulerOptions {
                tail_mode: TailMode::Elementary,
                ..EulerOptions::default()
            };
            let coarse = arithmetic_factor(
                k,
                &r(rho),
                &EulerOptions {
                    truncation_prime: 1000,
                    ..o.clone()
                },
            )
            .unwrap();
            let fine = arithmetic_factor(
                k,
                &r(rho),
                &EulerOptions {
                    truncation_prime: 20_000,
                    ..o.clone()
                },
            )
            .unwrap();
            assert!(fine.tail_bound < coarse.tail_bound);
            let slack = coarse.to_f64() * (coarse.tail_bound.to_f64().exp() - 1.0);
            assert!((fine.to_f64() - coarse.to_f64()).abs() <= slack);
        }
    }

    #[test]
    fn diagonal_series_monotone_in_sigma_and_rho() {
        let o = opts(10_000);
        let f = |k, rho: &str, sigma| diagonal_f(k, &r(rho), sigma, &o).unwrap().to_f64();
        for k in 1..=3 {
            assert!(f(k, "1", 0.05) > f(k, "1", 0.1));
            assert!(f(k, "1", 0.1) > f(k, "1", 0.3));
            assert!(f(k, "1/2", 0.1) < f(k, "1", 0.1));
            assert!(f(k, "1", 0.1) < f(k, "3/2", 0.1));
        }
    }

    #[test]
    fn norton_bound_shape() {
        let k = 3u32;
        let sigma = 1.0 / 3f64.ln();
        let b = norton_bound(k, &r("1"), sigma, 0.0, 64).unwrap().to_f64();
        let plug = (-9.0 * ((2.0 * sigma).ln() + 9f64.ln().ln())).exp();
        assert!((b / plug - 1.0).abs() < 1e-12);
        let lo = norton_bound(k, &r("1"), 0.1, 0.0, 64).unwrap();
        let hi = norton_bound(k, &r("1"), 0.2, 0.0, 64).unwrap();
        assert!(hi < lo);
        assert!(matches!(
            norton_bound(2, &r("1/4"), 0.1, 0.0, 64),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn calibrated_constant_dominates_the_grid() {
        let o = opts(10_000);
        let rho = r("1");
        let cal = calibrate_norton_constant(&[2, 3, 4, 5], &[1e-2, 1e-1], &rho, &o).unwrap();
        assert!(cal.constant.is_finite());
        for &(k, sigma, _) in &cal.grid {
            let f = diagonal_f(k, &rho, sigma, &o).unwrap().to_f64();
            let b = norton_bound(k, &rho, sigma, cal.constant, 64)
                .unwrap()
                .to_f64();
            assert!(f <= b * (1.0 + 1e-12), "k={k} sigma={sigma}");
        }
    }

    #[test]
    fn asymptotic_main_term() {
        let e = std::f64::consts::E;
        let gamma = 0.577_215_664_901_532_9;
        let main = a_asymptotic(e, 1.0).unwrap();
        assert!((main.ln() + e * e * (2f64.ln() + gamma)).abs() < 1e-12);
        let two = a_asymptotic(2.0, 1.0).unwrap();
        assert!(two > 0.0 && two < 1.0);
        assert!(matches!(a_asymptotic(1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn log_ratio_trends_toward_one() {
        let o = opts(10_000);
        let ratios: Vec<f64> = [3u32, 5, 8]
            .iter()
            .map(|&k| {
                let a = arithmetic_factor(k, &r("1"), &o).unwrap();
                a.value.clone().ln().to_f64() / log_a_asymptotic(k as f64, 1.0).unwrap()
            })
            .collect();
        assert!(
            ratios[0] < ratios[1] && ratios[1] < ratios[2] && ratios[2] < 1.0,
            "{ratios:?}"
        );
    }

    #[test]
    fn json_record_shape() {
        let a = arithmetic_factor(1, &r("1"), &opts(1000)).unwrap();
        let v = a.to_json();
        assert_eq!(v["k"], 1);
        assert_eq!(v["rho_squared"], "1/1");
        assert!(v["sigma"].is_null());
        assert_eq!(v["value"], "1");
        assert_eq!(v["tail_bound"], "0");
        assert_eq!(v["truncation_prime"], 1000);
    }

    #[test]
    fn rankin_inequality_against_moments() {
        let opts = EulerOptions {
            truncation_prime: 10_000,
            ..EulerOptions::default()
        };
        for n in [2u64, 5, 17, 60, 120, 200] {
            for k in 1..=3u32 {
                for rho in ["1/2", "1", "3/2"] {
                    let rho: Rational = rho.parse().unwrap();
                    let m = pseudomoment(n, k, &rho, &MomentOptions::default())
                        .unwrap()
                        .value_float;
                    let mut sigmas = vec![k as f64 * rho.to_f64() / (n as f64).ln()];
                    if k >= 2 {
                        sigmas.push(1.0 / (k as f64).ln());
                    }
                    for sigma in sigmas {
                        let f = diagonal_f(k, &rho, sigma, &opts).unwrap();
                        let log_bound = Float::with_val(256, n).ln() * (2.0 * k as f64 * sigma)
                            + Float::with_val(256, &f.value).ln()
                            + &f.tail_bound;
                        // Relative slack covers rounding in the floating moment.
                        let bound = (log_bound + Float::with_val(256, Float::i_exp(1, -100))).exp();
                        assert!(m <= bound, "N={n} k={k} rho2={rho} sigma={sigma}");
                    }
                }
            }
        }
    }
}
