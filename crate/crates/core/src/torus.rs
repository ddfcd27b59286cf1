//! Dirichlet polynomials as functions on the polytorus `𝕋^d`.
//!
//! Under the Bohr lift `n^{-s} ↦ z(n) = ∏ z_j^{κ_j(n)}`, with `z_j` attached to
//! the j-th prime, a polynomial `Σ_{n<=N} a_n n^{-s}` becomes a polynomial in
//! `d = π(N)` variables with the same `L^q` norms.

use std::f64::consts::PI;

use rand::Rng;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::arith::{
    dickman_rho, prime_pi, primes_up_to, psi_product_estimate, psi_smooth_count_capped, smooth_set,
    PrimeTable,
};
use crate::error::{Error, Result};
use crate::moments::{pseudomoment, sup_norm_nonneg, DirichletPolynomial, MomentOptions};
use crate::numeric::{
    compensated_sum, decimal_string, f64_string, rational_string, DEFAULT_PRECISION_BITS,
};
use crate::sampling;

/// Largest Ψ(x, y) enumerated before falling back to the product estimate.
pub const PSI_ENUMERATION_CAP: u64 = 100_000_000;

#[derive(Debug, Clone)]
pub struct Monomial {
    pub n: u64,
    /// `κ(n)` over the first `d` primes.
    pub exponents: Vec<u32>,
    pub coefficient: Float,
}

#[derive(Debug, Clone)]
pub struct BohrLift {
    source: DirichletPolynomial,
    primes: Vec<u64>,
    monomials: Vec<Monomial>,
    /// `(a_n as f64, κ(n))`, for the sampling loops.
    fast: Vec<(f64, Vec<(usize, u32)>)>,
}

/// A complex value as a pair of multiple-precision reals.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexValue {
    pub re: Float,
    pub im: Float,
}

impl ComplexValue {
    pub fn abs(&self) -> Float {
        Float::with_val(self.re.prec(), self.re.hypot_ref(&self.im))
    }
}

/// Lift `f` to the polytorus in `π(N)` variables.
pub fn bohr_lift(f: &DirichletPolynomial) -> Result<BohrLift> {
    let primes = primes_up_to(f.length());
    let table = PrimeTable::global();
    let mut monomials = Vec::new();
    let mut fast = Vec::new();
    for n in f.support() {
        let fac = table.factorize(n)?;
        let mut exponents = vec![0u32; primes.len()];
        let mut sparse = Vec::new();
        for &(p, e) in fac.factors() {
            let j = primes.binary_search(&p).expect("prime factor of n <= N");
            exponents[j] = e;
            sparse.push((j, e));
        }
        let coefficient = f.coefficient(n, DEFAULT_PRECISION_BITS);
        fast.push((coefficient.to_f64(), sparse));
        monomials.push(Monomial {
            n,
            exponents,
            coefficient,
        });
    }
    Ok(BohrLift {
        source: f.clone(),
        primes,
        monomials,
        fast,
    })
}

impl BohrLift {
    pub fn dimension(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn source(&self) -> &DirichletPolynomial {
        &self.source
    }

    /// Total degree, `max Ω(n)` over the support.
    pub fn degree(&self) -> u32 {
        self.monomials
            .iter()
            .map(|m| m.exponents.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// `Σ |a_n|`, an upper bound for the sup norm and equal to it for
    /// nonnegative coefficients.
    pub fn coefficient_l1(&self, precision_bits: u32) -> Float {
        let mut s = Float::new(precision_bits);
        for m in &self.monomials {
            s += Float::with_val(precision_bits, m.coefficient.abs_ref());
        }
        s
    }

    fn check_dimension(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// `F(e^{iθ}) = Σ a_n exp(i⟨κ(n), θ⟩)`.
    pub fn evaluate(&self, theta: &[f64], precision_bits: u32) -> Result<ComplexValue> {
        self.check_dimension(theta)?;
        let prec = precision_bits + 16;
        let angles: Vec<Float> = theta.iter().map(|t| Float::with_val(prec, *t)).collect();
        let mut re = Float::new(prec);
        let mut im = Float::new(prec);
        for m in &self.monomials {
            let mut phase = Float::new(prec);
            for (a, &e) in angles.iter().zip(&m.exponents) {
                if e != 0 {
                    phase += Float::with_val(prec, a * e);
                }
            }
            let (s, c) = phase.sin_cos(Float::new(prec));
            re += Float::with_val(prec, &c * &m.coefficient);
            im += Float::with_val(prec, &s * &m.coefficient);
        }
        Ok(ComplexValue {
            re: Float::with_val(precision_bits, re),
            im: Float::with_val(precision_bits, im),
        })
    }

    /// `|F(e^{iθ})|` in double precision.
    pub fn modulus_f64(&self, theta: &[f64]) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (a, kappa) in &self.fast {
            let phase: f64 = kappa.iter().map(|&(j, e)| theta[j] * e as f64).sum();
            let (s, c) = phase.sin_cos();
            re += a * c;
            im += a * s;
        }
        re.hypot(im)
    }

    /// `F_y`: the terms supported on `y`-smooth `n`, in the same variables.
    pub fn smooth_projection(&self, y: u64) -> Result<BohrLift> {
        if y < 2 {
            return Err(Error::invalid("smoothness bound must be at least 2"));
        }
        let keep: Vec<bool> = self.primes.iter().map(|&p| p <= y).collect();
        let smooth = |exps: &[u32]| exps.iter().zip(&keep).all(|(&e, &k)| e == 0 || k);
        let mask: Vec<bool> = self
            .monomials
            .iter()
            .map(|m| smooth(&m.exponents))
            .collect();
        let kept: std::collections::HashSet<u64> = self
            .monomials
            .iter()
            .zip(&mask)
            .filter(|(_, k)| **k)
            .map(|(m, _)| m.n)
            .collect();
        let mut out = self.clone();
        out.source = self.source.restrict(|n| kept.contains(&n));
        out.monomials = self
            .monomials
            .iter()
            .zip(&mask)
            .filter(|(_, k)| **k)
            .map(|(m, _)| m.clone())
            .collect();
        out.fast = self
            .fast
            .iter()
            .zip(&mask)
            .filter(|(_, k)| **k)
            .map(|(m, _)| m.clone())
            .collect();
        Ok(out)
    }
}

fn ser_f64<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f64_string(*x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: u64,
    pub d: usize,
    #[serde(serialize_with = "ser_f64")]
    pub lambda: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sup_norm: f64,
    #[serde(serialize_with = "ser_f64")]
    pub empirical_measure: f64,
    #[serde(serialize_with = "ser_f64")]
    pub std_error: f64,
    #[serde(serialize_with = "ser_f64")]
    pub bound: f64,
    pub samples: u64,
    pub seed: u64,
    /// `bound <= empirical_measure + 4·std_error`.
    pub bound_respected: bool,
}

/// `((1 − λ)/π²)^{π(N)} e^{−√N}`.
pub fn concentration_bound(n: u64, lambda: f64) -> f64 {
    let d = prime_pi(n) as f64;
    (d * ((1.0 - lambda) / (PI * PI)).ln() - (n as f64).sqrt()).exp()
}

/// Fraction of the polytorus where `|F| >= λ‖F‖_∞`, by uniform sampling.
pub fn empirical_concentration(
    lift: &BohrLift,
    lambda: f64,
    samples: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<ConcentrationReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda must lie in (0, 1)"));
    }
    if !lift.source.is_nonnegative() {
        return Err(Error::domain(
            "the sup norm is only known for nonnegative coefficients",
        ));
    }
    if lift.monomials.is_empty() {
        return Err(Error::invalid(
            "the zero polynomial has no concentration set",
        ));
    }
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let sup = sup_norm_nonneg(&lift.source, 64)?.to_f64();
    let threshold = lambda * sup;
    let d = lift.dimension();
    let s = sampling::run(samples, seed, workers, |rng| {
        let mut theta = [0.0f64; 64];
        for t in theta.iter_mut().take(d) {
            *t = 2.0 * PI * rng.gen::<f64>();
        }
        if lift.modulus_f64(&theta[..d]) >= threshold {
            1.0
        } else {
            0.0
        }
    });
    let n = lift.source.length();
    let bound = concentration_bound(n, lambda);
    Ok(ConcentrationReport {
        n,
        d,
        lambda,
        sup_norm: sup,
        empirical_measure: s.mean,
        std_error: s.std_error,
        bound,
        samples: s.samples,
        seed,
        bound_respected: bound <= s.mean + 4.0 * s.std_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinCheck {
    /// `(π/2)·deg·Σ|a_n|·max_j dist(θ_j, ϑ_j)`.
    pub bound: Float,
    pub difference: Float,
}

fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Compare `|F(θ) − F(ϑ)|` with the Bernstein-type Lipschitz bound.
pub fn bernstein_modulus_bound(
    lift: &BohrLift,
    theta: &[f64],
    vartheta: &[f64],
    precision_bits: u32,
) -> Result<BernsteinCheck> {
    lift.check_dimension(theta)?;
    lift.check_dimension(vartheta)?;
    let a = lift.evaluate(theta, precision_bits)?;
    let b = lift.evaluate(vartheta, precision_bits)?;
    let diff = ComplexValue {
        re: Float::with_val(precision_bits, &a.re - &b.re),
        im: Float::with_val(precision_bits, &a.im - &b.im),
    }
    .abs();
    let dist = theta
        .iter()
        .zip(vartheta)
        .map(|(x, y)| wrap_distance(*x, *y))
        .fold(0.0, f64::max);
    let pi = Float::with_val(precision_bits, Constant::Pi);
    let bound = pi / 2u32
        * lift.degree()
        * lift.coefficient_l1(precision_bits)
        * Float::with_val(precision_bits, dist);
    Ok(BernsteinCheck {
        bound,
        difference: diff,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KhintchineResult {
    pub k: u32,
    /// `‖Σ a_p z_p‖_{2k}^{2k}`.
    pub exact_power: Rational,
    /// `Γ(1+k)·(Σ a_p²)^k`, the bound raised to the `2k`-th power.
    pub bound_power: Rational,
    pub exact_norm: Float,
    pub bound: Float,
}

impl KhintchineResult {
    pub fn holds(&self) -> bool {
        self.exact_power <= self.bound_power
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k,
            "exact_power": rational_string(&self.exact_power),
            "bound_power": rational_string(&self.bound_power),
            "exact_norm": decimal_string(&self.exact_norm),
            "bound": decimal_string(&self.bound),
            "holds": self.holds(),
        })
    }
}

/// `‖Σ_{p<=N} a_p z_p‖_{2k}` exactly, against `Γ(1+k)^{1/(2k)} (Σ a_p²)^{1/2}`.
pub fn khintchine_bound(
    n: u64,
    k: u32,
    coefficients: &[(u64, Rational)],
    precision_bits: u32,
) -> Result<KhintchineResult> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let primes = primes_up_to(n);
    for (p, _) in coefficients {
        if primes.binary_search(p).is_err() {
            return Err(Error::invalid(format!("{p} is not a prime <= {n}")));
        }
    }
    let ku = k as usize;
    let fact: Vec<Integer> = (0..=k)
        .map(|m| Integer::from(Integer::factorial(m)))
        .collect();
    // (k!)² [t^k] ∏_p Σ_m a_p^{2m} t^m / (m!)²
    let mut poly = vec![Rational::new(); ku + 1];
    poly[0] = Rational::from(1);
    let mut sum_sq = Rational::new();
    for (_, a) in coefficients {
        let a2 = Rational::from(a.square_ref());
        sum_sq += &a2;
        let factor: Vec<Rational> = (0..=k)
            .map(|m| {
                Rational::from((&a2).pow(m as i32)) / Integer::from(fact[m as usize].square_ref())
            })
            .collect();
        let mut next = vec![Rational::new(); ku + 1];
        for (i, pi) in poly.iter().enumerate() {
            if *pi == 0 {
                continue;
            }
            for (m, fm) in factor.iter().enumerate().take(ku + 1 - i) {
                next[i + m] += Rational::from(pi * fm);
            }
        }
        poly = next;
    }
    let exact_power = Rational::from(&poly[ku] * Integer::from(fact[ku].square_ref()));
    let bound_power = sum_sq.pow(k as i32) * &fact[ku];
    let root = |r: &Rational| {
        Float::with_val(precision_bits, r).pow(Float::with_val(precision_bits, 1) / (2 * k))
    };
    Ok(KhintchineResult {
        k,
        exact_norm: root(&exact_power),
        bound: root(&bound_power),
        exact_power,
        bound_power,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormComparison {
    pub n: u64,
    pub k: u32,
    /// `‖f_N‖_∞ = Σ_{n<=N} n^{-1/2}`.
    pub sup_norm: Float,
    /// `‖f_N‖_{2k} = 𝓜_k(N)^{1/(2k)}`.
    pub l2k_norm: Float,
    /// Ψ(N^k, N), enumerated or bounded.
    pub psi: f64,
    pub psi_is_estimate: bool,
    /// `Ψ(N^k, N)^{1/(2k)}`.
    pub factor: Float,
}

impl NormComparison {
    /// `‖f‖_∞ <= Ψ^{1/(2k)} ‖f‖_{2k}`.
    pub fn holds(&self) -> bool {
        self.sup_norm <= Float::with_val(self.sup_norm.prec(), &self.factor * &self.l2k_norm)
    }

    /// `Ψ^{1/(2k)} ‖f‖_{2k} / ‖f‖_∞`.
    pub fn slack(&self) -> f64 {
        (Float::with_val(self.sup_norm.prec(), &self.factor * &self.l2k_norm) / &self.sup_norm)
            .to_f64()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "k": self.k,
            "sup_norm": decimal_string(&self.sup_norm),
            "l2k_norm": decimal_string(&self.l2k_norm),
            "psi": f64_string(self.psi),
            "psi_is_estimate": self.psi_is_estimate,
            "factor": decimal_string(&self.factor),
            "holds": self.holds(),
            "slack": f64_string(self.slack()),
        })
    }
}

/// The sup norm of `f_N` against `Ψ(N^k, N)^{1/(2k)}·‖f_N‖_{2k}`.
pub fn normcomp_threshold(n: u64, k: u32, opts: &MomentOptions) -> Result<NormComparison> {
    if n < 2 || k == 0 {
        return Err(Error::invalid("need N >= 2 and k >= 1"));
    }
    let prec = opts.precision_bits;
    let f = DirichletPolynomial::zeta_partial_sum(n);
    let sup = sup_norm_nonneg(&f, prec)?;
    let moment = pseudomoment(n, k, &Rational::from(1), opts)?;
    let inv = Float::with_val(prec, 1) / (2 * k);
    let l2k = Float::with_val(prec, moment.value_float.pow(&inv));
    let x = (n as u128)
        .checked_pow(k)
        .filter(|x| *x <= u64::MAX as u128);
    let counted = x.and_then(|x| psi_smooth_count_capped(x as u64, n, PSI_ENUMERATION_CAP));
    let (psi, psi_is_estimate) = match counted {
        Some(c) => (c as f64, false),
        None => (psi_product_estimate((n as f64).powi(k as i32), n), true),
    };
    let factor = Float::with_val(prec, psi).pow(&inv);
    Ok(NormComparison {
        n,
        k,
        sup_norm: sup,
        l2k_norm: l2k,
        psi,
        psi_is_estimate,
        factor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothSumReport {
    pub n: u64,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
    /// `⌈N^ε⌉`.
    pub y: u64,
    pub members: usize,
    #[serde(serialize_with = "ser_f64")]
    pub sum: f64,
    /// `2ρ(1/ε)√N`.
    #[serde(serialize_with = "ser_f64")]
    pub dickman_prediction: f64,
    #[serde(serialize_with = "ser_f64")]
    pub ratio: f64,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

/// Smallest `y` with `y^q >= N^p`, for `ε = p/q`.
fn ceil_power(n: u64, epsilon: &Rational) -> Result<u64> {
    let p = epsilon
        .numer()
        .to_u32()
        .ok_or_else(|| Error::invalid("epsilon numerator too large"))?;
    let q = epsilon
        .denom()
        .to_u32()
        .ok_or_else(|| Error::invalid("epsilon denominator too large"))?;
    let target = Integer::from(n).pow(p);
    let mut y = Integer::from(target.root_ref(q));
    if Integer::from((&y).pow(q)) < target {
        y += 1;
    }
    y.to_u64()
        .ok_or_else(|| Error::invalid("N^epsilon too large"))
}

/// `Σ_{n ∈ S(N, ⌈N^ε⌉)} n^{-1/2}` against the prediction `2ρ(1/ε)√N`.
pub fn smooth_sum_lower(n: u64, epsilon: &Rational) -> Result<SmoothSumReport> {
    if !(*epsilon > 0 && *epsilon <= 1) {
        return Err(Error::invalid("epsilon must lie in (0, 1]"));
    }
    let y = ceil_power(n, epsilon)?;
    if y < 2 {
        return Err(Error::invalid("N^epsilon must be at least 2"));
    }
    let set = smooth_set(n, y);
    let sum = compensated_sum(set.members.iter().map(|&m| 1.0 / (m as f64).sqrt()));
    let u = Rational::from(epsilon.recip_ref()).to_f64();
    let prediction = 2.0 * dickman_rho(u) * (n as f64).sqrt();
    Ok(SmoothSumReport {
        n,
        epsilon: epsilon.clone(),
        y,
        members: set.len(),
        sum,
        dickman_prediction: prediction,
        ratio: sum / prediction,
    })
}
