//! The twisted polytope
//!
//! ```text
//! 𝓟_{k,ϱ} = { x ∈ [0,∞)^{k×k} : Σ_i x_ij^{1/ϱ²} <= 1, Σ_j x_ij^{1/ϱ²} <= 1 },
//! ```
//!
//! its volume, and the geometric factor
//! `γ(k,ϱ) = Γ(1+ϱ²)^{-k²} ∫_𝓟 ∏_i (1 − Σ_j x_ij^{1/ϱ²}) ∏_j (1 − Σ_i x_ij^{1/ϱ²}) dx`,
//! by Monte Carlo over the unit cube, with the closed form at `k = 1` and
//! explicit bounds for general `k`.

use rand::Rng;
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{f64_string, rational_string};
use crate::sampling;

/// Smallest accepted Monte Carlo sample count.
pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    GammaFactor,
    Volume,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolytopeEstimate {
    pub k: u32,
    #[serde(serialize_with = "ser_rational")]
    pub rho_squared: Rational,
    pub kind: EstimateKind,
    #[serde(serialize_with = "ser_f64")]
    pub mean: f64,
    #[serde(serialize_with = "ser_f64")]
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    /// Closed-form value when one is known.
    #[serde(serialize_with = "ser_opt_f64")]
    pub exact: Option<f64>,
}

fn ser_f64<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f64_string(*x))
}

fn ser_opt_f64<S: serde::Serializer>(
    x: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_str(&f64_string(*x)),
        None => s.serialize_none(),
    }
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

impl PolytopeEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("estimate serializes")
    }

    /// `(mean − z·se, mean + z·se)`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (
            self.mean - z * self.std_error,
            self.mean + z * self.std_error,
        )
    }
}

/// Sweep table with a header row.
pub fn estimates_csv(rows: &[PolytopeEstimate]) -> String {
    let mut out = String::from("k,rho_squared,kind,mean,std_error,samples,seed\n");
    for e in rows {
        let kind = match e.kind {
            EstimateKind::GammaFactor => "gamma_factor",
            EstimateKind::Volume => "volume",
        };
        out.push_str(&format!(
            "{},{},{},{:?},{:?},{},{}\n",
            e.k,
            rational_string(&e.rho_squared),
            kind,
            e.mean,
            e.std_error,
            e.samples,
            e.seed
        ));
    }
    out
}

/// `x ↦ x^{1/ϱ²}`, avoiding `powf` where the exponent is an integer.
#[derive(Debug, Clone, Copy)]
enum Power {
    Identity,
    Int(i32),
    Real(f64),
}

impl Power {
    fn new(rho_squared: &Rational) -> Self {
        let inv = Rational::from(rho_squared.recip_ref());
        if inv == 1 {
            Power::Identity
        } else if inv.denom() == &1 && *inv.numer() <= 64 {
            Power::Int(inv.numer().to_i32().expect("small exponent"))
        } else {
            Power::Real(inv.to_f64())
        }
    }

    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Power::Identity => x,
            Power::Int(e) => x.powi(e),
            Power::Real(e) => x.powf(e),
        }
    }
}

fn check_k_rho(k: u32, rho_squared: &Rational) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if *rho_squared <= 0 {
        return Err(Error::invalid("rho^2 must be positive"));
    }
    Ok(())
}

/// Row and column slacks `1 − Σ x^{1/ϱ²}` of a row-major `k×k` point, or
/// `None` if a constraint is violated.
fn slacks(x: &[f64], k: usize, power: Power, rows: &mut [f64], cols: &mut [f64]) -> bool {
    rows.fill(0.0);
    cols.fill(0.0);
    for i in 0..k {
        for j in 0..k {
            let v = power.apply(x[i * k + j]);
            rows[i] += v;
            cols[j] += v;
        }
        if rows[i] > 1.0 {
            return false;
        }
    }
    cols.iter().all(|&c| c <= 1.0)
}

/// Whether a row-major `k×k` point lies in `𝓟_{k,ϱ}`.
pub fn membership(x: &[f64], k: u32, rho_squared: &Rational) -> Result<bool> {
    check_k_rho(k, rho_squared)?;
    let ku = k as usize;
    if x.len() != ku * ku {
        return Err(Error::DimensionMismatch {
            expected: ku * ku,
            got: x.len(),
        });
    }
    if x.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::invalid("coordinates must be nonnegative"));
    }
    let (mut rows, mut cols) = (vec![0.0; ku], vec![0.0; ku]);
    Ok(slacks(x, ku, Power::new(rho_squared), &mut rows, &mut cols))
}

/// `∏_i (1 − Σ_j x_ij^{1/ϱ²}) ∏_j (1 − Σ_i x_ij^{1/ϱ²})` on the polytope, 0 outside.
pub fn integrand(x: &[f64], k: u32, rho_squared: &Rational) -> Result<f64> {
    if !membership(x, k, rho_squared)? {
        return Ok(0.0);
    }
    let ku = k as usize;
    let (mut rows, mut cols) = (vec![0.0; ku], vec![0.0; ku]);
    slacks(x, ku, Power::new(rho_squared), &mut rows, &mut cols);
    Ok(rows.iter().chain(&cols).map(|s| 1.0 - s).product())
}

#[derive(Debug, Clone, Copy)]
struct Draw {
    k: usize,
    power: Power,
    weighted: bool,
}

impl Draw {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let k = self.k;
        let mut x = [0.0f64; 64];
        let mut rows = [0.0f64; 8];
        let mut cols = [0.0f64; 8];
        for v in x.iter_mut().take(k * k) {
            *v = rng.gen::<f64>();
        }
        if !slacks(&x[..k * k], k, self.power, &mut rows[..k], &mut cols[..k]) {
            return 0.0;
        }
        if !self.weighted {
            return 1.0;
        }
        rows[..k]
            .iter()
            .chain(&cols[..k])
            .map(|s| 1.0 - s)
            .product()
    }
}

/// Largest `k` handled by the samplers (fixed-size scratch buffers).
pub const MAX_K: u32 = 8;

fn mc(
    k: u32,
    rho_squared: &Rational,
    samples: u64,
    seed: u64,
    workers: Option<usize>,
    weighted: bool,
) -> Result<sampling::Summary> {
    check_k_rho(k, rho_squared)?;
    if k > MAX_K {
        return Err(Error::invalid(format!(
            "k <= {MAX_K} is supported by the sampler"
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "at least {MIN_SAMPLES} samples are required"
        )));
    }
    let draw = Draw {
        k: k as usize,
        power: Power::new(rho_squared),
        weighted,
    };
    Ok(sampling::run(samples, seed, workers, |rng| {
        draw.sample(rng)
    }))
}

/// `Γ(1+ϱ²)^{-k²}` in double precision.
fn gamma_normalizer(k: u32, rho_squared: &Rational) -> f64 {
    let lg = Float::with_val(64, Rational::from(1 + rho_squared))
        .ln_gamma()
        .to_f64();
    (-((k * k) as f64) * lg).exp()
}

/// Monte Carlo estimate of `γ(k,ϱ)`.
pub fn gamma_factor_mc(
    k: u32,
    rho_squared: &Rational,
    samples: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<PolytopeEstimate> {
    let s = mc(k, rho_squared, samples, seed, workers, true)?;
    let norm = gamma_normalizer(k, rho_squared);
    Ok(PolytopeEstimate {
        k,
        rho_squared: rho_squared.clone(),
        kind: EstimateKind::GammaFactor,
        mean: s.mean * norm,
        std_error: s.std_error * norm,
        samples: s.samples,
        seed,
        exact: if k == 1 {
            gamma_factor_exact_k1(rho_squared).ok()
        } else {
            None
        },
    })
}

/// `γ(1,ϱ) = Γ(1+ϱ²)^{-1} ∫_0^1 (1 − x^{1/ϱ²})² dx = 2 / Γ(ϱ² + 3)`.
pub fn gamma_factor_exact_k1(rho_squared: &Rational) -> Result<f64> {
    if *rho_squared <= 0 {
        return Err(Error::invalid("rho^2 must be positive"));
    }
    let g = Float::with_val(64, Rational::from(3 + rho_squared)).gamma();
    Ok(Float::with_val(64, 2 / g).to_f64())
}

/// Monte Carlo estimate of `Vol(𝓟_{k,ϱ})` as a hit rate in the unit cube.
pub fn volume_mc(
    k: u32,
    rho_squared: &Rational,
    samples: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<PolytopeEstimate> {
    let s = mc(k, rho_squared, samples, seed, workers, false)?;
    Ok(PolytopeEstimate {
        k,
        rho_squared: rho_squared.clone(),
        kind: EstimateKind::Volume,
        mean: s.mean,
        std_error: s.std_error,
        samples: s.samples,
        seed,
        exact: (k == 1).then_some(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
    pub log_lower: f64,
    pub log_upper: f64,
}

/// `Γ(1+ϱ²)^{-k²} 2^{-2k-k²ϱ²} k^{-k²ϱ²} <= γ(k,ϱ) <= Γ(1+kϱ²)^{-k}`.
pub fn volume_sandwich(k: u32, rho_squared: &Rational) -> Result<Sandwich> {
    check_k_rho(k, rho_squared)?;
    let prec = 64;
    let r = Float::with_val(prec, rho_squared);
    let kf = Float::with_val(prec, k);
    let k2 = Float::with_val(prec, k * k);
    let ln2 = Float::with_val(prec, 2).ln();
    let lg1 = Float::with_val(prec, 1 + &r).ln_gamma();
    let k2r = Float::with_val(prec, &k2 * &r);
    let log_lower = -(Float::with_val(prec, &k2 * &lg1))
        - Float::with_val(prec, (2 * k) as f64 + &k2r) * &ln2
        - Float::with_val(prec, &k2r * kf.clone().ln());
    let log_upper =
        -(kf.clone() * Float::with_val(prec, 1 + Float::with_val(prec, &kf * &r)).ln_gamma());
    let (ll, lu) = (log_lower.to_f64(), log_upper.to_f64());
    Ok(Sandwich {
        lower: ll.exp(),
        upper: lu.exp(),
        log_lower: ll,
        log_upper: lu,
    })
}
