//! Two-sided bounds for `𝓜_k(N)` at real `k`.
//!
//! Lower: hypercontractivity gives `𝓜_k(N) >= 𝓜_{⌈k⌉,α}(N)^{α²}` with
//! `α² = k/⌈k⌉`. Upper: `𝓜_k(N) <= 𝓜_{⌊k⌋,β}(N)^{β²}` with `β² = k/⌊k⌋`,
//! and the inner moment is bounded by Rankin's trick,
//! `𝓜_{m,β}(N) <= N^{2mσ} F_{m,β}(σ,…,σ)`.

use rayon::prelude::*;
use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::euler::{diagonal_f, EulerOptions};
use crate::moments::{pseudomoment, smoothed_pseudomoment, MomentOptions, MomentResult};
use crate::numeric::{decimal_string, f64_string, rational_string, DEFAULT_PRECISION_BITS};

pub const SIGMA_GRID_POINTS: usize = 32;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundOptions {
    pub moments: MomentOptions,
    pub euler: EulerOptions,
    /// Use the smoothed moment in the lower chain.
    pub smoothed_lower: bool,
}

impl BoundOptions {
    fn precision_bits(&self) -> u32 {
        self.moments.precision_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaChoice {
    /// `σ = k/log N`.
    Default,
    Fixed(f64),
    /// Minimum over this many log-spaced points in `[σ_0/8, 8σ_0]`.
    Grid(usize),
}

fn ceil_floor(k: &Rational) -> (u32, u32) {
    let floor = Integer::from(k.numer() / k.denom());
    let f = floor.to_u32().expect("k fits in u32");
    let c = if k.denom() == &1 { f } else { f + 1 };
    (c, f)
}

fn check_k(k: &Rational, min: u32) -> Result<()> {
    if *k < min {
        return Err(Error::invalid(format!("k must be at least {min}")));
    }
    if *k > 1000 {
        return Err(Error::invalid("k is unreasonably large"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LowerChain {
    pub ceil_k: u32,
    /// `k/⌈k⌉`.
    pub rho_squared: Rational,
    pub smoothed: bool,
    pub inner: MomentResult,
    /// `inner^{k/⌈k⌉}`.
    pub value: Float,
}

impl LowerChain {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ceil_k": self.ceil_k,
            "rho_squared": rational_string(&self.rho_squared),
            "smoothed": self.smoothed,
            "inner_moment": decimal_string(&self.inner.value_float),
            "inner_moment_exact": self.inner.value_exact.as_ref().map(rational_string),
        })
    }
}

/// `𝓜_{⌈k⌉, ϱ}(N)^{ϱ²}` with `ϱ² = k/⌈k⌉`, or the smoothed variant.
pub fn weissler_lower(n: u64, k: &Rational, opts: &BoundOptions) -> Result<LowerChain> {
    check_k(k, 1)?;
    let (ceil_k, _) = ceil_floor(k);
    let rho_squared = Rational::from(k / ceil_k);
    let inner = if opts.smoothed_lower {
        smoothed_pseudomoment(n, ceil_k, &rho_squared, &opts.moments)?
    } else {
        pseudomoment(n, ceil_k, &rho_squared, &opts.moments)?
    };
    let prec = opts.precision_bits();
    // Rounded downward so the chain stays a certified lower bound.
    let shrink = Float::with_val(prec + 32, 1)
        - Float::with_val(prec + 32, Float::i_exp(1, 8 - prec as i32));
    let value = match (&inner.value_exact, rho_squared == 1) {
        (Some(e), true) => Float::with_val_round(prec, e, Round::Down).0,
        (exact, _) => {
            let base = match exact {
                Some(e) => Float::with_val(prec + 32, e),
                None => Float::with_val(prec + 32, &inner.value_float),
            };
            let v = base.pow(Float::with_val(prec + 32, &rho_squared)) * shrink;
            Float::with_val_round(prec, v, Round::Down).0
        }
    };
    Ok(LowerChain {
        ceil_k,
        rho_squared,
        smoothed: opts.smoothed_lower,
        inner,
        value,
    })
}

#[derive(Debug, Clone)]
pub struct UpperChain {
    pub floor_k: u32,
    /// `k/⌊k⌋`.
    pub rho_squared: Rational,
    pub sigma: f64,
    pub diagonal_f: Float,
    pub tail_bound: Float,
    pub value: Float,
    pub warnings: Vec<String>,
}

impl UpperChain {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "floor_k": self.floor_k,
            "rho_squared": rational_string(&self.rho_squared),
            "sigma": f64_string(self.sigma),
            "diagonal_f": decimal_string(&self.diagonal_f),
            "tail_bound": decimal_string(&self.tail_bound),
            "warnings": self.warnings,
        })
    }
}

/// `σ_0/8 · 64^{i/(points−1)}` for `i < points`.
pub fn sigma_grid(sigma0: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![sigma0];
    }
    (0..points)
        .map(|i| sigma0 / 8.0 * 64f64.powf(i as f64 / (points - 1) as f64))
        .collect()
}

fn rankin_at(n: u64, k: &Rational, sigma: f64, opts: &BoundOptions) -> Result<UpperChain> {
    let (_, floor_k) = ceil_floor(k);
    let rho_squared = Rational::from(k / floor_k);
    let prec = opts.precision_bits() + 32;
    let f = diagonal_f(floor_k, &rho_squared, sigma, &opts.euler)?;
    let mut warnings = Vec::new();
    let regime = 1.0 / (floor_k as f64).ln();
    if sigma > regime {
        warnings.push(format!("sigma = {sigma} exceeds 1/log(floor k) = {regime}"));
    }
    // log bound = β²(2⌊k⌋σ log N + log F + tail), with the rounding of F absorbed.
    let slack = Float::with_val(prec, Float::i_exp(1, 8 - opts.precision_bits() as i32));
    let log_inner = Float::with_val(prec, n).ln() * Float::with_val(prec, 2.0 * sigma) * floor_k
        + Float::with_val(prec, &f.value).ln()
        + Float::with_val(prec, &f.tail_bound)
        + slack;
    let value = (log_inner * Float::with_val(prec, &rho_squared)).exp();
    Ok(UpperChain {
        floor_k,
        rho_squared,
        sigma,
        diagonal_f: f.value,
        tail_bound: f.tail_bound,
        value: Float::with_val(opts.precision_bits(), value),
        warnings,
    })
}

/// `(N^{2⌊k⌋σ} F_{⌊k⌋,β}(σ,…,σ))^{β²}`, an upper bound for `𝓜_k(N)`.
pub fn rankin_upper(
    n: u64,
    k: &Rational,
    sigma: SigmaChoice,
    opts: &BoundOptions,
) -> Result<UpperChain> {
    check_k(k, 2)?;
    if n < 2 {
        return Err(Error::invalid("N must be at least 2"));
    }
    let sigma0 = k.to_f64() / (n as f64).ln();
    match sigma {
        SigmaChoice::Default => rankin_at(n, k, sigma0, opts),
        SigmaChoice::Fixed(s) => {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid("sigma must be positive"));
            }
            rankin_at(n, k, s, opts)
        }
        SigmaChoice::Grid(points) => {
            let grid = sigma_grid(sigma0, points.max(1));
            let chains: Vec<Result<UpperChain>> =
                grid.par_iter().map(|&s| rankin_at(n, k, s, opts)).collect();
            let mut best: Option<UpperChain> = None;
            for c in chains {
                let c = c?;
                if best.as_ref().is_none_or(|b| c.value < b.value) {
                    best = Some(c);
                }
            }
            Ok(best.expect("nonempty grid"))
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundCertificate {
    pub n: u64,
    pub k: Rational,
    pub lower: Float,
    pub upper: Option<Float>,
    pub lower_chain: LowerChain,
    pub upper_chain: Option<UpperChain>,
    /// `exp(−k² log k − k² log log k)`; absent for `k <= 1`.
    pub main_term: Option<Float>,
    pub lower_normalized: Float,
    pub upper_normalized: Option<Float>,
    pub precision_bits: u32,
}

impl BoundCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "k": rational_string(&self.k),
            "lower": decimal_string(&self.lower),
            "upper": self.upper.as_ref().map(decimal_string),
            "lower_chain": self.lower_chain.to_json(),
            "upper_chain": self.upper_chain.as_ref().map(UpperChain::to_json),
            "main_term": self.main_term.as_ref().map(decimal_string),
            "lower_normalized": decimal_string(&self.lower_normalized),
            "upper_normalized": self.upper_normalized.as_ref().map(decimal_string),
            "precision_bits": self.precision_bits,
        })
    }

    /// `lower <= upper` (vacuous without an upper side).
    pub fn is_consistent(&self) -> bool {
        self.upper.as_ref().is_none_or(|u| self.lower <= *u)
    }
}

/// `exp(−k² log k − k² log log k)`.
pub fn main_term(k: &Rational, precision_bits: u32) -> Option<Float> {
    if *k <= 1 {
        return None;
    }
    let kf = Float::with_val(precision_bits, k);
    let lk = kf.clone().ln();
    let llk = lk.clone().ln();
    let k2 = kf.square();
    Some((-(k2 * (lk + llk))).exp())
}

/// Lower and (for `k >= 2`) upper bound for `𝓜_k(N)`.
pub fn sandwich(
    n: u64,
    k: &Rational,
    sigma: SigmaChoice,
    opts: &BoundOptions,
) -> Result<BoundCertificate> {
    check_k(k, 1)?;
    if n < 2 {
        return Err(Error::invalid("N must be at least 2"));
    }
    let prec = opts.precision_bits();
    let lower_chain = weissler_lower(n, k, opts)?;
    let upper_chain = if *k >= 2 {
        Some(rankin_upper(n, k, sigma, opts)?)
    } else {
        None
    };
    let norm = Float::with_val(prec, n)
        .ln()
        .pow(Float::with_val(prec, Rational::from(k.square_ref())));
    let lower = lower_chain.value.clone();
    let upper = upper_chain.as_ref().map(|u| u.value.clone());
    Ok(BoundCertificate {
        n,
        k: k.clone(),
        lower_normalized: Float::with_val(prec, &lower / &norm),
        upper_normalized: upper.as_ref().map(|u| Float::with_val(prec, u / &norm)),
        lower,
        upper,
        lower_chain,
        upper_chain,
        main_term: main_term(k, prec),
        precision_bits: prec,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownReport {
    pub n: f64,
    pub c: f64,
    /// `C log N / log log N`.
    pub k_star: f64,
    /// `log log N − log k* − log log k* + log C`.
    pub residual: f64,
    /// `−log(1 + (log C − log log log N)/log log N)`, equal to the residual.
    pub closed_form: f64,
    /// `C_0` used for the main-term upper bound, if any.
    pub c0: Option<f64>,
    /// `(log N)^{k²} exp(−k² log k − k² log log k + C_0 k²)` at `k = k*`, as a logarithm.
    pub log_main_upper: Option<f64>,
    /// The main-term upper bound at `k*` is below the trivial lower bound 1.
    pub contradiction: Option<bool>,
}

impl BreakdownReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": f64_string(self.n),
            "C": f64_string(self.c),
            "k_star": f64_string(self.k_star),
            "residual": f64_string(self.residual),
            "closed_form": f64_string(self.closed_form),
            "C0": self.c0.map(f64_string),
            "log_main_upper": self.log_main_upper.map(f64_string),
            "contradiction": self.contradiction,
        })
    }
}

/// `k* = C log N / log log N` and the identity behind the breakdown of the
/// upper bound. `n` is real so that astronomically large `N` can be probed.
pub fn breakdown_threshold(n: f64, c: f64, c0: Option<f64>) -> Result<BreakdownReport> {
    if n.is_nan() || n < 16.0 {
        return Err(Error::domain("N must be at least 16"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("C must be positive"));
    }
    let l = n.ln();
    let ll = l.ln();
    let lll = ll.ln();
    let k_star = c * l / ll;
    let residual = ll - k_star.ln() - k_star.ln().ln() + c.ln();
    let closed_form = -(1.0 + (c.ln() - lll) / ll).ln();
    let log_main_upper = c0.map(|c0| k_star * k_star * (ll - k_star.ln() - k_star.ln().ln() + c0));
    Ok(BreakdownReport {
        n,
        c,
        k_star,
        residual,
        closed_form,
        c0,
        log_main_upper,
        contradiction: log_main_upper.map(|x| x < 0.0),
    })
}

/// Smallest `C_0` with `upper/(log N)^{k²} <= exp(−k² log k − k² log log k + C_0 k²)`
/// over the given points.
pub fn calibrate_upper_constant(points: &[(u64, u32)], opts: &BoundOptions) -> Result<f64> {
    let mut c0 = f64::NEG_INFINITY;
    for &(n, k) in points {
        let kr = Rational::from(k);
        let up = rankin_upper(n, &kr, SigmaChoice::Default, opts)?;
        let kf = k as f64;
        let log_norm = up.value.clone().ln().to_f64() - kf * kf * (n as f64).ln().ln();
        let need = (log_norm + kf * kf * (kf.ln() + kf.ln().ln())) / (kf * kf);
        c0 = c0.max(need);
    }
    Ok(c0)
}

/// Default precision for certificates.
pub const DEFAULT_BOUND_PRECISION: u32 = DEFAULT_PRECISION_BITS;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big_omega;

    fn r(s: &str) -> Rational {
        crate::numeric::parse_rational(s).unwrap()
    }

    fn fast() -> BoundOptions {
        BoundOptions {
            euler: EulerOptions {
                truncation_prime: 10_000,
                ..EulerOptions::default()
            },
            ..BoundOptions::default()
        }
    }

    #[test]
    fn integer_k_lower_bound_is_the_moment() {
        let o = fast();
        let l = weissler_lower(20, &r("2"), &o).unwrap();
        let m = pseudomoment(20, 2, &r("1"), &o.moments).unwrap();
        assert_eq!(l.rho_squared, 1);
        assert_eq!(l.inner.value_exact, m.value_exact);
        assert!(l.value <= Float::with_val(256, m.value_exact.as_ref().unwrap()));
        assert!((l.value.to_f64() / m.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn fractional_lower_bound_matches_four_tuples() {
        // Direct sum over (n1, n2, n3, n4) <= 10 with n1 n2 = n3 n4 of (3/4)^{Ω(n1 n2)}/(n1 n2).
        let n = 10u64;
        let mut inner = 0.0;
        for a in 1..=n {
            for b in 1..=n {
                for c in 1..=n {
                    for d in 1..=n {
                        if a * b == c * d {
                            inner += 0.75f64.powi(big_omega(a * b) as i32) / (a * b) as f64;
                        }
                    }
                }
            }
        }
        let l = weissler_lower(n, &r("1.5"), &fast()).unwrap();
        assert_eq!(l.ceil_k, 2);
        assert_eq!(l.rho_squared, r("3/4"));
        assert!((l.value.to_f64() / inner.powf(0.75) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_monotone_in_n() {
        let o = fast();
        let vals: Vec<Float> = [5u64, 10, 20, 40]
            .iter()
            .map(|&n| weissler_lower(n, &r("2.5"), &o).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn lower_bound_converges_at_integers() {
        // Approaching k = 3 from below, ⌈k⌉ = 3 and ϱ² → 1.
        let o = fast();
        let exact = weissler_lower(12, &r("3"), &o).unwrap().value.to_f64();
        let gap = |delta: &str| {
            let k = 3 - r(delta);
            (weissler_lower(12, &k, &o).unwrap().value.to_f64() / exact - 1.0).abs()
        };
        let (a, b, c) = (gap("1/1000"), gap("1/1000000"), gap("1/1000000000"));
        assert!(a > b && b > c && c < 1e-6, "{a} {b} {c}");
    }

    #[test]
    fn sandwich_holds_at_integers() {
        let o = fast();
        for n in [10u64, 20, 50, 100] {
            for k in [2u32, 3] {
                let kr = Rational::from(k);
                let cert = sandwich(n, &kr, SigmaChoice::Default, &o).unwrap();
                let exact = pseudomoment(n, k, &r("1"), &o.moments).unwrap();
                let e = exact.value_exact.unwrap();
                assert!(
                    cert.lower <= Float::with_val(256, &e)
                        && Float::with_val(256, &e) <= *cert.upper.as_ref().unwrap(),
                    "n={n} k={k} {} {} {}",
                    cert.lower,
                    Float::with_val(256, &e),
                    cert.upper.as_ref().unwrap()
                );
                assert!(cert.is_consistent());
            }
        }
    }

    #[test]
    fn fractional_certificate_is_finite_and_ordered() {
        let cert = sandwich(50, &r("2.5"), SigmaChoice::Default, &fast()).unwrap();
        let up = cert.upper.clone().unwrap();
        assert!(cert.lower.is_finite() && up.is_finite());
        assert!(cert.lower <= up);
        let v = cert.to_json();
        assert_eq!(v["k"], "5/2");
        assert_eq!(v["lower_chain"]["ceil_k"], 3);
        assert_eq!(v["upper_chain"]["floor_k"], 2);
        assert!(v["main_term"].is_string());
    }

    #[test]
    fn below_two_only_the_lower_side() {
        let cert = sandwich(30, &r("1.5"), SigmaChoice::Default, &fast()).unwrap();
        assert!(cert.upper.is_none() && cert.upper_chain.is_none());
        assert!(cert.to_json()["upper"].is_null());
        assert!(rankin_upper(30, &r("1.5"), SigmaChoice::Default, &fast()).is_err());
    }

    #[test]
    fn rankin_rejects_bad_sigma_and_warns() {
        let o = fast();
        assert!(rankin_upper(100, &r("2"), SigmaChoice::Fixed(0.0), &o).is_err());
        let up = rankin_upper(100, &r("2"), SigmaChoice::Fixed(2.0), &o).unwrap();
        assert_eq!(up.warnings.len(), 1);
        let up = rankin_upper(100, &r("2"), SigmaChoice::Fixed(0.3), &o).unwrap();
        assert!(up.warnings.is_empty());
    }

    #[test]
    fn grid_minimum_is_near_the_default() {
        let o = fast();
        for k in [2u32, 3] {
            let kr = Rational::from(k);
            let def = rankin_upper(100, &kr, SigmaChoice::Default, &o)
                .unwrap()
                .value
                .to_f64();
            let grid = rankin_upper(100, &kr, SigmaChoice::Grid(SIGMA_GRID_POINTS), &o)
                .unwrap()
                .value
                .to_f64();
            assert!(grid <= def);
            // Within e^{k²} of the grid optimum.
            assert!((def / grid).ln() <= (k * k) as f64, "k={k}");
        }
    }

    #[test]
    fn grid_refinement_never_increases() {
        let o = fast();
        let coarse =
            rankin_upper(200, &r("5/2"), SigmaChoice::Grid(SIGMA_GRID_POINTS), &o).unwrap();
        let fine = rankin_upper(
            200,
            &r("5/2"),
            SigmaChoice::Grid(2 * SIGMA_GRID_POINTS - 1),
            &o,
        )
        .unwrap();
        assert!(fine.value <= coarse.value);
        let a = sigma_grid(0.1, SIGMA_GRID_POINTS);
        let b = sigma_grid(0.1, 2 * SIGMA_GRID_POINTS - 1);
        assert!(a.iter().all(|s| b.contains(s)));
    }

    #[test]
    fn log_upper_over_k2_logloglog() {
        // log(upper)/(k² log log N) approaches 1 slowly as N grows.
        let o = fast();
        let k = r("2");
        let ratios: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let up = rankin_upper(n, &k, SigmaChoice::Default, &o).unwrap();
                up.value.clone().ln().to_f64() / (4.0 * (n as f64).ln().ln())
            })
            .collect();
        assert!(
            ratios
                .windows(2)
                .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()),
            "{ratios:?}"
        );
    }

    #[test]
    fn breakdown_examples() {
        let rep = breakdown_threshold(1e6, 1.0, None).unwrap();
        let l = 1e6f64.ln();
        assert!((rep.k_star - l / l.ln()).abs() < 1e-12);
        assert!((rep.residual - rep.closed_form).abs() < 1e-12);
        // |residual| peaks near log log N = e and decays beyond it.
        let res: Vec<f64> = [1e30, 1e100, 1e300]
            .iter()
            .map(|&n| breakdown_threshold(n, 1.0, None).unwrap().residual.abs())
            .collect();
        assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
        assert!(matches!(
            breakdown_threshold(15.0, 1.0, None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn breakdown_contradiction_with_calibrated_constant() {
        let o = fast();
        let c0 = calibrate_upper_constant(&[(100, 2), (100, 3), (1000, 2)], &o).unwrap();
        assert!(c0.is_finite());
        let rep = breakdown_threshold(1e8, (2.0 * c0).exp(), Some(c0)).unwrap();
        assert_eq!(rep.contradiction, Some(rep.residual < c0));
        assert!(rep.contradiction.unwrap());
    }

    #[test]
    fn certificates_order_for_fractional_k() {
        let opts = BoundOptions {
            euler: EulerOptions {
                truncation_prime: 10_000,
                ..EulerOptions::default()
            },
            ..BoundOptions::default()
        };
        for n in [10u64, 40] {
            for k in ["2", "9/4", "5/2", "11/4", "3"] {
                let k: Rational = k.parse().unwrap();
                let cert = sandwich(n, &k, SigmaChoice::Default, &opts).unwrap();
                assert!(cert.is_consistent(), "N={n} k={k}");
            }
        }
    }

    #[test]
    fn upper_bound_increases_with_k_at_fixed_sigma() {
        let opts = BoundOptions {
            euler: EulerOptions {
                truncation_prime: 10_000,
                ..EulerOptions::default()
            },
            ..BoundOptions::default()
        };
        let up = |k: &str| {
            rankin_upper(50, &k.parse().unwrap(), SigmaChoice::Fixed(0.3), &opts)
                .unwrap()
                .value
        };
        assert!(up("2") < up("5/2") && up("5/2") < up("3"));
    }
}
