//! The acceptance suite: one outcome per criterion, each with a pinned
//! tolerance and a wall-clock limit.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;

use crate::arith::primes_up_to;
use crate::bounds::{sandwich, BoundOptions, SigmaChoice};
use crate::error::Result;
use crate::euler::{arithmetic_factor, EulerOptions};
use crate::moments::{pseudomoment, DirichletPolynomial, MomentOptions};
use crate::polytope::{gamma_factor_exact_k1, gamma_factor_mc, volume_mc, volume_sandwich};
use crate::torus::{
    bohr_lift, concentration_bound, empirical_concentration, khintchine_bound, normcomp_threshold,
    smooth_sum_lower,
};

/// Criteria run by `quick`; the slower ones are left out.
pub const QUICK: [u32; 9] = [1, 2, 4, 5, 9, 10, 11, 12, 13];
pub const CRITERIA: u32 = 13;

const SEED: u64 = 20_240_601;
const ALT_WORKERS: usize = 4;

#[derive(Debug, Clone, Default)]
pub struct VerifyConfig {
    pub quick: bool,
    /// Restrict to these criteria (after the `quick` filter).
    pub only: Option<Vec<u32>>,
}

impl VerifyConfig {
    fn selected(&self) -> Vec<u32> {
        (1..=CRITERIA)
            .filter(|id| !self.quick || QUICK.contains(id))
            .filter(|id| self.only.as_ref().is_none_or(|o| o.contains(id)))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub limit_secs: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2}s of {:.0}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_secs,
            self.limit_secs,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub outcomes: Vec<Outcome>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> Vec<u32> {
        self.outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.id)
            .collect()
    }
}

/// A stochastic run that criterion 13 replays with another worker count.
type Replay = Box<dyn Fn(usize) -> Result<serde_json::Value>>;

struct Check {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Result<Check> {
    Ok(Check { passed, detail })
}

const NAMES: [&str; 13] = [
    "exact moments match tuple enumeration",
    "first moment against log N",
    "second moment constant trend",
    "arithmetic factor at k = 1 and k = 2",
    "geometric factor at k = 1 by Monte Carlo",
    "product of arithmetic factor and polytope volume at k = 2",
    "certificate sandwich validity",
    "closed-form bounds bracket the geometric factor",
    "polytorus concentration lower bound",
    "Khintchine inequality on the property grid",
    "sup norm against Psi-weighted 2k-norm",
    "smooth-number sum against the Dickman prediction",
    "determinism across worker counts",
];

const LIMITS: [u64; 13] = [10, 1, 600, 30, 60, 300, 300, 300, 60, 60, 60, 60, 600];

/// Runs the selected criteria in order, reporting each outcome as it completes.
pub fn run(config: &VerifyConfig, mut on_outcome: impl FnMut(&Outcome)) -> Report {
    let selected = config.selected();
    let mut replays: Vec<(String, serde_json::Value, Replay)> = Vec::new();
    let mut outcomes = Vec::new();
    for id in selected {
        let start = Instant::now();
        let result = match id {
            1 => c1_exact_oracle(),
            2 => c2_first_moment(),
            3 => c3_second_moment(),
            4 => c4_arithmetic_factor(),
            5 => c5_gamma_k1(&mut replays),
            6 => c6_volume_product(&mut replays),
            7 => c7_certificates(),
            8 => c8_gamma_sandwich(&mut replays),
            9 => c9_concentration(&mut replays),
            10 => c10_khintchine(),
            11 => c11_normcomp(),
            12 => c12_smooth_sum(),
            13 => c13_determinism(&replays),
            _ => unreachable!(),
        };
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(LIMITS[id as usize - 1]);
        let (mut passed, mut detail) = match result {
            Ok(c) => (c.passed, c.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if elapsed > limit {
            passed = false;
            detail.push_str("; over the time limit");
        }
        let outcome = Outcome {
            id,
            name: NAMES[id as usize - 1],
            passed,
            detail,
            elapsed_secs: elapsed.as_secs_f64(),
            limit_secs: limit.as_secs_f64(),
        };
        on_outcome(&outcome);
        outcomes.push(outcome);
    }
    Report { outcomes }
}

/// Trial-division Ω, kept separate from the sieve used by the library.
fn omega_trial(mut n: u64) -> u32 {
    let mut count = 0;
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            n /= p;
            count += 1;
        }
        p += 1;
    }
    count + u32::from(n > 1)
}

/// `Σ over 2k-tuples in [1,N]^{2k} with a_1⋯a_k = b_1⋯b_k of (ϱ²)^{Ω(a)}/a`.
pub fn brute_force_moment(n: u64, k: u32, rho_squared: &Rational) -> Rational {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut tuple = vec![1u64; k as usize];
    loop {
        *counts.entry(tuple.iter().product()).or_default() += 1;
        let mut i = 0;
        loop {
            if i == tuple.len() {
                let mut total = Rational::new();
                for (m, c) in counts {
                    let w = Rational::from(rho_squared.pow(omega_trial(m) as i32));
                    total += w * Rational::from((c * c, m));
                }
                return total;
            }
            if tuple[i] < n {
                tuple[i] += 1;
                break;
            }
            tuple[i] = 1;
            i += 1;
        }
    }
}

fn c1_exact_oracle() -> Result<Check> {
    let rhos = ["0", "1/4", "1", "25/16"];
    let opts = MomentOptions::default();
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for n in 1..=12u64 {
        for k in 1..=2u32 {
            for r in rhos {
                let rho: Rational = r.parse().expect("literal");
                let got = pseudomoment(n, k, &rho, &opts)?.value_exact;
                cases += 1;
                if got.as_ref() != Some(&brute_force_moment(n, k, &rho)) {
                    mismatches.push(format!("N={n} k={k} rho2={r}"));
                }
            }
        }
    }
    check(
        mismatches.is_empty(),
        format!("{cases} cases, mismatches: {mismatches:?}"),
    )
}

fn c2_first_moment() -> Result<Check> {
    let n = 1_000_000u64;
    // Only a ratio is needed, so the floating path suffices.
    let opts = MomentOptions {
        exact_limit: 0,
        ..MomentOptions::default()
    };
    let m = pseudomoment(n, 1, &Rational::from(1), &opts)?;
    let ratio = m.to_f64() / (n as f64).ln();
    check(
        (1.0..=1.15).contains(&ratio),
        format!("M_1(10^6)/log N = {ratio:.6}, required in [1, 1.15]"),
    )
}

fn c3_second_moment() -> Result<Check> {
    let target = 1.0 / (PI * PI);
    let mut ratios = Vec::new();
    for n in [100u64, 1_000, 10_000] {
        let m = pseudomoment(n, 2, &Rational::from(1), &MomentOptions::default())?;
        ratios.push(m.to_f64() / (n as f64).ln().powi(4));
    }
    let increasing = ratios.windows(2).all(|w| w[0] < w[1]);
    let last = ratios[2];
    let in_window = (0.04..=target).contains(&last);
    check(
        increasing && in_window,
        format!(
            "M_2(N)/(log N)^4 at N=10^2,10^3,10^4: {:.4}, {:.4}, {:.4}; increasing: {increasing}; last in [0.04, {target:.4}]: {in_window}",
            ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn c4_arithmetic_factor() -> Result<Check> {
    let opts = EulerOptions {
        truncation_prime: 100_000,
        ..EulerOptions::default()
    };
    let a1 = arithmetic_factor(1, &Rational::from(1), &opts)?;
    let a1_exact = a1.value == 1 && a1.tail_bound == 0;
    let a2 = arithmetic_factor(2, &Rational::from(1), &opts)?;
    // Σ d(n)²/n^s = ζ(s)⁴/ζ(2s) makes the k = 2 factor 1/ζ(2).
    let prec = a2.precision_bits;
    let oracle =
        Float::with_val(prec, 6) / Float::with_val(prec, rug::float::Constant::Pi).square();
    let rel = (Float::with_val(prec, &a2.value - &oracle) / &oracle)
        .abs()
        .to_f64();
    let tail = a2.tail_bound.to_f64();
    check(
        a1_exact && tail <= 1e-20 && rel <= 1e-10,
        format!("a(1,1) exact: {a1_exact}; a(2,1) tail {tail:.3e} (<= 1e-20); relative error vs 6/pi^2 {rel:.3e} (<= 1e-10)"),
    )
}

fn c5_gamma_k1(replays: &mut Vec<(String, serde_json::Value, Replay)>) -> Result<Check> {
    let closed = gamma_factor_exact_k1(&Rational::from(1))? == 1.0 / 3.0;
    let mut ok = closed;
    let mut parts = vec![format!("gamma(1,1) = 1/3: {closed}")];
    for (i, r) in ["1/2", "1", "3/2"].iter().enumerate() {
        let rho: Rational = r.parse().expect("literal");
        let seed = SEED + i as u64;
        let est = gamma_factor_mc(1, &rho, 1_000_000, seed, Some(1))?;
        let exact = gamma_factor_exact_k1(&rho)?;
        let z = (est.mean - exact).abs() / est.std_error;
        ok &= z <= 4.0;
        parts.push(format!(
            "rho2={r}: {:.6} vs {exact:.6}, {z:.2} se",
            est.mean
        ));
        let rho2 = rho.clone();
        replays.push((
            format!("gamma k=1 rho2={r}"),
            est.to_json(),
            Box::new(move |w| Ok(gamma_factor_mc(1, &rho2, 1_000_000, seed, Some(w))?.to_json())),
        ));
    }
    check(ok, parts.join("; "))
}

fn c6_volume_product(replays: &mut Vec<(String, serde_json::Value, Replay)>) -> Result<Check> {
    let one = Rational::from(1);
    let a2 = arithmetic_factor(2, &one, &EulerOptions::default())?.to_f64();
    let samples = 10_000_000;
    let vol = volume_mc(2, &one, samples, SEED, Some(1))?;
    let product = a2 * vol.mean;
    let se = a2 * vol.std_error;
    let target = 1.0 / (PI * PI);
    let z = (product - target).abs() / se;
    let gamma = gamma_factor_mc(2, &one, 1_000_000, SEED, Some(1))?;
    replays.push((
        "volume k=2 rho2=1".into(),
        vol.to_json(),
        Box::new(move |w| Ok(volume_mc(2, &Rational::from(1), samples, SEED, Some(w))?.to_json())),
    ));
    check(
        z <= 3.0,
        format!(
            "a(2,1)*Vol = {product:.6} vs 1/pi^2 = {target:.6}, {z:.2} se (<= 3); weighted gamma(2,1) = {:.6} +- {:.1e}",
            gamma.mean, gamma.std_error
        ),
    )
}

fn c7_certificates() -> Result<Check> {
    let opts = BoundOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [20u64, 50, 100] {
        for k in ["2", "5/2", "3"] {
            let kr: Rational = k.parse().expect("literal");
            let cert = sandwich(n, &kr, SigmaChoice::Default, &opts)?;
            let mut good = cert.is_consistent() && cert.upper.is_some();
            if kr.denom() == &1 {
                let ku = kr.numer().to_u32().expect("small k");
                let exact = pseudomoment(n, ku, &Rational::from(1), &opts.moments)?
                    .value_exact
                    .expect("exact at this size");
                let e = Float::with_val(512, &exact);
                good &= cert.lower <= e && cert.upper.as_ref().is_some_and(|u| e <= *u);
            }
            ok &= good;
            if !good {
                parts.push(format!("N={n} k={k} violated"));
            }
        }
    }
    check(
        ok,
        if parts.is_empty() {
            "9 certificates ordered, exact moments inside".into()
        } else {
            parts.join("; ")
        },
    )
}

fn c8_gamma_sandwich(replays: &mut Vec<(String, serde_json::Value, Replay)>) -> Result<Check> {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [2u32, 3] {
        for r in ["1", "3/2"] {
            let rho: Rational = r.parse().expect("literal");
            let samples = if k == 3 { 10_000_000 } else { 1_000_000 };
            let seed = SEED + 10 * k as u64;
            let est = gamma_factor_mc(k, &rho, samples, seed, Some(1))?;
            let s = volume_sandwich(k, &rho)?;
            let (lo, hi) = est.interval(3.0);
            let good = s.lower <= hi && lo <= s.upper && est.std_error > 0.0;
            ok &= good;
            parts.push(format!(
                "k={k} rho2={r}: [{:.3e}, {:.3e}] vs MC [{lo:.3e}, {hi:.3e}]",
                s.lower, s.upper
            ));
            let rho2 = rho.clone();
            replays.push((
                format!("gamma k={k} rho2={r}"),
                est.to_json(),
                Box::new(move |w| Ok(gamma_factor_mc(k, &rho2, samples, seed, Some(w))?.to_json())),
            ));
        }
    }
    check(ok, parts.join("; "))
}

fn c9_concentration(replays: &mut Vec<(String, serde_json::Value, Replay)>) -> Result<Check> {
    let lift = bohr_lift(&DirichletPolynomial::zeta_partial_sum(5))?;
    let rep = empirical_concentration(&lift, 0.5, 1_000_000, SEED, Some(1))?;
    let bound = concentration_bound(5, 0.5);
    let json = serde_json::to_value(&rep).expect("report serializes");
    replays.push((
        "concentration N=5".into(),
        json,
        Box::new(move |w| {
            let lift = bohr_lift(&DirichletPolynomial::zeta_partial_sum(5))?;
            Ok(serde_json::to_value(empirical_concentration(
                &lift,
                0.5,
                1_000_000,
                SEED,
                Some(w),
            )?)
            .expect("serializes"))
        }),
    ));
    check(
        rep.d == 3 && rep.empirical_measure + 4.0 * rep.std_error >= bound,
        format!(
            "d={}, mu = {:.4e} +- {:.1e}, bound {bound:.4e}",
            rep.d, rep.empirical_measure, rep.std_error
        ),
    )
}

fn c10_khintchine() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut cases = 0u32;
    let mut failures = 0u32;
    for k in 1..=5u32 {
        for n in 2..=30u64 {
            let primes = primes_up_to(n);
            for _ in 0..100 {
                let coeffs: Vec<(u64, Rational)> = primes
                    .iter()
                    .map(|&p| {
                        (
                            p,
                            Rational::from((rng.gen_range(-9i32..=9), rng.gen_range(1u32..=4))),
                        )
                    })
                    .collect();
                cases += 1;
                if !khintchine_bound(n, k, &coeffs, 64)?.holds() {
                    failures += 1;
                }
            }
        }
    }
    check(failures == 0, format!("{cases} cases, {failures} failures"))
}

fn c11_normcomp() -> Result<Check> {
    let opts = MomentOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4u64, 10] {
        for k in [2u32, 3] {
            let c = normcomp_threshold(n, k, &opts)?;
            ok &= c.holds() && !c.psi_is_estimate;
            parts.push(format!("N={n} k={k}: Psi={} slack {:.3}", c.psi, c.slack()));
        }
    }
    check(ok, parts.join("; "))
}

fn c12_smooth_sum() -> Result<Check> {
    let rep = smooth_sum_lower(1_000_000, &Rational::from((1, 2)))?;
    check(
        (rep.ratio - 1.0).abs() <= 0.2,
        format!(
            "sum {:.2} vs 2 rho(2) sqrt(N) = {:.2}, ratio {:.4} (required within 20%)",
            rep.sum, rep.dickman_prediction, rep.ratio
        ),
    )
}

fn c13_determinism(replays: &[(String, serde_json::Value, Replay)]) -> Result<Check> {
    if replays.is_empty() {
        return check(false, "no stochastic criterion was run".into());
    }
    let mut differing = Vec::new();
    for (name, json, replay) in replays {
        if replay(ALT_WORKERS)? != *json {
            differing.push(name.clone());
        }
    }
    check(
        differing.is_empty(),
        format!(
            "{} runs replayed with 1 and {ALT_WORKERS} workers, differing: {differing:?}",
            replays.len()
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_small_values() {
        assert_eq!(
            brute_force_moment(3, 1, &Rational::from(1)),
            Rational::from((11, 6))
        );
        assert_eq!(
            brute_force_moment(2, 2, &Rational::from(1)),
            Rational::from((13, 4))
        );
        assert_eq!(
            brute_force_moment(5, 2, &Rational::new()),
            Rational::from(1)
        );
    }

    #[test]
    fn omega_by_trial_division() {
        assert_eq!(omega_trial(1), 0);
        assert_eq!(omega_trial(12), 3);
        assert_eq!(omega_trial(97), 1);
        assert_eq!(omega_trial(1024), 10);
    }

    #[test]
    fn selection() {
        let all = VerifyConfig::default().selected();
        assert_eq!(all.len(), 13);
        let quick = VerifyConfig {
            quick: true,
            only: None,
        }
        .selected();
        assert_eq!(quick, QUICK.to_vec());
        let one = VerifyConfig {
            quick: false,
            only: Some(vec![2, 11]),
        }
        .selected();
        assert_eq!(one, vec![2, 11]);
    }

    #[test]
    fn cheap_criteria_pass_and_print() {
        let mut lines = Vec::new();
        let rep = run(
            &VerifyConfig {
                quick: false,
                only: Some(vec![1, 11]),
            },
            |o| lines.push(o.line()),
        );
        assert!(rep.all_passed(), "{lines:?}");
        assert!(lines[0].starts_with("[PASS]  1 "));
    }

    #[test]
    fn determinism_needs_runs() {
        let rep = run(
            &VerifyConfig {
                quick: false,
                only: Some(vec![13]),
            },
            |_| {},
        );
        assert_eq!(rep.failures(), vec![13]);
    }
}
