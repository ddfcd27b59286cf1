use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pseudomoment::arith::primes_up_to;
use pseudomoment::bounds::{
    breakdown_threshold, sandwich, BoundOptions, SigmaChoice, SIGMA_GRID_POINTS,
};
use pseudomoment::euler::{
    a_asymptotic, arithmetic_factor, diagonal_f, log_a_asymptotic, EulerOptions, TailMode,
};
use pseudomoment::moments::{
    pseudomoment, smoothed_pseudomoment, DirichletPolynomial, MomentOptions,
};
use pseudomoment::numeric::{
    decimal_string, f64_string, parse_rational, rational_string, DEFAULT_PRECISION_BITS,
};
use pseudomoment::polytope::{gamma_factor_mc, volume_mc, volume_sandwich};
use pseudomoment::torus::{
    bohr_lift, empirical_concentration, khintchine_bound, normcomp_threshold, smooth_sum_lower,
};
use pseudomoment::verify::{self, VerifyConfig};
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::cache::Cache;

/// A malformed request that clap cannot catch; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "usage error: {}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(
    name = "pseudomoment",
    version,
    about = "Pseudomoments of zeta partial sums and their constants"
)]
pub struct Cli {
    /// Directory for cached run records.
    #[arg(
        long,
        env = "PSEUDOMOMENT_RESULTS_DIR",
        default_value = "results",
        global = true
    )]
    pub results_dir: PathBuf,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pseudomoment M_{k,rho}(N), or its smoothed variant.
    Moment(MomentArgs),
    /// Arithmetic factor a(k,rho), diagonal F(sigma) or the asymptotic for log a.
    Euler(EulerArgs),
    /// Geometric factor and polytope volumes.
    Polytope {
        #[command(subcommand)]
        verb: PolytopeVerb,
    },
    /// Bound certificates for real k and the breakdown threshold.
    Bounds {
        #[command(subcommand)]
        verb: BoundsVerb,
    },
    /// Polytorus checks.
    Torus {
        #[command(subcommand)]
        verb: TorusVerb,
    },
    /// Cartesian sweep over N, k and rho^2, written as CSV.
    Sweep(SweepArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct MomentArgs {
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long)]
    pub k: u32,
    /// rho^2 as p/q, integer or decimal.
    #[arg(long, default_value = "1")]
    pub rho2: String,
    #[arg(long)]
    pub smoothed: bool,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    /// Largest support for which the exact rational value is formed.
    #[arg(long)]
    pub exact_limit: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TailArg {
    Elementary,
    Corrected,
}

#[derive(Args, Debug)]
pub struct EulerArgs {
    /// Integer k, or a real k with --asymptotic.
    #[arg(long)]
    pub k: String,
    #[arg(long, default_value = "1")]
    pub rho2: String,
    /// Evaluate the diagonal F at this sigma instead of a(k, rho).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = pseudomoment::euler::DEFAULT_TRUNCATION_PRIME)]
    pub trunc_prime: u64,
    #[arg(long, value_enum, default_value = "corrected")]
    pub tail: TailArg,
    /// Leading-order asymptotic for log a(k, rho) instead of the product.
    #[arg(long)]
    pub asymptotic: bool,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value = "1")]
    pub rho2: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum PolytopeVerb {
    /// Monte Carlo estimate of gamma(k, rho).
    Gamma(McArgs),
    /// Monte Carlo estimate of the polytope volume.
    Volume(McArgs),
    /// Closed-form lower and upper bounds for gamma(k, rho).
    Sandwich {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "1")]
        rho2: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoundsVerb {
    /// Lower and upper bounds for M_k(N) at real k.
    Sandwich {
        #[arg(long = "N")]
        n: u64,
        /// Decimal or p/q.
        #[arg(long)]
        k: String,
        /// Minimize the upper bound over a log-spaced sigma grid.
        #[arg(long, conflicts_with = "sigma")]
        sigma_grid: bool,
        #[arg(long)]
        sigma: Option<f64>,
        /// Use the smoothed moment in the lower chain.
        #[arg(long)]
        smoothed: bool,
        #[arg(long, default_value_t = pseudomoment::euler::DEFAULT_TRUNCATION_PRIME)]
        trunc_prime: u64,
        #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
        precision_bits: u32,
    },
    /// k* = C log N / log log N and the associated identity.
    Breakdown {
        /// May be astronomically large, e.g. 1e100.
        #[arg(long = "N")]
        n: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        /// Constant in the main-term upper bound; enables the contradiction flag.
        #[arg(long = "C0")]
        c0: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum TorusVerb {
    /// Measure of the set where the lifted f_N is at least lambda times its sup.
    Concentration {
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Exact 2k-norm of a linear form in the prime variables against the Khintchine bound.
    Khintchine {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        k: u32,
        /// Coefficients as p:a pairs, e.g. "2:1,3:1/2"; all ones by default.
        #[arg(long)]
        coeffs: Option<String>,
    },
    /// Sum of n^{-1/2} over N^epsilon-smooth n against the Dickman prediction.
    SmoothSum {
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
    },
    /// Sup norm of f_N against Psi(N^k, N)^{1/(2k)} times its 2k-norm.
    Normcomp {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum SweepQuantity {
    Moment,
    Smoothed,
    Bounds,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "moment")]
    pub quantity: SweepQuantity,
    /// Comma list or inclusive range a..b.
    #[arg(long = "N")]
    pub n: String,
    /// Comma list; rationals are allowed for bounds.
    #[arg(long)]
    pub k: String,
    /// Comma list; ignored for bounds.
    #[arg(long, default_value = "1")]
    pub rho2: String,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Only the cheaper criteria.
    #[arg(long)]
    pub quick: bool,
    /// Comma list of criterion numbers.
    #[arg(long)]
    pub only: Option<String>,
    /// Print the report as JSON after the lines.
    #[arg(long)]
    pub json: bool,
}

fn rational_arg(s: &str, what: &str) -> Result<Rational> {
    parse_rational(s).map_err(|e| usage(format!("--{what}: {e}")))
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Outcome of one invocation: text for stdout and the exit status.
pub struct Output {
    pub stdout: String,
    pub status: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, status: 0 }
    }
}

pub fn execute(cli: Cli) -> Result<Output> {
    let cache = Cache::new(&cli.results_dir, !cli.no_cache);
    match cli.command {
        Command::Moment(a) => cmd_moment(&cache, a).map(Output::ok),
        Command::Euler(a) => cmd_euler(&cache, a).map(Output::ok),
        Command::Polytope { verb } => cmd_polytope(&cache, verb).map(Output::ok),
        Command::Bounds { verb } => cmd_bounds(&cache, verb).map(Output::ok),
        Command::Torus { verb } => cmd_torus(&cache, verb).map(Output::ok),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn cmd_moment(cache: &Cache, a: MomentArgs) -> Result<String> {
    let rho = rational_arg(&a.rho2, "rho2")?;
    let mut opts = MomentOptions {
        precision_bits: a.precision_bits,
        workers: a.workers,
        ..MomentOptions::default()
    };
    if let Some(limit) = a.exact_limit {
        opts.exact_limit = limit;
    }
    let p = params(&[
        ("N", a.n.to_string()),
        ("k", a.k.to_string()),
        ("rho2", rational_string(&rho)),
        ("smoothed", a.smoothed.to_string()),
        ("precision_bits", a.precision_bits.to_string()),
        ("exact_limit", opts.exact_limit.to_string()),
    ]);
    cache.run("moment", p, None, || {
        let r = if a.smoothed {
            smoothed_pseudomoment(a.n, a.k, &rho, &opts)?
        } else {
            pseudomoment(a.n, a.k, &rho, &opts)?
        };
        Ok(r.to_json())
    })
}

fn cmd_euler(cache: &Cache, a: EulerArgs) -> Result<String> {
    let rho = rational_arg(&a.rho2, "rho2")?;
    if a.asymptotic {
        let k: f64 = a.k.parse().map_err(|_| usage("--k must be a number"))?;
        let p = params(&[
            ("k", f64_string(k)),
            ("rho2", rational_string(&rho)),
            ("mode", "asymptotic".into()),
        ]);
        return cache.run("euler", p, None, || {
            let r = rho.to_f64();
            Ok(serde_json::json!({
                "k": f64_string(k),
                "rho_squared": rational_string(&rho),
                "log_value": f64_string(log_a_asymptotic(k, r)?),
                "value": f64_string(a_asymptotic(k, r)?),
            }))
        });
    }
    let k: u32 =
        a.k.parse()
            .map_err(|_| usage("--k must be a positive integer"))?;
    let opts = EulerOptions {
        precision_bits: a.precision_bits,
        truncation_prime: a.trunc_prime,
        tail_mode: match a.tail {
            TailArg::Elementary => TailMode::Elementary,
            TailArg::Corrected => TailMode::Corrected,
        },
        ..EulerOptions::default()
    };
    let p = params(&[
        ("k", k.to_string()),
        ("rho2", rational_string(&rho)),
        (
            "sigma",
            a.sigma.map(f64_string).unwrap_or_else(|| "none".into()),
        ),
        ("trunc_prime", a.trunc_prime.to_string()),
        ("tail", format!("{:?}", a.tail).to_lowercase()),
        ("precision_bits", a.precision_bits.to_string()),
        ("mode", "product".into()),
    ]);
    cache.run("euler", p, None, || {
        let v = match a.sigma {
            Some(s) => diagonal_f(k, &rho, s, &opts)?,
            None => arithmetic_factor(k, &rho, &opts)?,
        };
        Ok(v.to_json())
    })
}

fn mc_params(verb: &str, a: &McArgs, rho: &Rational) -> BTreeMap<String, String> {
    params(&[
        ("verb", verb.into()),
        ("k", a.k.to_string()),
        ("rho2", rational_string(rho)),
        ("samples", a.samples.to_string()),
        ("seed", a.seed.to_string()),
    ])
}

fn cmd_polytope(cache: &Cache, verb: PolytopeVerb) -> Result<String> {
    match verb {
        PolytopeVerb::Gamma(a) => {
            let rho = rational_arg(&a.rho2, "rho2")?;
            cache.run(
                "polytope",
                mc_params("gamma", &a, &rho),
                Some(a.seed),
                || Ok(gamma_factor_mc(a.k, &rho, a.samples, a.seed, a.workers)?.to_json()),
            )
        }
        PolytopeVerb::Volume(a) => {
            let rho = rational_arg(&a.rho2, "rho2")?;
            cache.run(
                "polytope",
                mc_params("volume", &a, &rho),
                Some(a.seed),
                || Ok(volume_mc(a.k, &rho, a.samples, a.seed, a.workers)?.to_json()),
            )
        }
        PolytopeVerb::Sandwich { k, rho2 } => {
            let rho = rational_arg(&rho2, "rho2")?;
            let p = params(&[
                ("verb", "sandwich".into()),
                ("k", k.to_string()),
                ("rho2", rational_string(&rho)),
            ]);
            cache.run("polytope", p, None, || {
                let s = volume_sandwich(k, &rho)?;
                Ok(serde_json::json!({
                    "k": k,
                    "rho_squared": rational_string(&rho),
                    "lower": f64_string(s.lower),
                    "upper": f64_string(s.upper),
                    "log_lower": f64_string(s.log_lower),
                    "log_upper": f64_string(s.log_upper),
                }))
            })
        }
    }
}

fn cmd_bounds(cache: &Cache, verb: BoundsVerb) -> Result<String> {
    match verb {
        BoundsVerb::Sandwich {
            n,
            k,
            sigma_grid,
            sigma,
            smoothed,
            trunc_prime,
            precision_bits,
        } => {
            let k = rational_arg(&k, "k")?;
            let choice = match (sigma_grid, sigma) {
                (true, _) => SigmaChoice::Grid(SIGMA_GRID_POINTS),
                (false, Some(s)) => SigmaChoice::Fixed(s),
                (false, None) => SigmaChoice::Default,
            };
            let sigma_key = match choice {
                SigmaChoice::Grid(_) => "grid".to_string(),
                SigmaChoice::Fixed(s) => f64_string(s),
                SigmaChoice::Default => "default".to_string(),
            };
            let opts = BoundOptions {
                moments: MomentOptions {
                    precision_bits,
                    ..MomentOptions::default()
                },
                euler: EulerOptions {
                    precision_bits,
                    truncation_prime: trunc_prime,
                    ..EulerOptions::default()
                },
                smoothed_lower: smoothed,
            };
            let p = params(&[
                ("verb", "sandwich".into()),
                ("N", n.to_string()),
                ("k", rational_string(&k)),
                ("sigma", sigma_key),
                ("smoothed", smoothed.to_string()),
                ("trunc_prime", trunc_prime.to_string()),
                ("precision_bits", precision_bits.to_string()),
            ]);
            cache.run("bounds", p, None, || {
                Ok(sandwich(n, &k, choice, &opts)?.to_json())
            })
        }
        BoundsVerb::Breakdown { n, c, c0 } => {
            let p = params(&[
                ("verb", "breakdown".into()),
                ("N", f64_string(n)),
                ("C", f64_string(c)),
                ("C0", c0.map(f64_string).unwrap_or_else(|| "none".into())),
            ]);
            cache.run("bounds", p, None, || {
                Ok(breakdown_threshold(n, c, c0)?.to_json())
            })
        }
    }
}

fn parse_coefficients(n: u64, spec: Option<&str>) -> Result<Vec<(u64, Rational)>> {
    let Some(spec) = spec else {
        return Ok(primes_up_to(n)
            .into_iter()
            .map(|p| (p, Rational::from(1)))
            .collect());
    };
    let mut out: Vec<(u64, Rational)> = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (p, a) = item
            .split_once(':')
            .ok_or_else(|| usage(format!("coefficient '{item}' is not p:a")))?;
        let p: u64 = p
            .trim()
            .parse()
            .map_err(|_| usage(format!("'{p}' is not an integer")))?;
        out.push((p, rational_arg(a.trim(), "coeffs")?));
    }
    out.sort_by_key(|(p, _)| *p);
    if out.windows(2).any(|w| w[0].0 == w[1].0) {
        bail!(usage("a prime appears twice in --coeffs"));
    }
    Ok(out)
}

fn cmd_torus(cache: &Cache, verb: TorusVerb) -> Result<String> {
    match verb {
        TorusVerb::Concentration {
            n,
            lambda,
            samples,
            seed,
            workers,
        } => {
            let p = params(&[
                ("verb", "concentration".into()),
                ("N", n.to_string()),
                ("lambda", f64_string(lambda)),
                ("samples", samples.to_string()),
                ("seed", seed.to_string()),
            ]);
            cache.run("torus", p, Some(seed), || {
                let lift = bohr_lift(&DirichletPolynomial::zeta_partial_sum(n))?;
                let rep = empirical_concentration(&lift, lambda, samples, seed, workers)?;
                Ok(serde_json::to_value(rep)?)
            })
        }
        TorusVerb::Khintchine { n, k, coeffs } => {
            let c = parse_coefficients(n, coeffs.as_deref())?;
            let canon = c
                .iter()
                .map(|(p, a)| format!("{p}:{}", rational_string(a)))
                .collect::<Vec<_>>()
                .join(",");
            let p = params(&[
                ("verb", "khintchine".into()),
                ("N", n.to_string()),
                ("k", k.to_string()),
                ("coeffs", canon),
            ]);
            cache.run("torus", p, None, || {
                Ok(khintchine_bound(n, k, &c, DEFAULT_PRECISION_BITS)?.to_json())
            })
        }
        TorusVerb::SmoothSum { n, epsilon } => {
            let eps = rational_arg(&epsilon, "epsilon")?;
            let p = params(&[
                ("verb", "smooth-sum".into()),
                ("N", n.to_string()),
                ("epsilon", rational_string(&eps)),
            ]);
            cache.run("torus", p, None, || {
                Ok(serde_json::to_value(smooth_sum_lower(n, &eps)?)?)
            })
        }
        TorusVerb::Normcomp { n, k } => {
            let p = params(&[
                ("verb", "normcomp".into()),
                ("N", n.to_string()),
                ("k", k.to_string()),
            ]);
            cache.run("torus", p, None, || {
                Ok(normcomp_threshold(n, k, &MomentOptions::default())?.to_json())
            })
        }
    }
}

/// Comma list of integers, each item optionally an inclusive range `a..b`.
pub fn parse_int_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a
                .parse()
                .map_err(|_| usage(format!("bad range start '{a}'")))?;
            let b: u64 = b
                .parse()
                .map_err(|_| usage(format!("bad range end '{b}'")))?;
            if a > b {
                bail!(usage(format!("empty range {item}")));
            }
            out.extend(a..=b);
        } else {
            out.push(
                item.parse()
                    .map_err(|_| usage(format!("'{item}' is not an integer")))?,
            );
        }
    }
    if out.is_empty() {
        bail!(usage("empty list"));
    }
    Ok(out)
}

fn parse_rational_list(s: &str, what: &str) -> Result<Vec<Rational>> {
    let out: Vec<Rational> = s
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|x| rational_arg(x, what))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        bail!(usage(format!("--{what} is empty")));
    }
    Ok(out)
}

pub const SWEEP_HEADER: &str =
    "N,k,rho_squared,quantity,value,upper,normalized_value,normalized_upper";

fn cmd_sweep(a: SweepArgs) -> Result<Output> {
    let ns = parse_int_list(&a.n)?;
    let ks = parse_rational_list(&a.k, "k")?;
    let rhos = if a.quantity == SweepQuantity::Bounds {
        vec![Rational::from(1)]
    } else {
        parse_rational_list(&a.rho2, "rho2")?
    };
    let prec = a.precision_bits;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for &n in &ns {
        for k in &ks {
            for rho in &rhos {
                let log_n = Float::with_val(prec, n).ln();
                // (log N)^{k² ϱ²}, the natural scale of the moment.
                let scale = log_n.pow(Float::with_val(prec, Rational::from(k.square_ref()) * rho));
                let (quantity, value, upper) = match a.quantity {
                    SweepQuantity::Moment | SweepQuantity::Smoothed => {
                        let ku = (k.denom() == &1)
                            .then(|| k.numer().to_u32())
                            .flatten()
                            .ok_or_else(|| usage("moment sweeps need integer k"))?;
                        let opts = MomentOptions {
                            precision_bits: prec,
                            ..MomentOptions::default()
                        };
                        let r = if a.quantity == SweepQuantity::Smoothed {
                            smoothed_pseudomoment(n, ku, rho, &opts)?
                        } else {
                            pseudomoment(n, ku, rho, &opts)?
                        };
                        let q = if a.quantity == SweepQuantity::Smoothed {
                            "smoothed"
                        } else {
                            "moment"
                        };
                        (q, r.value_float, None)
                    }
                    SweepQuantity::Bounds => {
                        let cert = sandwich(n, k, SigmaChoice::Default, &BoundOptions::default())?;
                        ("bounds", cert.lower, cert.upper)
                    }
                };
                let norm_value = Float::with_val(prec, &value / &scale);
                let norm_upper = upper.as_ref().map(|u| Float::with_val(prec, u / &scale));
                writeln!(
                    csv,
                    "{n},{},{},{quantity},{},{},{},{}",
                    rational_string(k),
                    rational_string(rho),
                    decimal_string(&value),
                    upper.as_ref().map(decimal_string).unwrap_or_default(),
                    decimal_string(&norm_value),
                    norm_upper.as_ref().map(decimal_string).unwrap_or_default(),
                )
                .expect("writing to a string");
            }
        }
    }
    match a.out {
        Some(path) => {
            std::fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
            Ok(Output::ok(format!(
                "wrote {} rows to {}\n",
                csv.lines().count() - 1,
                path.display()
            )))
        }
        None => Ok(Output::ok(csv)),
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<Output> {
    let only = match &a.only {
        Some(s) => Some(
            parse_int_list(s)?
                .into_iter()
                .map(|x| {
                    u32::try_from(x)
                        .ok()
                        .filter(|x| (1..=verify::CRITERIA).contains(x))
                })
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| usage(format!("criteria are numbered 1..={}", verify::CRITERIA)))?,
        ),
        None => None,
    };
    let config = VerifyConfig {
        quick: a.quick,
        only,
    };
    let report = verify::run(&config, |o| println!("{}", o.line()));
    let passed = report.outcomes.iter().filter(|o| o.passed).count();
    let mut stdout = format!("{passed} of {} criteria passed\n", report.outcomes.len());
    if a.json {
        stdout.push_str(&serde_json::to_string_pretty(&report)?);
        stdout.push('\n');
    }
    Ok(Output {
        stdout,
        status: if report.all_passed() { 0 } else { 1 },
    })
}

/// Exit status for an error: 2 for usage and parameter errors, 3 for budget errors, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<pseudomoment::Error>() {
        Some(pseudomoment::Error::BudgetExceeded { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}
