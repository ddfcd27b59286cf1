//! Shared helpers for high-precision values: parsing, formatting and
//! worker pools.

use rug::ops::Pow;
use rug::{float::Round, Float, Integer, Rational};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Euler–Mascheroni constant to 100 decimal places.
pub const EULER_GAMMA: &str = "0.5772156649015328606065120900824024310421593359399235988057672348848677267776646709369470632917467495";

pub fn euler_gamma(prec: u32) -> Float {
    Float::with_val(prec, Float::parse(EULER_GAMMA).expect("constant parses"))
}

/// Parse `"p/q"`, an integer, or a finite decimal such as `"2.5"` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = num.trim().parse().map_err(|_| bad())?;
        let den: Integer = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        return Ok(Rational::from((num, den)));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: Integer = digits.parse().map_err(|_| bad())?;
    let den = Integer::from(10).pow(frac_part.len() as u32);
    let r = Rational::from((num, den));
    Ok(if neg { -r } else { r })
}

/// Canonical `"p/q"` string (always with a denominator).
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal string with as many significant digits as the precision carries.
pub fn decimal_string(x: &Float) -> String {
    let digits = ((x.prec() as f64) * std::f64::consts::LOG10_2)
        .floor()
        .max(1.0) as usize;
    decimal_string_digits(x, digits)
}

pub fn decimal_string_digits(x: &Float, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.into();
    }
    if x.is_zero() {
        return "0".into();
    }
    let (neg, mantissa, exp) = x.to_sign_string_exp_round(10, Some(digits), Round::Nearest);
    let exp = exp.expect("finite nonzero value has an exponent");
    let sign = if neg { "-" } else { "" };
    // mantissa is 0.DDDD × 10^exp
    let mantissa = mantissa.trim_end_matches('0');
    let mantissa = if mantissa.is_empty() { "0" } else { mantissa };
    if (-8..=40).contains(&exp) {
        if exp <= 0 {
            format!("{sign}0.{}{}", "0".repeat((-exp) as usize), mantissa)
        } else if (exp as usize) >= mantissa.len() {
            format!(
                "{sign}{}{}",
                mantissa,
                "0".repeat(exp as usize - mantissa.len())
            )
        } else {
            let (a, b) = mantissa.split_at(exp as usize);
            format!("{sign}{a}.{b}")
        }
    } else {
        let (a, b) = mantissa.split_at(1);
        let b = if b.is_empty() { "0" } else { b };
        format!("{sign}{a}.{b}e{}", exp - 1)
    }
}

/// Shortest round-trip representation of an `f64`.
pub fn f64_string(x: f64) -> String {
    format!("{x:?}")
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64()
}

/// Run `f` on a dedicated pool with `workers` threads, or on the global pool.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// `Σ values` with Neumaier compensation, in the given order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational::from((3, 4)));
        assert_eq!(parse_rational("2.5").unwrap(), Rational::from((5, 2)));
        assert_eq!(parse_rational("7").unwrap(), Rational::from(7));
        assert_eq!(parse_rational("-0.125").unwrap(), Rational::from((-1, 8)));
        assert_eq!(parse_rational("50/40").unwrap(), Rational::from((5, 4)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn formats_decimals() {
        assert_eq!(decimal_string_digits(&Float::with_val(64, 1.5), 10), "1.5");
        assert_eq!(
            decimal_string_digits(&Float::with_val(64, 1000), 10),
            "1000"
        );
        assert_eq!(
            decimal_string_digits(&Float::with_val(64, 0.015625), 10),
            "0.015625"
        );
        assert_eq!(
            decimal_string_digits(&Float::with_val(64, -2.25), 10),
            "-2.25"
        );
        assert_eq!(
            decimal_string_digits(&Float::with_val(64, 1e-20), 5),
            "1.0e-20"
        );
        let third = Float::with_val(128, 1) / 3u32;
        assert!(decimal_string(&third).starts_with("0.333333333333333333333333333333333333"));
    }

    #[test]
    fn euler_gamma_constant() {
        let g = euler_gamma(256);
        let reference = Float::with_val(256, rug::float::Constant::Euler);
        let diff = Float::with_val(256, &g - &reference).abs();
        assert!(diff < 1e-70);
    }
}
