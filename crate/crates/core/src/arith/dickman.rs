//! Dickman's function via exact power-series continuation of the delay
//! equation `u ρ'(u) = -ρ(u - 1)` across unit intervals.
//!
//! On `[k - 1, k]` write `ρ(u) = Σ c_i x^i` with `x = k - u`. The delay
//! equation becomes `(k - x) f_k'(x) = f_{k-1}(x)`, so
//! `c_{i+1} = (d_i + i c_i) / (k (i + 1))` where `d` are the coefficients
//! on the previous interval, and continuity at `u = k - 1` fixes `c_0`.

const TERMS: usize = 96;

fn next_interval(prev: &[f64], k: f64) -> Vec<f64> {
    let mut c = vec![0.0; TERMS];
    for i in 0..TERMS - 1 {
        c[i + 1] = (prev[i] + i as f64 * c[i]) / (k * (i as f64 + 1.0));
    }
    // f_k(1) = ρ(k - 1) = f_{k-1}(0)
    let tail: f64 = c[1..].iter().rev().sum();
    c[0] = prev[0] - tail;
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// ρ(u) for `u >= 0`. Values are accurate to roughly machine precision
/// relative to ρ(u) for moderate u.
pub fn dickman_rho(u: f64) -> f64 {
    assert!(
        u >= 0.0 && u.is_finite(),
        "dickman_rho needs a finite u >= 0"
    );
    if u <= 1.0 {
        return 1.0;
    }
    let top = u.ceil() as usize;
    let mut coeffs = vec![0.0; TERMS];
    coeffs[0] = 1.0;
    for k in 2..=top {
        coeffs = next_interval(&coeffs, k as f64);
    }
    horner(&coeffs, top as f64 - u)
}
