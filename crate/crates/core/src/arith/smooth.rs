use serde::Serialize;

use super::PrimeTable;

/// The y-smooth integers in `[1, x]`: every prime factor is `<= y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoothSet {
    pub bound_x: u64,
    pub smoothness_y: u64,
    pub members: Vec<u64>,
}

impl SmoothSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }
}

/// Walk every product of primes from `primes[start..]` that stays `<= x`,
/// starting from `base`. Returns false once `visit` asks to stop.
fn walk(
    primes: &[u64],
    start: usize,
    base: u64,
    x: u64,
    visit: &mut impl FnMut(u64) -> bool,
) -> bool {
    for i in start..primes.len() {
        let p = primes[i];
        let Some(mut m) = base.checked_mul(p) else {
            break;
        };
        if m > x {
            break;
        }
        loop {
            if !visit(m) {
                return false;
            }
            if !walk(primes, i + 1, m, x, visit) {
                return false;
            }
            match m.checked_mul(p) {
                Some(next) if next <= x => m = next,
                _ => break,
            }
        }
    }
    true
}

pub fn smooth_set(x: u64, y: u64) -> SmoothSet {
    let mut members = Vec::new();
    if x >= 1 {
        members.push(1);
        let primes = PrimeTable::global().primes_le(y.min(x));
        walk(&primes, 0, 1, x, &mut |m| {
            members.push(m);
            true
        });
        members.sort_unstable();
    }
    SmoothSet {
        bound_x: x,
        smoothness_y: y,
        members,
    }
}

/// Ψ(x, y), counted by enumeration.
pub fn psi_smooth_count(x: u64, y: u64) -> u64 {
    psi_smooth_count_capped(x, y, u64::MAX).expect("uncapped count")
}

/// Ψ(x, y), or `None` once more than `cap` members have been seen.
pub fn psi_smooth_count_capped(x: u64, y: u64, cap: u64) -> Option<u64> {
    if x == 0 {
        return Some(0);
    }
    let primes = PrimeTable::global().primes_le(y.min(x));
    let mut count = 1u64;
    let finished = walk(&primes, 0, 1, x, &mut |_| {
        count += 1;
        count <= cap
    });
    (finished && count <= cap).then_some(count)
}

/// Upper bound Ψ(x, y) <= ∏_{p <= y} (⌊log x / log p⌋ + 1), valid for any x >= 1.
pub fn psi_product_estimate(x: f64, y: u64) -> f64 {
    let primes = PrimeTable::global().primes_le(y);
    primes
        .iter()
        .map(|&p| {
            // exponents e with p^e <= x, counted exactly in floating point
            let mut e = 0u32;
            let mut pe = 1.0f64;
            while pe * p as f64 <= x * (1.0 + 1e-12) {
                pe *= p as f64;
                e += 1;
            }
            (e + 1) as f64
        })
        .product()
}
