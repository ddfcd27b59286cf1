use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::arith::big_omega;
use crate::error::{Error, Result};

/// How stored coefficients map to the Dirichlet coefficients `a_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `a_n = c_n`.
    Plain,
    /// `a_n = c_n / √n`, so products over a diagonal `n_1⋯n_k = m` carry a
    /// common factor `1/√m` and squares stay rational.
    HalfShift,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Exact(BTreeMap<u64, Rational>),
    Real(BTreeMap<u64, Float>),
}

/// A Dirichlet polynomial `Σ_{n<=N} a_n n^{-s}`. Zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPolynomial {
    length: u64,
    coefficients: Coefficients,
    normalization: Normalization,
}

impl DirichletPolynomial {
    /// `S_N ζ(1/2 + s) = Σ_{n<=N} n^{-1/2} n^{-s}`.
    pub fn zeta_partial_sum(n: u64) -> Self {
        let coeffs = (1..=n).map(|m| (m, Rational::from(1))).collect();
        DirichletPolynomial {
            length: n,
            coefficients: Coefficients::Exact(coeffs),
            normalization: Normalization::HalfShift,
        }
    }

    /// `Σ_{n<=N} ϱ^{Ω(n)} n^{-1/2} n^{-s}` for rational ϱ.
    pub fn twisted_zeta_partial_sum(n: u64, rho: &Rational) -> Self {
        let coeffs = (1..=n)
            .filter_map(|m| {
                let c = Rational::from(rho.pow(big_omega(m) as i32));
                (c != 0).then_some((m, c))
            })
            .collect();
        DirichletPolynomial {
            length: n,
            coefficients: Coefficients::Exact(coeffs),
            normalization: Normalization::HalfShift,
        }
    }

    pub fn from_exact(
        length: u64,
        normalization: Normalization,
        coeffs: impl IntoIterator<Item = (u64, Rational)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            check_index(n, length)?;
            if c != 0 {
                map.insert(n, c);
            }
        }
        Ok(DirichletPolynomial {
            length,
            coefficients: Coefficients::Exact(map),
            normalization,
        })
    }

    pub fn from_real(
        length: u64,
        normalization: Normalization,
        precision_bits: u32,
        coeffs: impl IntoIterator<Item = (u64, f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            check_index(n, length)?;
            if !c.is_finite() {
                return Err(Error::invalid(format!("coefficient a_{n} is not finite")));
            }
            if c != 0.0 {
                map.insert(n, Float::with_val(precision_bits, c));
            }
        }
        Ok(DirichletPolynomial {
            length,
            coefficients: Coefficients::Real(map),
            normalization,
        })
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.coefficients, Coefficients::Exact(_))
    }

    /// Indices with a nonzero coefficient, ascending.
    pub fn support(&self) -> Vec<u64> {
        match &self.coefficients {
            Coefficients::Exact(m) => m.keys().copied().collect(),
            Coefficients::Real(m) => m.keys().copied().collect(),
        }
    }

    /// Stored coefficient `c_n` (before the `1/√n` of [`Normalization::HalfShift`]).
    pub fn stored_f64(&self, n: u64) -> f64 {
        match &self.coefficients {
            Coefficients::Exact(m) => m.get(&n).map_or(0.0, Rational::to_f64),
            Coefficients::Real(m) => m.get(&n).map_or(0.0, Float::to_f64),
        }
    }

    /// The Dirichlet coefficient `a_n` at the given precision.
    pub fn coefficient(&self, n: u64, precision_bits: u32) -> Float {
        let c = match &self.coefficients {
            Coefficients::Exact(m) => m.get(&n).map_or(Float::new(precision_bits), |c| {
                Float::with_val(precision_bits, c)
            }),
            Coefficients::Real(m) => m.get(&n).map_or(Float::new(precision_bits), |c| {
                Float::with_val(precision_bits, c)
            }),
        };
        match self.normalization {
            Normalization::Plain => c,
            Normalization::HalfShift => c / Float::with_val(precision_bits, n).sqrt(),
        }
    }

    pub fn coefficient_f64(&self, n: u64) -> f64 {
        let c = self.stored_f64(n);
        match self.normalization {
            Normalization::Plain => c,
            Normalization::HalfShift => c / (n as f64).sqrt(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.coefficients {
            Coefficients::Exact(m) => m.values().all(|c| *c >= 0),
            Coefficients::Real(m) => m.values().all(|c| *c >= 0),
        }
    }

    /// Keep only the terms whose index satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(u64) -> bool) -> Self {
        let coefficients = match &self.coefficients {
            Coefficients::Exact(m) => Coefficients::Exact(
                m.iter()
                    .filter(|(n, _)| keep(**n))
                    .map(|(n, c)| (*n, c.clone()))
                    .collect(),
            ),
            Coefficients::Real(m) => Coefficients::Real(
                m.iter()
                    .filter(|(n, _)| keep(**n))
                    .map(|(n, c)| (*n, c.clone()))
                    .collect(),
            ),
        };
        DirichletPolynomial {
            length: self.length,
            coefficients,
            normalization: self.normalization,
        }
    }
}

fn check_index(n: u64, length: u64) -> Result<()> {
    if n == 0 || n > length {
        return Err(Error::invalid(format!(
            "coefficient index {n} outside 1..={length}"
        )));
    }
    Ok(())
}
