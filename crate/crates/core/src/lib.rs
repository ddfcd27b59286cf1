//! Pseudomoments of partial sums of the Riemann zeta function.
//!
//! The crate evaluates the diagonal sums behind the moments of
//! `Σ_{n<=N} n^{-1/2-it}` exactly, the Euler-product and polytope constants
//! governing their growth, bound chains for non-integer exponents, and the
//! polytorus tools used to compare `L^{2k}` and sup norms.

pub mod arith;
pub mod bounds;
pub mod error;
pub mod euler;
pub mod moments;
pub mod numeric;
pub mod polytope;
pub mod sampling;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
