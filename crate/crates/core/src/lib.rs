//! Exact computation with separable Volterra integral operators and the
//! free complete differential Reynolds algebra.
//!
//! The crate has two worlds that mirror each other:
//!
//! * [`series`] and [`volterra`]: truncated power series over the rationals
//!   with the operators `P_K(f) = k(x) ∫_0^x h(t) f(t) dt` and
//!   `D_K(f) = (f/k)' / h`.
//! * [`algebra`] and [`tensor`]: tensor series over a base algebra with the
//!   complete shuffle product, the Reynolds operator `a ↦ 1 ⊗ a` and the
//!   matching modified differential.
//!
//! [`hom`] maps the second world into the first, [`identities`] checks the
//! operator identities in either one by computing exact residuals, and
//! [`expr`] parses and rewrites operator expressions.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod expr;
pub mod hom;
pub mod identities;
pub mod sample;
pub mod series;
pub mod tensor;
pub mod volterra;

use std::str::FromStr;

pub use error::{Error, Result};
pub use series::Series;
pub use tensor::TensorSeries;
pub use volterra::SeparableKernel;

/// Exact rational scalar, always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// `n/d` as a [`Rational`]. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    Rational::from_str(text.trim())
        .map_err(|e| Error::Invalid(format!("bad rational `{text}`: {e}")))
}
