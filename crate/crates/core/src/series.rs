//! Truncated univariate power series over exact rationals.
//!
//! Every [`Series`] carries the order up to which its coefficients are
//! trusted. Binary operations take the minimum of the operand orders,
//! differentiation loses one order and integration gains one, so a value
//! never claims more precision than its inputs can justify.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{parse_rational, Rational};

/// A power series `c_0 + c_1 x + ... + c_ord x^ord + O(x^{ord+1})`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    // Length is always ord + 1.
    coeffs: Vec<Rational>,
}

impl Series {
    /// Builds a series trusted to `ord`, padding with zeros or dropping
    /// coefficients past `ord` as needed.
    pub fn from_coeffs<I>(coeffs: I, ord: usize) -> Self
    where
        I: IntoIterator<Item = Rational>,
    {
        let mut coeffs: Vec<Rational> = coeffs.into_iter().take(ord + 1).collect();
        coeffs.resize(ord + 1, Rational::zero());
        Series { coeffs }
    }

    pub fn from_ints(coeffs: &[i64], ord: usize) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Rational::from_integer(c.into())), ord)
    }

    pub fn zero(ord: usize) -> Self {
        Series {
            coeffs: vec![Rational::zero(); ord + 1],
        }
    }

    pub fn one(ord: usize) -> Self {
        Self::constant(Rational::one(), ord)
    }

    pub fn constant(c: Rational, ord: usize) -> Self {
        let mut s = Self::zero(ord);
        s.coeffs[0] = c;
        s
    }

    /// `c * x^k`, which is zero to order `ord` when `k > ord`.
    pub fn monomial(c: Rational, k: usize, ord: usize) -> Self {
        let mut s = Self::zero(ord);
        if k <= ord {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn x(ord: usize) -> Self {
        Self::monomial(Rational::one(), 1, ord)
    }

    /// `e^{c x}` to order `ord`.
    pub fn exp_linear(c: &Rational, ord: usize) -> Self {
        let mut coeffs = Vec::with_capacity(ord + 1);
        let mut term = Rational::one();
        coeffs.push(term.clone());
        for n in 1..=ord {
            term = term * c / Rational::from_integer(n.into());
            coeffs.push(term.clone());
        }
        Series { coeffs }
    }

    pub fn ord(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^i`.
    ///
    /// Panics when `i` exceeds the trusted order.
    pub fn coeff(&self, i: usize) -> &Rational {
        &self.coeffs[i]
    }

    pub fn constant_term(&self) -> &Rational {
        &self.coeffs[0]
    }

    /// Drops coefficients beyond `ord`; a no-op when `ord >= self.ord()`.
    pub fn truncate(&self, ord: usize) -> Series {
        if ord >= self.ord() {
            return self.clone();
        }
        Series {
            coeffs: self.coeffs[..=ord].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Lowest exponent with a nonzero coefficient, `None` if the series is
    /// zero to its trusted order.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// The first nonzero coefficient together with its exponent.
    pub fn leading_term(&self) -> Option<(usize, &Rational)> {
        self.valuation().map(|i| (i, &self.coeffs[i]))
    }

    pub fn scale(&self, c: &Rational) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplication by `x^k`. The trusted order grows by `k` because the
    /// low coefficients of the result are known to be zero.
    pub fn shift(&self, k: usize) -> Series {
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Series { coeffs }
    }

    /// Termwise derivative, trusted to one order less than the input.
    pub fn derivative(&self) -> Result<Series> {
        if self.ord() == 0 {
            return Err(Error::NoTrustedDerivative);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(i.into()))
            .collect();
        Ok(Series { coeffs })
    }

    /// Antiderivative with zero constant term, trusted to one order more
    /// than the input.
    pub fn integrate(&self) -> Series {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / Rational::from_integer((i + 1).into()));
        }
        Series { coeffs }
    }

    /// Multiplicative inverse, defined when the constant term is nonzero.
    pub fn inverse(&self) -> Result<Series> {
        let f0 = self.constant_term();
        if f0.is_zero() {
            return Err(Error::NonInvertible(
                "series with zero constant term".to_string(),
            ));
        }
        let inv0 = f0.recip();
        let n = self.ord();
        let mut g: Vec<Rational> = Vec::with_capacity(n + 1);
        g.push(inv0.clone());
        for k in 1..=n {
            let mut acc = Rational::zero();
            for i in 1..=k {
                let fi = &self.coeffs[i];
                if !fi.is_zero() {
                    acc += fi * &g[k - i];
                }
            }
            g.push(-(acc * &inv0));
        }
        Ok(Series { coeffs: g })
    }

    /// Logarithm of a series with constant term 1, as the antiderivative of
    /// `f' / f`.
    pub fn log(&self) -> Result<Series> {
        if !self.constant_term().is_one() {
            return Err(Error::LogConstantTerm(self.constant_term().clone()));
        }
        if self.ord() == 0 {
            return Ok(Series::zero(0));
        }
        let quotient = &self.derivative()? * &self.inverse()?;
        Ok(quotient.integrate())
    }

    /// Exponential of a series with zero constant term.
    pub fn exp(&self) -> Result<Series> {
        if !self.constant_term().is_zero() {
            return Err(Error::PreconditionViolated(
                "exp needs a series with zero constant term".to_string(),
            ));
        }
        // g' = f' g, so n g_n = sum_{k=1}^{n} k f_k g_{n-k}
        let n = self.ord();
        let mut g: Vec<Rational> = Vec::with_capacity(n + 1);
        g.push(Rational::one());
        for m in 1..=n {
            let mut acc = Rational::zero();
            for k in 1..=m {
                let fk = &self.coeffs[k];
                if !fk.is_zero() {
                    acc += fk * &g[m - k] * Rational::from_integer(k.into());
                }
            }
            g.push(acc / Rational::from_integer(m.into()));
        }
        Ok(Series { coeffs: g })
    }

    /// `self^n`, with `self^0 = 1` at the same order.
    pub fn pow(&self, n: u32) -> Series {
        let mut acc = Series::one(self.ord());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact agreement of the coefficients of `x^0 .. x^n`.
    pub fn equal_mod(&self, other: &Series, n: usize) -> Result<bool> {
        let trusted = self.ord().min(other.ord());
        if n > trusted {
            return Err(Error::OrderExceeded {
                requested: n,
                trusted,
            });
        }
        Ok(self.coeffs[..=n] == other.coeffs[..=n])
    }

    /// Whether every coefficient through `x^n` vanishes.
    pub fn is_zero_mod(&self, n: usize) -> Result<bool> {
        if n > self.ord() {
            return Err(Error::OrderExceeded {
                requested: n,
                trusted: self.ord(),
            });
        }
        Ok(self.coeffs[..=n].iter().all(Zero::is_zero))
    }

    /// Coefficients as `"p/q"` strings in lowest terms.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("series serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Series> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))
    }

    fn zip_with<F>(&self, other: &Series, f: F) -> Series
    where
        F: Fn(&Rational, &Rational) -> Rational,
    {
        let ord = self.ord().min(other.ord());
        Series {
            coeffs: (0..=ord)
                .map(|i| f(&self.coeffs[i], &other.coeffs[i]))
                .collect(),
        }
    }
}

impl Add for &Series {
    type Output = Series;

    fn add(self, rhs: &Series) -> Series {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Series {
    type Output = Series;

    fn sub(self, rhs: &Series) -> Series {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Series {
    type Output = Series;

    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;

    /// Truncated Cauchy product.
    fn mul(self, rhs: &Series) -> Series {
        let ord = self.ord().min(rhs.ord());
        let mut coeffs = vec![Rational::zero(); ord + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(ord + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(ord + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Series { coeffs }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Series {
            type Output = Series;

            fn $m(self, rhs: Series) -> Series {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Series {
    type Output = Series;

    fn neg(self) -> Series {
        -&self
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series({self})")
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let abs = c.abs();
            match i {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{abs}*")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.ord() + 1)
    }
}

impl Serialize for Series {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Series {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(deserializer)?;
        if raw.is_empty() {
            return Err(de::Error::custom("a series needs at least one coefficient"));
        }
        let coeffs = raw
            .iter()
            .map(|s| parse_rational(s).map_err(de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Series { coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn geometric(n: usize) -> Series {
        Series::from_coeffs(std::iter::repeat(Rational::one()), n)
    }

    #[test]
    fn add_examples() {
        let a = Series::from_ints(&[1, 1], 3);
        let b = Series::from_ints(&[1, -1], 3);
        assert_eq!(&a + &b, Series::from_ints(&[2], 3));
        assert_eq!(&a + &Series::zero(3), a);
        let x = Series::x(4);
        let x2 = Series::monomial(rat(1, 1), 2, 4);
        assert_eq!(&x + &x2, Series::from_ints(&[0, 1, 1], 4));
    }

    #[test]
    fn add_takes_min_order() {
        let a = Series::from_ints(&[1, 2, 3], 5);
        let b = Series::from_ints(&[1], 2);
        assert_eq!((&a + &b).ord(), 2);
    }

    #[test]
    fn mul_examples() {
        let a = Series::from_ints(&[1, 1], 4);
        let b = Series::from_ints(&[1, -1], 4);
        assert_eq!(&a * &b, Series::from_ints(&[1, 0, -1], 4));
        assert_eq!(&a * &Series::one(4), a);
    }

    #[test]
    fn geometric_times_one_minus_x_by_direct_convolution() {
        let n = 12;
        let g = geometric(n);
        let f = Series::from_ints(&[1, -1], n);
        // direct convolution oracle
        let mut expected = vec![Rational::zero(); n + 1];
        for i in 0..=n {
            for j in 0..=1usize {
                if i + j <= n {
                    expected[i + j] += g.coeff(i) * f.coeff(j);
                }
            }
        }
        let prod = &g * &f;
        assert_eq!(prod.coeffs(), &expected[..]);
        assert_eq!(prod, Series::one(n));
    }

    #[test]
    fn derivative_examples() {
        let f = Series::monomial(rat(1, 1), 5, 8);
        assert_eq!(f.derivative().unwrap(), Series::monomial(rat(5, 1), 4, 7));
        assert!(Series::constant(rat(3, 1), 4).derivative().unwrap().is_zero());
        assert_eq!(Series::one(0).derivative(), Err(Error::NoTrustedDerivative));
        let f = Series::from_ints(&[3, -1, 4, 1, -5], 6);
        assert_eq!(f.integrate().derivative().unwrap(), f);
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(Series::one(3).integrate(), Series::x(4));
        assert_eq!(
            Series::monomial(rat(1, 1), 3, 5).integrate(),
            Series::monomial(rat(1, 4), 4, 6)
        );
        let g = geometric(9).integrate();
        for n in 0..=9usize {
            assert_eq!(g.coeff(n + 1), &rat(1, n as i64 + 1));
        }
        assert!(g.coeff(0).is_zero());
        assert_eq!(g.ord(), 10);
    }

    #[test]
    fn inverse_examples() {
        let f = Series::from_ints(&[1, -1], 10);
        assert_eq!(f.inverse().unwrap(), geometric(10));
        assert_eq!(Series::one(3).inverse().unwrap(), Series::one(3));
        assert_eq!(
            Series::constant(rat(2, 1), 3).inverse().unwrap(),
            Series::constant(rat(1, 2), 3)
        );
        assert!(matches!(
            Series::x(3).inverse(),
            Err(Error::NonInvertible(_))
        ));
    }

    #[test]
    fn log_examples() {
        assert!(Series::one(6).log().unwrap().is_zero());
        let f = Series::from_ints(&[1, 1], 10);
        let oracle = f.inverse().unwrap().integrate().truncate(10);
        let l = f.log().unwrap();
        assert_eq!(l, oracle);
        for n in 1..=10i64 {
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(l.coeff(n as usize), &rat(sign, n));
        }
        let g = Series::from_ints(&[1, 2, -3, 1], 8);
        let lhs = g.log().unwrap().derivative().unwrap();
        let rhs = &g.derivative().unwrap() * &g.inverse().unwrap();
        assert_eq!(lhs, rhs);
        assert!(matches!(
            Series::constant(rat(2, 1), 3).log(),
            Err(Error::LogConstantTerm(_))
        ));
    }

    #[test]
    fn equal_mod_examples() {
        let x = Series::x(6);
        let y = &x + &Series::monomial(rat(1, 1), 5, 6);
        assert!(x.equal_mod(&y, 4).unwrap());
        assert!(!x.equal_mod(&y, 5).unwrap());
        assert!(y.equal_mod(&y, y.ord()).unwrap());
        assert!(matches!(
            x.equal_mod(&y, 7),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn json_format() {
        let s = Series::from_coeffs(vec![rat(0, 1), rat(1, 1), rat(-1, 2)], 2);
        assert_eq!(s.to_json(), r#"["0","1","-1/2"]"#);
        assert_eq!(Series::from_json(r#"["0","1","-1/2"]"#).unwrap(), s);
        assert!(Series::from_json("[]").is_err());
        assert!(Series::from_json(r#"["1/0"]"#).is_err());
    }

    #[test]
    fn display() {
        let s = Series::from_coeffs(vec![rat(1, 1), rat(-1, 1), rat(1, 2)], 3);
        assert_eq!(s.to_string(), "1 - x + 1/2*x^2 + O(x^4)");
    }
}
