//! Separable Volterra operators on truncated series.
//!
//! A kernel `K(x, t) = k(x) h(t)` with lower limit 0 gives
//!
//! ```text
//! P_K(f) = k(x) ∫_0^x h(t) f(t) dt
//! D_K(f) = (f / k)' / h
//! ```
//!
//! `P_K` needs no invertibility, while `D_K` and the weight `D_K(1)` need
//! nonzero constant terms in both `k` and `h`.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr;
use crate::{Rational, Series};

#[derive(Clone, PartialEq, Eq)]
pub struct SeparableKernel {
    k: Series,
    h: Series,
}

impl SeparableKernel {
    pub fn new(k: Series, h: Series) -> Self {
        SeparableKernel { k, h }
    }

    /// `K(x, t) = e^{-x+t}`, the classical Reynolds kernel.
    pub fn exp(ord: usize) -> Self {
        Self::new(
            Series::exp_linear(&-Rational::one(), ord),
            Series::exp_linear(&Rational::one(), ord),
        )
    }

    /// `K = 1`: plain integration and differentiation.
    pub fn unit(ord: usize) -> Self {
        Self::new(Series::one(ord), Series::one(ord))
    }

    /// `K(x, t) = 1 / (x^2 + 1)`.
    pub fn cauchy(ord: usize) -> Self {
        let one_plus_x2 = Series::from_ints(&[1, 0, 1], ord);
        Self::new(
            one_plus_x2.inverse().expect("1 + x^2 is invertible"),
            Series::one(ord),
        )
    }

    pub fn k(&self) -> &Series {
        &self.k
    }

    pub fn h(&self) -> &Series {
        &self.h
    }

    pub fn k_invertible(&self) -> bool {
        !self.k.constant_term().is_zero()
    }

    pub fn h_invertible(&self) -> bool {
        !self.h.constant_term().is_zero()
    }

    /// Lowest trusted order of the two factors.
    pub fn ord(&self) -> usize {
        self.k.ord().min(self.h.ord())
    }

    /// Whether `k` is constant to its trusted order, i.e. the kernel only
    /// depends on the integration variable.
    pub fn is_dummy_only(&self) -> bool {
        self.k.coeffs()[1..].iter().all(Zero::is_zero)
    }

    fn require_invertible(&self) -> Result<()> {
        if !self.k_invertible() {
            return Err(Error::NonInvertible("kernel factor k has k(0) = 0".into()));
        }
        if !self.h_invertible() {
            return Err(Error::NonInvertible("kernel factor h has h(0) = 0".into()));
        }
        Ok(())
    }

    /// `P_K(f) = k · ∫_0^x h f`.
    pub fn apply_p(&self, f: &Series) -> Series {
        &self.k * &(&self.h * f).integrate()
    }

    /// `D_K(f) = (1/h) · (f/k)'`.
    pub fn apply_d(&self, f: &Series) -> Result<Series> {
        self.require_invertible()?;
        let quotient = f * &self.k.inverse()?;
        Ok(&self.h.inverse()? * &quotient.derivative()?)
    }

    /// The weight `λ = D_K(1) = -k' / (h k^2)`.
    pub fn weight(&self) -> Result<Series> {
        self.apply_d(&Series::one(self.k.ord()))
    }

    /// `P_K^n(f)`.
    pub fn iterate_p(&self, f: &Series, n: usize) -> Series {
        (0..n).fold(f.clone(), |acc, _| self.apply_p(&acc))
    }

    /// Closed form of `P_K^n(1)` for kernels with `h = μ (1/k)'` and a
    /// nonzero linear coefficient in `k`:
    ///
    /// ```text
    /// P_K^n(1) = μ^n (k / k(0)) Σ_{s ≥ n} L^s / s!,   L = ln(k(0) / k)
    /// ```
    ///
    /// `L` has valuation 1, so summing `s` up to the trusted order loses
    /// nothing. The hypothesis on `h` is checked exactly to the trusted
    /// order rather than assumed.
    pub fn closed_form_pn1(&self, n: usize, mu: &Rational) -> Result<Series> {
        if mu.is_zero() {
            return Err(Error::PreconditionViolated("μ must be nonzero".into()));
        }
        if self.k.ord() < 1 || self.k.coeff(1).is_zero() {
            return Err(Error::PreconditionViolated(
                "the coefficient of x in k must be nonzero".into(),
            ));
        }
        let k0 = self.k.constant_term().clone();
        if k0.is_zero() {
            return Err(Error::PreconditionViolated("k(0) must be nonzero".into()));
        }
        let recip_k = self.k.inverse()?;
        let expected_h = recip_k.derivative()?.scale(mu);
        let check_ord = expected_h.ord().min(self.h.ord());
        if !self.h.equal_mod(&expected_h, check_ord)? {
            return Err(Error::PreconditionViolated(format!(
                "h does not equal {mu}·(1/k)' to order {check_ord}"
            )));
        }

        let ord = self.k.ord();
        let log = recip_k.scale(&k0).log()?;
        let mut sum = Series::zero(ord);
        let mut power = Series::one(ord);
        let mut factorial = Rational::one();
        for s in 0..=ord {
            if s > 0 {
                power = &power * &log;
                factorial *= Rational::from_integer(s.into());
            }
            if s >= n {
                sum = &sum + &power.scale(&factorial.recip());
            }
        }
        let prefactor = mu_power(mu, n) / &k0;
        Ok((&self.k * &sum).scale(&prefactor))
    }

    /// `P(f)P(g) - P(f P(g)) - P(P(f) g)`, the weight-zero Rota-Baxter
    /// defect.
    pub fn rota_baxter_residual(&self, f: &Series, g: &Series) -> Series {
        let pf = self.apply_p(f);
        let pg = self.apply_p(g);
        let lhs = &pf * &pg;
        let r1 = self.apply_p(&(f * &pg));
        let r2 = self.apply_p(&(&pf * g));
        &(&lhs - &r1) - &r2
    }
}

fn mu_power(mu: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * mu)
}

impl fmt::Debug for SeparableKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeparableKernel")
            .field("k", &self.k)
            .field("h", &self.h)
            .finish()
    }
}

/// A kernel as written on the command line: a named shortcut or
/// `k=<series-expr>,h=<series-expr>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelSpec {
    Exp,
    Unit,
    Cauchy,
    Custom { k: String, h: String },
}

impl KernelSpec {
    pub fn parse(text: &str) -> Result<KernelSpec> {
        let text = text.trim();
        match text {
            "exp" => return Ok(KernelSpec::Exp),
            "unit" => return Ok(KernelSpec::Unit),
            "cauchy" => return Ok(KernelSpec::Cauchy),
            _ => {}
        }
        let mut k = None;
        let mut h = None;
        for part in split_top_level(text) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("kernel part `{part}` is not key=value")))?;
            let value = value.trim().to_string();
            // validate eagerly so errors point at the flag
            expr::parse(&value)?;
            match key.trim() {
                "k" => k = Some(value),
                "h" => h = Some(value),
                other => return Err(Error::Invalid(format!("unknown kernel key `{other}`"))),
            }
        }
        Ok(KernelSpec::Custom {
            k: k.unwrap_or_else(|| "1".into()),
            h: h.unwrap_or_else(|| "1".into()),
        })
    }

    /// Materializes the kernel with both factors trusted to `ord`.
    pub fn build(&self, ord: usize) -> Result<SeparableKernel> {
        Ok(match self {
            KernelSpec::Exp => SeparableKernel::exp(ord),
            KernelSpec::Unit => SeparableKernel::unit(ord),
            KernelSpec::Cauchy => SeparableKernel::cauchy(ord),
            KernelSpec::Custom { k, h } => SeparableKernel::new(
                expr::eval_plain_series(&expr::parse(k)?, ord)?,
                expr::eval_plain_series(&expr::parse(h)?, ord)?,
            ),
        })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Exp => write!(f, "exp"),
            KernelSpec::Unit => write!(f, "unit"),
            KernelSpec::Cauchy => write!(f, "cauchy"),
            KernelSpec::Custom { k, h } => write!(f, "k={k},h={h}"),
        }
    }
}

/// Splits on commas that are not inside parentheses.
pub(crate) fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}
