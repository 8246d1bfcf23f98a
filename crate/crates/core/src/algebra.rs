//! Base algebras for the free construction.
//!
//! A base algebra is commutative and unital, has an enumerable basis, and
//! carries a modified differential `d` with `d(xy) = d(x)y + xd(y) - x d(1) y`.
//! Its weight is `λ = d(1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::volterra::{KernelSpec, SeparableKernel};
use crate::{parse_rational, Rational, Series};

/// Index of a basis element. Index 0 is the unit in every instance here.
pub type BasisIndex = usize;

/// A finite linear combination of basis elements, without explicit zeros.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraElement {
    terms: BTreeMap<BasisIndex, Rational>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(i: BasisIndex) -> Self {
        Self::term(i, Rational::one())
    }

    pub fn term(i: BasisIndex, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(i, c);
        e
    }

    pub fn add_term(&mut self, i: BasisIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(i).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&i);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: BasisIndex) -> Rational {
        self.terms.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BasisIndex, &Rational)> {
        self.terms.iter().map(|(&i, c)| (i, c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        AlgebraElement {
            terms: self.terms.iter().map(|(&i, a)| (i, a * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, c) in other.iter() {
            out.add_term(i, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Largest basis index with a nonzero coefficient.
    pub fn max_index(&self) -> Option<BasisIndex> {
        self.terms.keys().next_back().copied()
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.iter().map(|(i, c)| format!("{c}·e{i}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A commutative unital algebra with an enumerable basis and a modified
/// differential.
pub trait BaseAlgebra: Send + Sync + fmt::Debug {
    /// Stable textual description, also used to detect mismatched operands.
    fn descriptor(&self) -> String;

    fn unit(&self) -> AlgebraElement {
        AlgebraElement::basis(0)
    }

    fn basis_product(&self, i: BasisIndex, j: BasisIndex) -> Result<AlgebraElement>;

    fn d_on_basis(&self, i: BasisIndex) -> Result<AlgebraElement>;

    /// Number of enumerated basis elements, `None` when unbounded.
    fn basis_limit(&self) -> Option<usize>;

    /// The element `x`, for algebras that have one.
    fn generator(&self) -> Option<AlgebraElement> {
        None
    }

    fn basis_name(&self, i: BasisIndex) -> String {
        format!("e{i}")
    }

    /// `λ = d(1)`.
    fn lambda(&self) -> Result<AlgebraElement> {
        self.alg_d(&self.unit())
    }

    fn alg_mul(&self, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero();
        for (i, a) in u.iter() {
            for (j, b) in v.iter() {
                let coeff = a * b;
                for (k, c) in self.basis_product(i, j)?.iter() {
                    out.add_term(k, &coeff * c);
                }
            }
        }
        Ok(out)
    }

    fn alg_d(&self, u: &AlgebraElement) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero();
        for (i, a) in u.iter() {
            for (k, c) in self.d_on_basis(i)?.iter() {
                out.add_term(k, a * c);
            }
        }
        Ok(out)
    }
}

/// `d(xy) - d(x)y - x d(y) + x d(1) y` on a pair of basis elements.
pub fn modified_leibniz_defect(
    alg: &dyn BaseAlgebra,
    i: BasisIndex,
    j: BasisIndex,
) -> Result<AlgebraElement> {
    let x = AlgebraElement::basis(i);
    let y = AlgebraElement::basis(j);
    let lambda = alg.lambda()?;
    let lhs = alg.alg_d(&alg.alg_mul(&x, &y)?)?;
    let t1 = alg.alg_mul(&alg.alg_d(&x)?, &y)?;
    let t2 = alg.alg_mul(&x, &alg.alg_d(&y)?)?;
    let t3 = alg.alg_mul(&alg.alg_mul(&x, &lambda)?, &y)?;
    Ok(lhs.sub(&t1).sub(&t2).add(&t3))
}

/// Whether the modified Leibniz rule holds for every pair of basis
/// elements with indices below `bound`.
pub fn verify_modified_leibniz(alg: &dyn BaseAlgebra, bound: usize) -> Result<bool> {
    let bound = alg.basis_limit().map_or(bound, |l| bound.min(l));
    for i in 0..bound {
        for j in 0..bound {
            if !modified_leibniz_defect(alg, i, j)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `u ↦ d(u) - λu` satisfies the ordinary Leibniz rule on every
/// pair of basis elements below `bound`.
pub fn verify_twisted_leibniz(alg: &dyn BaseAlgebra, bound: usize) -> Result<bool> {
    let bound = alg.basis_limit().map_or(bound, |l| bound.min(l));
    let lambda = alg.lambda()?;
    let twisted = |u: &AlgebraElement| -> Result<AlgebraElement> {
        Ok(alg.alg_d(u)?.sub(&alg.alg_mul(&lambda, u)?))
    };
    for i in 0..bound {
        for j in 0..bound {
            let x = AlgebraElement::basis(i);
            let y = AlgebraElement::basis(j);
            let lhs = twisted(&alg.alg_mul(&x, &y)?)?;
            let rhs = alg
                .alg_mul(&twisted(&x)?, &y)?
                .add(&alg.alg_mul(&x, &twisted(&y)?)?);
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The rationals with `d = λ·id`. With `λ = 1/μ` this is the base algebra
/// behind the kernels with `h = μ (1/k)'`; `λ = 0` covers `K = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarAlg {
    lambda: Rational,
    mu: Option<Rational>,
}

impl ScalarAlg {
    pub fn with_lambda(lambda: Rational) -> Self {
        let mu = (!lambda.is_zero()).then(|| lambda.recip());
        ScalarAlg { lambda, mu }
    }

    /// `d = μ^{-1}·id`.
    pub fn from_mu(mu: Rational) -> Result<Self> {
        if mu.is_zero() {
            return Err(Error::Invalid("μ must be nonzero".into()));
        }
        Ok(ScalarAlg {
            lambda: mu.recip(),
            mu: Some(mu),
        })
    }

    pub fn lambda_scalar(&self) -> &Rational {
        &self.lambda
    }
}

impl BaseAlgebra for ScalarAlg {
    fn descriptor(&self) -> String {
        match &self.mu {
            Some(mu) => format!("scalar:mu={mu}"),
            None => "scalar:lambda=0".to_string(),
        }
    }

    fn basis_product(&self, i: BasisIndex, j: BasisIndex) -> Result<AlgebraElement> {
        let index = i.max(j);
        if index > 0 {
            return Err(Error::IndexOverflow { index, limit: 1 });
        }
        Ok(AlgebraElement::basis(0))
    }

    fn d_on_basis(&self, i: BasisIndex) -> Result<AlgebraElement> {
        if i > 0 {
            return Err(Error::IndexOverflow { index: i, limit: 1 });
        }
        Ok(AlgebraElement::term(0, self.lambda.clone()))
    }

    fn basis_limit(&self) -> Option<usize> {
        Some(1)
    }

    fn basis_name(&self, _i: BasisIndex) -> String {
        "1".to_string()
    }
}

/// Polynomials in `x` with basis `x^i`, `i ≤ max_degree`.
///
/// The default rule is `d(x^k) = k x^{k-1} + (k+2) x^{k+1}`, the restriction
/// of `D_K` for `K = 1/(x^2+1)`. Individual basis images can be overridden
/// from a rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyAlg {
    max_degree: usize,
    overrides: BTreeMap<usize, AlgebraElement>,
    default_rule: bool,
}

pub const DEFAULT_POLY_DEGREE: usize = 64;

#[derive(Deserialize)]
struct RuleTable {
    max_degree: Option<usize>,
    #[serde(default = "default_true")]
    default_rule: bool,
    #[serde(default)]
    rules: BTreeMap<String, Vec<String>>,
}

fn default_true() -> bool {
    true
}

impl PolyAlg {
    pub fn new(max_degree: usize) -> Self {
        PolyAlg {
            max_degree,
            overrides: BTreeMap::new(),
            default_rule: true,
        }
    }

    /// Replaces `d(x^i)` for the given indices.
    pub fn with_overrides(mut self, overrides: BTreeMap<usize, AlgebraElement>) -> Self {
        self.overrides.extend(overrides);
        self
    }

    /// Reads a rule table of the form
    /// `{"max_degree": 16, "default_rule": true, "rules": {"1": ["0", "1"]}}`
    /// where each rule lists the polynomial coefficients of `d(x^i)`.
    /// Without the default rule, every index used must appear in the table.
    pub fn from_rule_table(json: &str) -> Result<Self> {
        let table: RuleTable =
            serde_json::from_str(json).map_err(|e| Error::Invalid(format!("rule table: {e}")))?;
        let mut overrides = BTreeMap::new();
        for (key, coeffs) in &table.rules {
            let i: usize = key
                .parse()
                .map_err(|_| Error::Invalid(format!("rule key `{key}` is not an index")))?;
            let mut elem = AlgebraElement::zero();
            for (k, c) in coeffs.iter().enumerate() {
                elem.add_term(k, parse_rational(c)?);
            }
            overrides.insert(i, elem);
        }
        Ok(PolyAlg {
            max_degree: table.max_degree.unwrap_or(DEFAULT_POLY_DEGREE),
            overrides,
            default_rule: table.default_rule,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check(&self, index: usize) -> Result<()> {
        if index > self.max_degree {
            return Err(Error::IndexOverflow {
                index,
                limit: self.max_degree + 1,
            });
        }
        Ok(())
    }
}

impl Default for PolyAlg {
    fn default() -> Self {
        Self::new(DEFAULT_POLY_DEGREE)
    }
}

impl BaseAlgebra for PolyAlg {
    fn descriptor(&self) -> String {
        let mut s = "poly".to_string();
        if self.max_degree != DEFAULT_POLY_DEGREE {
            s.push_str(&format!(":max_degree={}", self.max_degree));
        }
        if !self.overrides.is_empty() || !self.default_rule {
            s.push_str(&format!(":custom={:?}", self.overrides));
        }
        s
    }

    fn basis_product(&self, i: BasisIndex, j: BasisIndex) -> Result<AlgebraElement> {
        self.check(i)?;
        self.check(j)?;
        self.check(i + j)?;
        Ok(AlgebraElement::basis(i + j))
    }

    fn d_on_basis(&self, i: BasisIndex) -> Result<AlgebraElement> {
        self.check(i)?;
        if let Some(rule) = self.overrides.get(&i) {
            if let Some(top) = rule.max_index() {
                self.check(top)?;
            }
            return Ok(rule.clone());
        }
        if !self.default_rule {
            return Err(Error::Invalid(format!("no rule for d(x^{i})")));
        }
        self.check(i + 1)?;
        let mut out = AlgebraElement::zero();
        if i > 0 {
            out.add_term(i - 1, Rational::from_integer(i.into()));
        }
        out.add_term(i + 1, Rational::from_integer((i + 2).into()));
        Ok(out)
    }

    fn basis_limit(&self) -> Option<usize> {
        Some(self.max_degree + 1)
    }

    fn generator(&self) -> Option<AlgebraElement> {
        (self.max_degree >= 1).then(|| AlgebraElement::basis(1))
    }

    fn basis_name(&self, i: BasisIndex) -> String {
        monomial_name(i)
    }
}

fn monomial_name(i: usize) -> String {
    match i {
        0 => "1".into(),
        1 => "x".into(),
        _ => format!("x^{i}"),
    }
}

/// Truncated power series `Σ_{i ≤ n} c_i x^i` with `d = D_K`. Products past
/// `x^n` are discarded.
#[derive(Debug, Clone)]
pub struct SeriesAlg {
    kernel_name: String,
    n: usize,
    d_table: Vec<AlgebraElement>,
}

impl SeriesAlg {
    /// Needs the kernel trusted to at least `n + 1`, because `D_K` consumes
    /// one order.
    pub fn new(kernel: &SeparableKernel, kernel_name: &str, n: usize) -> Result<Self> {
        if kernel.ord() < n + 1 {
            return Err(Error::PreconditionViolated(format!(
                "series algebra of order {n} needs a kernel trusted to {}",
                n + 1
            )));
        }
        let mut d_table = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let image = kernel.apply_d(&Series::monomial(Rational::one(), i, kernel.ord()))?;
            let mut elem = AlgebraElement::zero();
            for (k, c) in image.coeffs().iter().enumerate().take(n + 1) {
                elem.add_term(k, c.clone());
            }
            d_table.push(elem);
        }
        Ok(SeriesAlg {
            kernel_name: kernel_name.to_string(),
            n,
            d_table,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }
}

impl BaseAlgebra for SeriesAlg {
    fn descriptor(&self) -> String {
        format!("series:kernel={}:n={}", self.kernel_name, self.n)
    }

    fn basis_product(&self, i: BasisIndex, j: BasisIndex) -> Result<AlgebraElement> {
        let index = i.max(j);
        if index > self.n {
            return Err(Error::IndexOverflow {
                index,
                limit: self.n + 1,
            });
        }
        Ok(if i + j <= self.n {
            AlgebraElement::basis(i + j)
        } else {
            AlgebraElement::zero()
        })
    }

    fn d_on_basis(&self, i: BasisIndex) -> Result<AlgebraElement> {
        self.d_table.get(i).cloned().ok_or(Error::IndexOverflow {
            index: i,
            limit: self.n + 1,
        })
    }

    fn basis_limit(&self) -> Option<usize> {
        Some(self.n + 1)
    }

    fn generator(&self) -> Option<AlgebraElement> {
        (self.n >= 1).then(|| AlgebraElement::basis(1))
    }

    fn basis_name(&self, i: BasisIndex) -> String {
        monomial_name(i)
    }
}

/// Parses `scalar:mu=<p/q>`, `scalar:lambda=<p/q>`, `poly`,
/// `poly:max_degree=<n>`, `poly:rules=<file>` or
/// `series:kernel=<spec>[:n=<order>]`.
pub fn parse_algebra(text: &str) -> Result<Arc<dyn BaseAlgebra>> {
    let text = text.trim();
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "scalar" => {
            if rest.is_empty() {
                return Ok(Arc::new(ScalarAlg::from_mu(Rational::one())?));
            }
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad scalar algebra `{text}`")))?;
            let value = parse_rational(value)?;
            match key {
                "mu" => Ok(Arc::new(ScalarAlg::from_mu(value)?)),
                "lambda" => Ok(Arc::new(ScalarAlg::with_lambda(value))),
                _ => Err(Error::Invalid(format!("unknown scalar parameter `{key}`"))),
            }
        }
        "poly" => {
            if rest.is_empty() {
                return Ok(Arc::new(PolyAlg::default()));
            }
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad poly algebra `{text}`")))?;
            match key {
                "max_degree" => {
                    let n = value
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad max_degree `{value}`")))?;
                    Ok(Arc::new(PolyAlg::new(n)))
                }
                "rules" => {
                    let json = std::fs::read_to_string(value)
                        .map_err(|e| Error::Invalid(format!("cannot read `{value}`: {e}")))?;
                    Ok(Arc::new(PolyAlg::from_rule_table(&json)?))
                }
                _ => Err(Error::Invalid(format!("unknown poly parameter `{key}`"))),
            }
        }
        "series" => {
            let mut kernel = None;
            let mut n = 8usize;
            for part in rest.split(':') {
                if let Some(spec) = part.strip_prefix("kernel=") {
                    kernel = Some(spec.to_string());
                } else if let Some(v) = part.strip_prefix("n=") {
                    n = v
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad series order `{v}`")))?;
                } else if !part.is_empty() {
                    return Err(Error::Invalid(format!("unknown series parameter `{part}`")));
                }
            }
            let name = kernel.unwrap_or_else(|| "exp".to_string());
            let spec = KernelSpec::parse(&name)?;
            let built = spec.build(n + 1)?;
            Ok(Arc::new(SeriesAlg::new(&built, &name, n)?))
        }
        _ => Err(Error::Invalid(format!("unknown algebra `{text}`"))),
    }
}
