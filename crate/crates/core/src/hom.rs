//! The structure map from the free object into series: a word
//! `a_0 ⊗ a_1 ⊗ … ⊗ a_n` goes to the iterated Volterra integral
//! `i(a_0) P_K(i(a_1) P_K(… P_K(i(a_n)) …))`.

use num_traits::One;

use crate::algebra::{AlgebraElement, BaseAlgebra, BasisIndex};
use crate::error::{Error, Result};
use crate::tensor::TensorSeries;
use crate::volterra::SeparableKernel;
use crate::{Rational, Series};

/// How basis elements of the base algebra become series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Embedding {
    /// `e_i ↦ x^i`.
    Monomial,
    /// `e_i ↦ table[i]`.
    Table(Vec<Series>),
}

#[derive(Debug, Clone)]
pub struct StructureMap {
    kernel: SeparableKernel,
    embedding: Embedding,
}

impl StructureMap {
    pub fn new(kernel: SeparableKernel, embedding: Embedding) -> Self {
        StructureMap { kernel, embedding }
    }

    pub fn kernel(&self) -> &SeparableKernel {
        &self.kernel
    }

    /// The image of one basis element, trusted to the kernel's order.
    pub fn embed_basis(&self, i: BasisIndex) -> Result<Series> {
        let ord = self.kernel.ord();
        match &self.embedding {
            Embedding::Monomial => Ok(Series::monomial(Rational::one(), i, ord)),
            Embedding::Table(t) => t
                .get(i)
                .map(|s| s.truncate(ord.min(s.ord())))
                .ok_or(Error::EmbeddingUndefined(i)),
        }
    }

    pub fn embed(&self, a: &AlgebraElement) -> Result<Series> {
        let mut out = Series::zero(self.kernel.ord());
        for (i, c) in a.iter() {
            out = &out + &self.embed_basis(i)?.scale(c);
        }
        Ok(out)
    }

    /// Checks `i(e_a e_b) = i(e_a) i(e_b)` and `i(d(e_a)) = D_K(i(e_a))`
    /// for indices below `bound`, comparing through the orders both sides
    /// trust. Pairs whose product leaves the enumerated basis are skipped.
    pub fn verify_intertwining(&self, alg: &dyn BaseAlgebra, bound: usize) -> Result<bool> {
        let bound = alg.basis_limit().map_or(bound, |l| bound.min(l));
        let cap = alg.basis_limit().map_or(usize::MAX, |l| l - 1);
        let agree = |a: &Series, b: &Series| -> Result<bool> {
            let n = a.ord().min(b.ord()).min(cap);
            a.equal_mod(b, n)
        };
        for i in 0..bound {
            let ei = self.embed_basis(i)?;
            let lhs = self.embed(&alg.alg_d(&AlgebraElement::basis(i))?)?;
            if !agree(&lhs, &self.kernel.apply_d(&ei)?)? {
                return Ok(false);
            }
            for j in 0..bound {
                let product = match alg.basis_product(i, j) {
                    Ok(p) => p,
                    Err(Error::IndexOverflow { .. }) => continue,
                    Err(e) => return Err(e),
                };
                if !agree(&self.embed(&product)?, &(&ei * &self.embed_basis(j)?))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The iterated integral of one word.
    pub fn evaluate_word(&self, word: &[BasisIndex]) -> Result<Series> {
        let (last, init) = word
            .split_last()
            .ok_or_else(|| Error::Invalid("empty word".into()))?;
        let mut acc = self.embed_basis(*last)?;
        for &i in init.iter().rev() {
            acc = &self.embed_basis(i)? * &self.kernel.apply_p(&acc);
        }
        Ok(acc)
    }

    /// Linear extension of [`Self::evaluate_word`]. Words longer than the
    /// tensor order were discarded, and their images have valuation at
    /// least that order, so the result is trusted to one less than the
    /// tensor order (or the kernel's order if lower).
    pub fn evaluate(&self, u: &TensorSeries) -> Result<Series> {
        let ord = self.kernel.ord().min(u.order().saturating_sub(1));
        let mut out = Series::zero(ord);
        for (w, c) in u.terms() {
            out = &out + &self.evaluate_word(w)?.scale(c);
        }
        Ok(out.truncate(ord.min(out.ord())))
    }

    /// `evaluate(u ⋄ v) - evaluate(u) evaluate(v)` through `x^order`.
    pub fn check_homomorphism(&self, u: &TensorSeries, v: &TensorSeries, order: usize) -> Result<Series> {
        let lhs = self.evaluate(&u.diamond(v)?)?;
        let rhs = &self.evaluate(u)? * &self.evaluate(v)?;
        let r = &lhs - &rhs;
        if r.ord() < order {
            return Err(Error::OrderExceeded {
                requested: order,
                trusted: r.ord(),
            });
        }
        Ok(r.truncate(order))
    }
}

/// `2 Σ_{n=1}^{m} (-1)^{n-1} P_K^n(f P_K(f))`, the expansion of `P_K(f)^2`
/// for kernels of weight 1.
pub fn reynolds_square_expansion(kernel: &SeparableKernel, f: &Series, m: usize) -> Result<Series> {
    let weight = kernel.weight()?;
    if weight != Series::one(weight.ord()) {
        return Err(Error::PreconditionViolated(format!(
            "kernel weight is {weight}, not 1"
        )));
    }
    let seed = f * &kernel.apply_p(f);
    let mut term = seed;
    let mut sum = Series::zero(kernel.ord().min(f.ord()));
    for n in 1..=m {
        term = kernel.apply_p(&term);
        let sign = if n % 2 == 1 { 2 } else { -2 };
        sum = &sum + &term.scale(&Rational::from_integer(sign.into()));
    }
    Ok(sum)
}
