//! Seeded random inputs for identity checks.
//!
//! Coefficients are small rationals (numerator in `-3..=3`, denominator in
//! `1..=3`) so exact arithmetic stays cheap at the orders used in checks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::BaseAlgebra;
use crate::tensor::TensorSeries;
use crate::volterra::SeparableKernel;
use crate::{Rational, Series};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// An independent stream for trial `index`, so trials can run in any
    /// order and still see the same inputs.
    pub fn for_trial(seed: u64, index: u64) -> Self {
        let mut s = Self::new(seed);
        s.rng.set_stream(index);
        s
    }

    pub fn rational(&mut self) -> Rational {
        let n: i64 = self.rng.gen_range(-3..=3);
        let d: i64 = self.rng.gen_range(1..=3);
        Rational::new(n.into(), d.into())
    }

    pub fn nonzero_rational(&mut self) -> Rational {
        loop {
            let r = self.rational();
            if r != Rational::from_integer(0.into()) {
                return r;
            }
        }
    }

    /// A series with valuation between 0 and 2, about half its coefficients
    /// nonzero past the leading one.
    pub fn series(&mut self, ord: usize) -> Series {
        let val = self.rng.gen_range(0..=2usize).min(ord);
        let coeffs = (0..=ord).map(|i| {
            if i < val {
                Rational::from_integer(0.into())
            } else if i == val {
                self.nonzero_rational()
            } else if self.rng.gen_bool(0.5) {
                self.rational()
            } else {
                Rational::from_integer(0.into())
            }
        });
        let coeffs: Vec<_> = coeffs.collect();
        Series::from_coeffs(coeffs, ord)
    }

    /// A series with nonzero constant term.
    pub fn unit_series(&mut self, ord: usize) -> Series {
        let mut s = self.series(ord).coeffs().to_vec();
        s[0] = self.nonzero_rational();
        Series::from_coeffs(s, ord)
    }

    /// A kernel `k = c`, `h` a random series with nonzero constant term.
    pub fn constant_k_kernel(&mut self, ord: usize) -> SeparableKernel {
        let c = self.nonzero_rational();
        SeparableKernel::new(Series::constant(c, ord), self.unit_series(ord))
    }

    /// A kernel whose `k` has nonzero constant and linear terms.
    pub fn varying_k_kernel(&mut self, ord: usize) -> SeparableKernel {
        let mut k = self.unit_series(ord).coeffs().to_vec();
        if ord >= 1 {
            k[1] = self.nonzero_rational();
        }
        SeparableKernel::new(Series::from_coeffs(k, ord), self.unit_series(ord))
    }

    /// A random tensor series with up to `terms` words of length
    /// `1..=max_len`, letters below the algebra's basis limit or `max_index`.
    pub fn tensor(
        &mut self,
        algebra: &Arc<dyn BaseAlgebra>,
        order: usize,
        terms: usize,
        max_len: usize,
        max_index: usize,
    ) -> TensorSeries {
        let limit = algebra.basis_limit().map_or(max_index, |l| l.min(max_index + 1) - 1);
        let words: Vec<_> = (0..terms)
            .map(|_| {
                let len = self.rng.gen_range(1..=max_len.min(order).max(1));
                let word: Vec<usize> = (0..len).map(|_| self.rng.gen_range(0..=limit)).collect();
                (word, self.nonzero_rational())
            })
            .collect();
        TensorSeries::from_terms(algebra.clone(), order, words)
    }

    pub fn index(&mut self, upper: usize) -> usize {
        self.rng.gen_range(0..=upper)
    }
}
