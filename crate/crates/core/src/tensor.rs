//! Truncated tensor series over a base algebra: the free differential
//! Reynolds algebra cut off at tensor length `N`.
//!
//! Words are sequences of basis indices. A [`TensorSeries`] stores only
//! words of length at most its order, with nonzero coefficients, so every
//! element has a unique normal form.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, BaseAlgebra, BasisIndex};
use crate::error::{Error, Result};
use crate::{parse_rational, Rational};

pub type Word = Vec<BasisIndex>;

/// Linear combination of words, possibly including the empty word.
pub type WordMap = BTreeMap<Word, Rational>;

fn add_term(map: &mut WordMap, word: Word, c: Rational) {
    if c.is_zero() {
        return;
    }
    match map.entry(word) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn merge(mut a: WordMap, b: WordMap) -> WordMap {
    for (w, c) in b {
        add_term(&mut a, w, c);
    }
    a
}

/// `e ⊗ m`, dropping words longer than `max_len`.
fn prepend(elem: &AlgebraElement, map: &WordMap, max_len: usize) -> WordMap {
    let mut out = WordMap::new();
    for (word, c) in map {
        if word.len() + 1 > max_len {
            continue;
        }
        for (i, a) in elem.iter() {
            let mut w = Vec::with_capacity(word.len() + 1);
            w.push(i);
            w.extend_from_slice(word);
            add_term(&mut out, w, a * c);
        }
    }
    out
}

/// Shuffle recursion on pure words, memoized on `(a, b, max_len)`.
struct Shuffler {
    neg_lambda: AlgebraElement,
    memo: HashMap<(Word, Word, usize), WordMap>,
}

impl Shuffler {
    fn classic() -> Self {
        Shuffler {
            neg_lambda: AlgebraElement::zero(),
            memo: HashMap::new(),
        }
    }

    fn complete(lambda: &AlgebraElement) -> Self {
        Shuffler {
            neg_lambda: lambda.scale(&-Rational::one()),
            memo: HashMap::new(),
        }
    }

    fn shuffle(&mut self, a: &[BasisIndex], b: &[BasisIndex], max_len: usize) -> WordMap {
        if a.len() + b.len() > max_len {
            return WordMap::new();
        }
        if a.is_empty() || b.is_empty() {
            let mut w = a.to_vec();
            w.extend_from_slice(b);
            return WordMap::from([(w, Rational::one())]);
        }
        let key = (a.to_vec(), b.to_vec(), max_len);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let left = self.shuffle(&a[1..], b, max_len - 1);
        let right = self.shuffle(a, &b[1..], max_len - 1);
        let head = merge(
            prepend(&AlgebraElement::basis(a[0]), &left, max_len),
            prepend(&AlgebraElement::basis(b[0]), &right, max_len),
        );
        // S = Σ_k (-λ)^{⊗k} ⊗ head solves S = head - λ ⊗ S
        let mut total = head.clone();
        let mut layer = head;
        while !self.neg_lambda.is_zero() {
            layer = prepend(&self.neg_lambda, &layer, max_len);
            if layer.is_empty() {
                break;
            }
            total = merge(total, layer.clone());
        }
        self.memo.insert(key, total.clone());
        total
    }
}

/// Classic shuffle of two pure words, words longer than `max_len` dropped.
pub fn shuffle_words(a: &[BasisIndex], b: &[BasisIndex], max_len: usize) -> WordMap {
    Shuffler::classic().shuffle(a, b, max_len)
}

/// Complete shuffle of two pure words with weight `lambda`.
pub fn complete_shuffle_words(
    a: &[BasisIndex],
    b: &[BasisIndex],
    lambda: &AlgebraElement,
    max_len: usize,
) -> WordMap {
    Shuffler::complete(lambda).shuffle(a, b, max_len)
}

/// All interleavings of `m` letters from the first word and `n` from the
/// second, as sequences of `(from_first, position)` pairs.
fn unshuffles(m: usize, n: usize) -> Vec<Vec<(bool, usize)>> {
    fn go(i: usize, j: usize, m: usize, n: usize, cur: &mut Vec<(bool, usize)>, out: &mut Vec<Vec<(bool, usize)>>) {
        if i == m && j == n {
            out.push(cur.clone());
            return;
        }
        if i < m {
            cur.push((true, i));
            go(i + 1, j, m, n, cur, out);
            cur.pop();
        }
        if j < n {
            cur.push((false, j));
            go(i, j + 1, m, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, 0, m, n, &mut Vec::new(), &mut out);
    out
}

/// Tuples of `slots` nonnegative integers with sum at most `budget`.
fn insertion_tuples(slots: usize, budget: usize) -> Vec<Vec<usize>> {
    if slots == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=budget {
        for mut rest in insertion_tuples(slots - 1, budget - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Direct enumeration of the complete shuffle of two pure words: a sum over
/// unshuffles σ and insertion tuples `i` with `i_j = 0` past the first
/// position where either word is exhausted. Also returns the number of
/// emitted terms per word length, before like terms are combined.
pub fn complete_shuffle_words_direct(
    a: &[BasisIndex],
    b: &[BasisIndex],
    lambda: &AlgebraElement,
    max_len: usize,
) -> (WordMap, BTreeMap<usize, usize>) {
    let (m, n) = (a.len(), b.len());
    let mut out = WordMap::new();
    let mut counts = BTreeMap::new();
    if m + n > max_len {
        return (out, counts);
    }
    if m == 0 || n == 0 {
        let mut w = a.to_vec();
        w.extend_from_slice(b);
        *counts.entry(w.len()).or_insert(0) += 1;
        out.insert(w, Rational::one());
        return (out, counts);
    }
    let neg_lambda = lambda.scale(&-Rational::one());
    for sigma in unshuffles(m, n) {
        let last_a = sigma.iter().position(|&s| s == (true, m - 1)).unwrap() + 1;
        let last_b = sigma.iter().position(|&s| s == (false, n - 1)).unwrap() + 1;
        let free = last_a.min(last_b);
        let letters: Vec<BasisIndex> = sigma
            .iter()
            .map(|&(first, p)| if first { a[p] } else { b[p] })
            .collect();
        for tuple in insertion_tuples(free, max_len - m - n) {
            let mut partial = WordMap::from([(Vec::new(), Rational::one())]);
            for (j, &letter) in letters.iter().enumerate() {
                for _ in 0..tuple.get(j).copied().unwrap_or(0) {
                    partial = append(&partial, &neg_lambda);
                }
                partial = append(&partial, &AlgebraElement::basis(letter));
            }
            let len = m + n + tuple.iter().sum::<usize>();
            *counts.entry(len).or_insert(0) += 1;
            for (w, c) in partial {
                add_term(&mut out, w, c);
            }
        }
    }
    (out, counts)
}

fn append(map: &WordMap, elem: &AlgebraElement) -> WordMap {
    let mut out = WordMap::new();
    for (word, c) in map {
        for (i, a) in elem.iter() {
            let mut w = word.clone();
            w.push(i);
            add_term(&mut out, w, a * c);
        }
    }
    out
}

/// An element of the free object truncated at tensor length `order`.
#[derive(Clone)]
pub struct TensorSeries {
    terms: WordMap,
    order: usize,
    algebra: Arc<dyn BaseAlgebra>,
}

impl TensorSeries {
    pub fn zero(algebra: Arc<dyn BaseAlgebra>, order: usize) -> Self {
        TensorSeries {
            terms: WordMap::new(),
            order,
            algebra,
        }
    }

    /// Builds a series from words, dropping empty words, words beyond
    /// `order` and zero coefficients.
    pub fn from_terms<I>(algebra: Arc<dyn BaseAlgebra>, order: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Word, Rational)>,
    {
        let mut map = WordMap::new();
        for (w, c) in terms {
            if !w.is_empty() && w.len() <= order {
                add_term(&mut map, w, c);
            }
        }
        TensorSeries {
            terms: map,
            order,
            algebra,
        }
    }

    pub fn word(algebra: Arc<dyn BaseAlgebra>, order: usize, word: Word) -> Self {
        Self::from_terms(algebra, order, [(word, Rational::one())])
    }

    /// The length-1 word of the unit, the multiplicative identity.
    pub fn unit(algebra: Arc<dyn BaseAlgebra>, order: usize) -> Self {
        let unit = algebra.unit();
        Self::element(algebra, order, &unit)
    }

    /// An algebra element as a combination of length-1 words.
    pub fn element(algebra: Arc<dyn BaseAlgebra>, order: usize, elem: &AlgebraElement) -> Self {
        let terms: Vec<_> = elem.iter().map(|(i, c)| (vec![i], c.clone())).collect();
        Self::from_terms(algebra, order, terms)
    }

    /// `λ = d(1)` as an element of length 1.
    pub fn lambda(algebra: Arc<dyn BaseAlgebra>, order: usize) -> Result<Self> {
        let lambda = algebra.lambda()?;
        Ok(Self::element(algebra, order, &lambda))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn algebra(&self) -> &Arc<dyn BaseAlgebra> {
        &self.algebra
    }

    pub fn terms(&self) -> &WordMap {
        &self.terms
    }

    pub fn coeff(&self, word: &[BasisIndex]) -> Rational {
        self.terms.get(word).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Minimal word length; `order + 1` for zero.
    pub fn valuation(&self) -> usize {
        self.terms
            .keys()
            .map(Vec::len)
            .min()
            .unwrap_or(self.order + 1)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self::from_terms(self.algebra.clone(), order, self.terms.clone())
    }

    fn with_terms(&self, order: usize, terms: WordMap) -> Self {
        Self::from_terms(self.algebra.clone(), order, terms)
    }

    fn same_algebra(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.algebra, &other.algebra) {
            return Ok(());
        }
        let (a, b) = (self.algebra.descriptor(), other.algebra.descriptor());
        if a == b {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(a, b))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        let order = self.order.min(other.order);
        Ok(self.with_terms(order, merge(self.terms.clone(), other.terms.clone())))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let terms = self.terms.iter().map(|(w, a)| (w.clone(), a * c)).collect::<Vec<_>>();
        Self::from_terms(self.algebra.clone(), self.order, terms)
    }

    fn pairs<'a>(&'a self, other: &'a Self) -> Vec<(&'a Word, &'a Rational, &'a Word, &'a Rational)> {
        let mut pairs = Vec::new();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                pairs.push((u, a, v, b));
            }
        }
        pairs
    }

    fn shuffle_with(&self, other: &Self, lambda: Option<AlgebraElement>) -> Result<Self> {
        self.same_algebra(other)?;
        let order = self.order.min(other.order);
        let terms = self
            .pairs(other)
            .par_iter()
            .map_init(
                || match &lambda {
                    Some(l) => Shuffler::complete(l),
                    None => Shuffler::classic(),
                },
                |sh, (u, a, v, b)| {
                    let coeff = *a * *b;
                    let mut out = WordMap::new();
                    for (w, c) in sh.shuffle(u, v, order) {
                        add_term(&mut out, w, c * &coeff);
                    }
                    out
                },
            )
            .reduce(WordMap::new, merge);
        Ok(self.with_terms(order, terms))
    }

    /// Bilinear classic shuffle.
    pub fn classic_shuffle(&self, other: &Self) -> Result<Self> {
        self.shuffle_with(other, None)
    }

    /// Bilinear complete shuffle with the algebra's weight.
    pub fn complete_shuffle(&self, other: &Self) -> Result<Self> {
        let lambda = self.algebra.lambda()?;
        self.shuffle_with(other, Some(lambda))
    }

    /// The complete shuffle by direct enumeration over unshuffles and
    /// insertion tuples.
    pub fn complete_shuffle_direct(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        let order = self.order.min(other.order);
        let lambda = self.algebra.lambda()?;
        let mut terms = WordMap::new();
        for (u, a, v, b) in self.pairs(other) {
            let coeff = a * b;
            for (w, c) in complete_shuffle_words_direct(u, v, &lambda, order).0 {
                add_term(&mut terms, w, c * &coeff);
            }
        }
        Ok(self.with_terms(order, terms))
    }

    /// `(a_0 ⊗ a') ⋄ (b_0 ⊗ b') = a_0 b_0 ⊗ (a' ш̂ b')`.
    pub fn diamond(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        let order = self.order.min(other.order);
        let alg = &self.algebra;
        let lambda = alg.lambda()?;
        let partials = self
            .pairs(other)
            .par_iter()
            .map_init(
                || Shuffler::complete(&lambda),
                |sh, (u, a, v, b)| -> Result<WordMap> {
                    let head = alg.alg_mul(&AlgebraElement::basis(u[0]), &AlgebraElement::basis(v[0]))?;
                    let tail = sh.shuffle(&u[1..], &v[1..], order - 1);
                    let coeff = *a * *b;
                    Ok(prepend(&head.scale(&coeff), &tail, order))
                },
            )
            .collect::<Result<Vec<_>>>()?;
        let terms = partials.into_iter().fold(WordMap::new(), merge);
        Ok(self.with_terms(order, terms))
    }

    /// `u ↦ 1 ⊗ u`. The result is exact to one more order than the input.
    pub fn reynolds_p(&self) -> Self {
        let unit = self.algebra.unit();
        let order = self.order + 1;
        self.with_terms(order, prepend(&unit, &self.terms, order))
    }

    /// `D(a_0 ⊗ a') = d(a_0) ⊗ a' + a_0 a_1 ⊗ a'' - λ a_0 ⊗ a'`, with
    /// `D(a_0) = d(a_0)`. The result is trusted to one order less.
    pub fn deriv_d(&self) -> Result<Self> {
        let alg = &self.algebra;
        let lambda = alg.lambda()?;
        let order = self.order.saturating_sub(1);
        let mut terms = WordMap::new();
        for (word, c) in &self.terms {
            let a0 = AlgebraElement::basis(word[0]);
            let rest = WordMap::from([(word[1..].to_vec(), c.clone())]);
            if word.len() == 1 {
                for (i, a) in alg.alg_d(&a0)?.iter() {
                    add_term(&mut terms, vec![i], a * c);
                }
                continue;
            }
            let first = alg.alg_d(&a0)?.sub(&alg.alg_mul(&lambda, &a0)?);
            terms = merge(terms, prepend(&first, &rest, order));
            let merged = alg.alg_mul(&a0, &AlgebraElement::basis(word[1]))?;
            let tail = WordMap::from([(word[2..].to_vec(), c.clone())]);
            terms = merge(terms, prepend(&merged, &tail, order));
        }
        Ok(self.with_terms(order, terms))
    }

    /// `x ⋆ y = P(x) y + x P(y) - P(x) λ P(y)`, so that
    /// `P(x) P(y) = P(x ⋆ y)`.
    pub fn star(&self, other: &Self) -> Result<Self> {
        let order = self.order.min(other.order);
        let px = self.reynolds_p();
        let py = other.reynolds_p();
        let lambda = Self::lambda(self.algebra.clone(), order)?;
        let a = px.diamond(other)?;
        let b = self.diamond(&py)?;
        let c = px.diamond(&lambda)?.diamond(&py)?;
        a.add(&b)?.sub(&c)
    }

    /// `u ↦ u + 2λ ⊗ u`.
    pub fn q_lambda(&self) -> Result<Self> {
        let two_lambda = self.algebra.lambda()?.scale(&Rational::from_integer(2.into()));
        let shifted = prepend(&two_lambda, &self.terms, self.order);
        Ok(self.with_terms(self.order, merge(self.terms.clone(), shifted)))
    }

    /// `u ↦ u + Σ_{r ≥ 1} (-2λ)^{⊗r} ⊗ u`, the inverse of [`Self::q_lambda`].
    pub fn q_lambda_inv(&self) -> Result<Self> {
        let neg = self.algebra.lambda()?.scale(&Rational::from_integer((-2).into()));
        let mut total = self.terms.clone();
        let mut layer = self.terms.clone();
        while !neg.is_zero() {
            layer = prepend(&neg, &layer, self.order);
            if layer.is_empty() {
                break;
            }
            total = merge(total, layer.clone());
        }
        Ok(self.with_terms(self.order, total))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("tensor JSON is always serializable")
    }

    fn to_doc(&self) -> TensorDoc {
        TensorDoc {
            header: Header {
                order: self.order,
                algebra: self.algebra.descriptor(),
            },
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermDoc {
                    word: w.clone(),
                    coeff: c.to_string(),
                })
                .collect(),
        }
    }

    /// Reads the JSON form; the header's algebra descriptor must match
    /// `algebra`.
    pub fn from_json(text: &str, algebra: Arc<dyn BaseAlgebra>) -> Result<Self> {
        let doc: TensorDoc =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("tensor JSON: {e}")))?;
        if doc.header.algebra != algebra.descriptor() {
            return Err(Error::AlgebraMismatch(doc.header.algebra, algebra.descriptor()));
        }
        let mut terms = Vec::new();
        for t in doc.terms {
            if t.word.is_empty() || t.word.len() > doc.header.order {
                return Err(Error::Invalid(format!(
                    "word {:?} does not fit order {}",
                    t.word, doc.header.order
                )));
            }
            terms.push((t.word, parse_rational(&t.coeff)?));
        }
        Ok(Self::from_terms(algebra, doc.header.order, terms))
    }
}

impl PartialEq for TensorSeries {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.terms == other.terms
            && self.algebra.descriptor() == other.algebra.descriptor()
    }
}

impl fmt::Debug for TensorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorSeries[{}; N={}](", self.algebra.descriptor(), self.order)?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for TensorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (word, c)) in self.terms.iter().enumerate() {
            let names: Vec<String> = word.iter().map(|&i| self.algebra.basis_name(i)).collect();
            let sep = if k == 0 { "" } else { " + " };
            if c.is_one() {
                write!(f, "{sep}{}", names.join("⊗"))?;
            } else {
                write!(f, "{sep}({c})·{}", names.join("⊗"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TensorDoc {
    header: Header,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    order: usize,
    algebra: String,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    word: Word,
    coeff: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PolyAlg, ScalarAlg};
    use crate::rat;

    fn scalar(mu: Rational) -> Arc<dyn BaseAlgebra> {
        Arc::new(ScalarAlg::from_mu(mu).unwrap())
    }

    fn poly() -> Arc<dyn BaseAlgebra> {
        Arc::new(PolyAlg::default())
    }

    fn flat() -> Arc<dyn BaseAlgebra> {
        Arc::new(ScalarAlg::with_lambda(rat(0, 1)))
    }

    #[test]
    fn classic_shuffle_examples() {
        let s = shuffle_words(&[1], &[2], 8);
        assert_eq!(s, WordMap::from([(vec![1, 2], rat(1, 1)), (vec![2, 1], rat(1, 1))]));
        let s = shuffle_words(&[7], &[1, 2], 8);
        assert_eq!(s.len(), 3);
        for w in [vec![7, 1, 2], vec![1, 7, 2], vec![1, 2, 7]] {
            assert_eq!(s[&w], rat(1, 1));
        }
        assert_eq!(shuffle_words(&[1, 2], &[3, 4], 8).len(), 6);
        assert!(shuffle_words(&[1, 2], &[3, 4], 3).is_empty());
    }

    #[test]
    fn complete_shuffle_is_classic_without_weight() {
        let zero = AlgebraElement::zero();
        for (a, b) in [(vec![1], vec![2]), (vec![1, 2], vec![3]), (vec![1, 2], vec![3, 4])] {
            assert_eq!(complete_shuffle_words(&a, &b, &zero, 8), shuffle_words(&a, &b, 8));
            assert_eq!(complete_shuffle_words_direct(&a, &b, &zero, 8).0, shuffle_words(&a, &b, 8));
        }
    }

    #[test]
    fn complete_shuffle_of_letters() {
        // λ = 2x in the polynomial algebra, letters a = x^3, b = x^4
        let lambda = AlgebraElement::term(1, rat(2, 1));
        let n = 6;
        let s = complete_shuffle_words(&[3], &[4], &lambda, n);
        let mut expected = WordMap::new();
        for k in 0..=n - 2 {
            let c = rat(-2, 1).pow(k as i32);
            for tail in [[3, 4], [4, 3]] {
                let mut w = vec![1; k];
                w.extend(tail);
                expected.insert(w, c.clone());
            }
        }
        assert_eq!(s, expected);
    }

    /// The m = n = 2 expansion written out as two double sums over the
    /// unshuffles where one word finishes first in position 2, and four
    /// triple sums for the interleaved ones.
    #[test]
    fn complete_shuffle_matches_two_by_two_display() {
        let lambda = AlgebraElement::term(1, rat(2, 1));
        let (a1, a2, b1, b2) = (2, 3, 4, 5);
        let n = 6;
        let mut expected = WordMap::new();
        let neg = rat(-2, 1);
        let mut emit = |pattern: &[(usize, Option<usize>)]| {
            // pattern: each letter with an optional insertion slot index
            let slots = pattern.iter().filter(|p| p.1.is_some()).count();
            for tuple in insertion_tuples(slots, n - 4) {
                let mut w = Vec::new();
                let mut c = rat(1, 1);
                for &(letter, slot) in pattern {
                    if let Some(s) = slot {
                        for _ in 0..tuple[s] {
                            w.push(1);
                            c *= &neg;
                        }
                    }
                    w.push(letter);
                }
                add_term(&mut expected, w, c);
            }
        };
        emit(&[(a1, Some(0)), (a2, Some(1)), (b1, None), (b2, None)]);
        emit(&[(b1, Some(0)), (b2, Some(1)), (a1, None), (a2, None)]);
        emit(&[(a1, Some(0)), (b1, Some(1)), (a2, Some(2)), (b2, None)]);
        emit(&[(a1, Some(0)), (b1, Some(1)), (b2, Some(2)), (a2, None)]);
        emit(&[(b1, Some(0)), (a1, Some(1)), (a2, Some(2)), (b2, None)]);
        emit(&[(b1, Some(0)), (a1, Some(1)), (b2, Some(2)), (a2, None)]);
        assert_eq!(complete_shuffle_words(&[a1, a2], &[b1, b2], &lambda, n), expected);
    }

    #[test]
    fn direct_counts_collapse_on_scalar_basis() {
        let lambda = AlgebraElement::term(0, rat(1, 1));
        let (map, counts) = complete_shuffle_words_direct(&[0], &[0], &lambda, 7);
        for r in 2..=7 {
            assert_eq!(counts[&r], 2);
            assert_eq!(map[&vec![0; r]], rat(2, 1) * rat(-1, 1).pow(r as i32 - 2));
        }
        assert_eq!(map.len(), 6);
    }

    #[test]
    fn recursive_agrees_with_direct_small() {
        let lambda = AlgebraElement::term(1, rat(2, 1));
        for a in [vec![0], vec![1, 2], vec![2, 0, 1]] {
            for b in [vec![1], vec![0, 2], vec![1, 1, 2]] {
                assert_eq!(
                    complete_shuffle_words(&a, &b, &lambda, 8),
                    complete_shuffle_words_direct(&a, &b, &lambda, 8).0
                );
            }
        }
    }

    #[test]
    fn diamond_of_letters_is_algebra_product() {
        let alg = poly();
        let a = TensorSeries::word(alg.clone(), 6, vec![2]);
        let b = TensorSeries::word(alg.clone(), 6, vec![3]);
        assert_eq!(a.diamond(&b).unwrap(), TensorSeries::word(alg.clone(), 6, vec![5]));
        let u = TensorSeries::from_terms(alg.clone(), 6, [(vec![1, 2], rat(3, 1)), (vec![0], rat(1, 2))]);
        let one = TensorSeries::unit(alg, 6);
        assert_eq!(one.diamond(&u).unwrap(), u);
        assert_eq!(u.diamond(&one).unwrap(), u);
    }

    #[test]
    fn reynolds_p_prepends_unit() {
        let alg = poly();
        let w = TensorSeries::word(alg.clone(), 4, vec![2, 1]);
        let p = w.reynolds_p();
        assert_eq!(p.order(), 5);
        assert_eq!(p, TensorSeries::word(alg.clone(), 5, vec![0, 2, 1]));
        assert_eq!(p.valuation(), w.valuation() + 1);
        assert!(TensorSeries::zero(alg, 4).reynolds_p().is_zero());
    }

    #[test]
    fn deriv_d_examples() {
        let alg = scalar(rat(1, 1));
        let w = TensorSeries::word(alg.clone(), 4, vec![0, 0]);
        assert_eq!(w.deriv_d().unwrap(), TensorSeries::word(alg.clone(), 3, vec![0]));

        let p = poly();
        let x = TensorSeries::word(p.clone(), 4, vec![1]);
        let expected = TensorSeries::from_terms(p.clone(), 3, [(vec![0], rat(1, 1)), (vec![2], rat(3, 1))]);
        assert_eq!(x.deriv_d().unwrap(), expected);

        let u = TensorSeries::from_terms(p, 5, [(vec![1, 2, 0], rat(2, 3)), (vec![3], rat(-1, 1))]);
        assert_eq!(u.reynolds_p().deriv_d().unwrap(), u);
    }

    #[test]
    fn star_gives_reynolds_product() {
        for alg in [scalar(rat(2, 3)), poly(), flat()] {
            let x = TensorSeries::from_terms(alg.clone(), 5, [(vec![0], rat(1, 1)), (vec![0, 0], rat(-2, 1))]);
            let y = TensorSeries::from_terms(alg.clone(), 5, [(vec![0, 0], rat(1, 3))]);
            let lhs = x.reynolds_p().diamond(&y.reynolds_p()).unwrap();
            let rhs = x.star(&y).unwrap().reynolds_p();
            assert_eq!(lhs, rhs);
        }
        let alg = flat();
        let x = TensorSeries::word(alg.clone(), 5, vec![0]);
        let y = TensorSeries::word(alg.clone(), 5, vec![0, 0]);
        let expected = x.reynolds_p().diamond(&y).unwrap().add(&x.diamond(&y.reynolds_p()).unwrap()).unwrap();
        assert_eq!(x.star(&y).unwrap(), expected);
    }

    #[test]
    fn q_lambda_examples() {
        let alg = poly();
        let w = TensorSeries::word(alg.clone(), 5, vec![3, 2]);
        let q = w.q_lambda().unwrap();
        let expected = TensorSeries::from_terms(alg.clone(), 5, [(vec![3, 2], rat(1, 1)), (vec![1, 3, 2], rat(4, 1))]);
        assert_eq!(q, expected);
        assert_eq!(q.q_lambda_inv().unwrap(), w);
        assert_eq!(w.q_lambda_inv().unwrap().q_lambda().unwrap(), w);

        let f = flat();
        let w = TensorSeries::word(f, 5, vec![0, 0]);
        assert_eq!(w.q_lambda().unwrap(), w);
        assert_eq!(w.q_lambda_inv().unwrap(), w);
    }

    #[test]
    fn valuation_of_zero() {
        assert_eq!(TensorSeries::zero(poly(), 6).valuation(), 7);
    }

    #[test]
    fn json_round_trip() {
        let alg = poly();
        let u = TensorSeries::from_terms(alg.clone(), 4, [(vec![1, 0], rat(-3, 2)), (vec![2], rat(1, 1))]);
        let text = u.to_json();
        assert_eq!(
            text,
            r#"{"header":{"order":4,"algebra":"poly"},"terms":[{"word":[1,0],"coeff":"-3/2"},{"word":[2],"coeff":"1"}]}"#
        );
        assert_eq!(TensorSeries::from_json(&text, alg).unwrap(), u);
        assert!(matches!(
            TensorSeries::from_json(&text, scalar(rat(1, 1))),
            Err(Error::AlgebraMismatch(..))
        ));
    }

    #[test]
    fn mismatched_algebras() {
        let a = TensorSeries::unit(poly(), 4);
        let b = TensorSeries::unit(scalar(rat(1, 1)), 4);
        assert!(matches!(a.diamond(&b), Err(Error::AlgebraMismatch(..))));
        assert!(matches!(a.complete_shuffle(&b), Err(Error::AlgebraMismatch(..))));
    }

    #[test]
    fn display() {
        let alg = poly();
        let u = TensorSeries::from_terms(alg, 4, [(vec![1, 0], rat(-3, 2)), (vec![2], rat(1, 1))]);
        assert_eq!(u.to_string(), "(-3/2)·x⊗1 + x^2");
    }
}
