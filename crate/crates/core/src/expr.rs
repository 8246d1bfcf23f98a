//! Operator expressions: parsing, printing, evaluation in any
//! [`OperatedModel`], and expansion of products of `P` into nested `P`
//! words by the Reynolds rule.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ("^" nat)?
//! atom   := rational | "x" | ident | "lambda" | "P(" expr ")" | "D(" expr ")"
//!         | "inv(" expr ")" | "exp(" expr ")" | "(" expr ")"
//! rational := "-"? int ("/" nat)?
//! ident  := [a-z][a-z0-9]*
//! ```
//!
//! `inv` and `exp` only make sense on plain series; they exist so kernels
//! can be written as `k=inv(1+x^2)` or `h=exp(x)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::identities::{OperatedModel, SeriesModel};
use crate::{Rational, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Inv,
    Exp,
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Func::Inv => "inv",
            Func::Exp => "exp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Rational(Rational),
    X,
    Symbol(String),
    Lambda,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    P(Box<Expr>),
    D(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Rational(Rational::from_integer(n.into()))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Symbol(name.to_string())
    }

    pub fn p(e: Expr) -> Expr {
        Expr::P(Box::new(e))
    }

    pub fn d(e: Expr) -> Expr {
        Expr::D(Box::new(e))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: u32) -> Expr {
        Expr::Pow(Box::new(a), n)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }

    /// Symbols appearing in the expression, sorted and deduplicated.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            Expr::Symbol(s) => out.push(s.clone()),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Expr::Pow(a, _) | Expr::P(a) | Expr::D(a) | Expr::Call(_, a) => a.collect_symbols(out),
            Expr::Rational(_) | Expr::X | Expr::Lambda => {}
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool| {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Rational(r) => write!(f, "{r}"),
            Expr::X => write!(f, "x"),
            Expr::Symbol(s) => write!(f, "{s}"),
            Expr::Lambda => write!(f, "lambda"),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { "+" } else { "-" };
                wrap(f, a, a.precedence() < 1)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.precedence() <= 1)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, a.precedence() < 2)?;
                write!(f, "*")?;
                wrap(f, b, b.precedence() <= 2)
            }
            Expr::Pow(a, n) => {
                wrap(f, a, a.precedence() < 4)?;
                write!(f, "^{n}")
            }
            Expr::P(a) => write!(f, "P({a})"),
            Expr::D(a) => write!(f, "D({a})"),
            Expr::Call(func, a) => write!(f, "{func}({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Punct(char),
    End,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

const ATOM_START: [&str; 8] = ["integer", "-", "x", "lambda", "identifier", "P(", "D(", "("];

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token and its offset, without consuming it.
    fn peek(&mut self) -> (Tok, usize, usize) {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let Some(c) = rest.chars().next() else {
            return (Tok::End, start, start);
        };
        if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let n: BigInt = rest[..len].parse().expect("digits parse");
            return (Tok::Int(n), start, start + len);
        }
        if c.is_ascii_alphabetic() {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_lowercase() || ch.is_ascii_digit()))
                .unwrap_or(rest.len());
            let len = if c.is_ascii_uppercase() { 1 } else { len };
            return (Tok::Ident(rest[..len].to_string()), start, start + len);
        }
        (Tok::Punct(c), start, start + c.len_utf8())
    }

    fn error<T>(&self, offset: usize, expected: &[&str]) -> Result<T> {
        Err(Error::Syntax {
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect_punct(&mut self, ch: char) -> Result<()> {
        let (tok, start, end) = self.peek();
        if tok == Tok::Punct(ch) {
            self.pos = end;
            Ok(())
        } else {
            self.error(start, &[&ch.to_string()])
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let (tok, _, end) = self.peek();
            match tok {
                Tok::Punct('+') => {
                    self.pos = end;
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Punct('-') => {
                    self.pos = end;
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let (tok, _, end) = self.peek();
            if tok != Tok::Punct('*') {
                return Ok(lhs);
            }
            self.pos = end;
            lhs = Expr::mul(lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        let (tok, _, end) = self.peek();
        if tok != Tok::Punct('^') {
            return Ok(base);
        }
        self.pos = end;
        let (tok, start, end) = self.peek();
        match tok {
            Tok::Int(n) => {
                let n: u32 = n.try_into().or_else(|_| self.error(start, &["exponent below 2^32"]))?;
                self.pos = end;
                Ok(Expr::pow(base, n))
            }
            _ => self.error(start, &["natural number"]),
        }
    }

    fn rational(&mut self, numer: BigInt) -> Result<Expr> {
        let (tok, _, end) = self.peek();
        if tok != Tok::Punct('/') {
            return Ok(Expr::Rational(Rational::from_integer(numer)));
        }
        self.pos = end;
        let (tok, start, end) = self.peek();
        match tok {
            Tok::Int(d) if !d.is_zero() => {
                self.pos = end;
                Ok(Expr::Rational(Rational::new(numer, d)))
            }
            _ => self.error(start, &["nonzero natural number"]),
        }
    }

    fn parenthesized(&mut self) -> Result<Expr> {
        self.expect_punct('(')?;
        let inner = self.expr()?;
        self.expect_punct(')')?;
        Ok(inner)
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, start, end) = self.peek();
        match tok {
            Tok::Int(n) => {
                self.pos = end;
                self.rational(n)
            }
            Tok::Punct('-') => {
                self.pos = end;
                let (tok, start, end) = self.peek();
                match tok {
                    Tok::Int(n) => {
                        self.pos = end;
                        self.rational(-n)
                    }
                    _ => self.error(start, &["integer"]),
                }
            }
            Tok::Punct('(') => self.parenthesized(),
            Tok::Ident(name) => {
                self.pos = end;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "lambda" => Ok(Expr::Lambda),
                    "P" => Ok(Expr::p(self.parenthesized()?)),
                    "D" => Ok(Expr::d(self.parenthesized()?)),
                    "inv" | "exp" if self.peek().0 == Tok::Punct('(') => {
                        let func = if name == "inv" { Func::Inv } else { Func::Exp };
                        Ok(Expr::Call(func, Box::new(self.parenthesized()?)))
                    }
                    _ if name.starts_with(|c: char| c.is_ascii_lowercase()) => Ok(Expr::Symbol(name)),
                    _ => self.error(start, &ATOM_START),
                }
            }
            _ => self.error(start, &ATOM_START),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut parser = Parser { text, pos: 0 };
    let e = parser.expr()?;
    let (tok, start, _) = parser.peek();
    if tok != Tok::End {
        return parser.error(start, &["+", "-", "*", "^", "end of input"]);
    }
    Ok(e)
}

/// Evaluates `e` bottom-up in `model`, with symbols taken from `bindings`.
pub fn eval<M: OperatedModel>(
    e: &Expr,
    model: &M,
    bindings: &BTreeMap<String, M::Elem>,
) -> Result<M::Elem> {
    let go = |e: &Expr| eval(e, model, bindings);
    match e {
        Expr::Rational(r) => Ok(model.constant(r)),
        Expr::X => model.x(),
        Expr::Symbol(s) => bindings
            .get(s)
            .cloned()
            .ok_or_else(|| Error::UnboundSymbol(s.clone())),
        Expr::Lambda => model.lambda(),
        Expr::Add(a, b) => model.add(&go(a)?, &go(b)?),
        Expr::Sub(a, b) => model.sub(&go(a)?, &go(b)?),
        Expr::Mul(a, b) => model.mul(&go(a)?, &go(b)?),
        Expr::Pow(a, n) => {
            let base = go(a)?;
            let mut acc = model.one();
            for _ in 0..*n {
                acc = model.mul(&acc, &base)?;
            }
            Ok(acc)
        }
        Expr::P(a) => model.p(&go(a)?),
        Expr::D(a) => model.d(&go(a)?),
        Expr::Call(f, a) => model.call(*f, &go(a)?),
    }
}

/// Evaluates an operator-free expression in `x` as a series trusted to `ord`.
pub fn eval_plain_series(e: &Expr, ord: usize) -> Result<Series> {
    eval(e, &SeriesModel::new(ord), &BTreeMap::new())
}

/// One factor of a monomial: an atom or `P` applied to a monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Atom(String),
    P(Monomial),
}

/// A commutative product of factors, kept sorted. The empty monomial is 1.
pub type Monomial = Vec<Factor>;

fn monomial_weight(m: &Monomial) -> usize {
    m.iter()
        .map(|f| match f {
            Factor::Atom(_) => 0,
            Factor::P(inner) => 1 + monomial_weight(inner),
        })
        .sum()
}

fn times(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: Monomial = a.iter().chain(b).cloned().collect();
    out.sort();
    out
}

type Poly = BTreeMap<Monomial, Rational>;

fn poly_add(map: &mut Poly, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    let entry = map.entry(m.clone()).or_insert_with(Rational::zero);
    *entry += c;
    if entry.is_zero() {
        map.remove(&m);
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            poly_add(&mut out, times(ma, mb), ca * cb);
        }
    }
    out
}

/// A linear combination of nested-`P` monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    terms: Poly,
    lambda_is_one: bool,
}

impl Expansion {
    /// Reads `e` as a linear combination of monomials without rewriting.
    pub fn linearize(e: &Expr, lambda_is_one: bool) -> Result<Self> {
        Ok(Expansion {
            terms: to_poly(e, lambda_is_one)?,
            lambda_is_one,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Terms grouped by `P`-weight, the number of `P`s counted with nesting.
    pub fn by_weight(&self) -> BTreeMap<usize, Vec<(Monomial, Rational)>> {
        let mut out: BTreeMap<usize, Vec<_>> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(monomial_weight(m)).or_default().push((m.clone(), c.clone()));
        }
        out
    }

    /// The expansion as an expression, terms in order of weight.
    pub fn to_expr(&self) -> Expr {
        let mut sum: Option<Expr> = None;
        for terms in self.by_weight().into_values() {
            for (m, c) in terms {
                let body = monomial_expr(&m);
                let negative = c.is_negative();
                let mag = c.abs();
                let term = match (mag.is_one(), body) {
                    (true, None) => Expr::Rational(mag),
                    (true, Some(b)) => b,
                    (false, None) => Expr::Rational(mag),
                    (false, Some(b)) => Expr::mul(Expr::Rational(mag), b),
                };
                sum = Some(match (sum, negative) {
                    (None, false) => term,
                    (None, true) => neg_term(term),
                    (Some(s), false) => Expr::add(s, term),
                    (Some(s), true) => Expr::sub(s, term),
                });
            }
        }
        sum.unwrap_or_else(|| Expr::int(0))
    }
}

fn neg_term(term: Expr) -> Expr {
    match term {
        Expr::Rational(r) => Expr::Rational(-r),
        Expr::Mul(a, b) => match *a {
            Expr::Rational(r) => Expr::mul(Expr::Rational(-r), *b),
            other => Expr::mul(Expr::int(-1), Expr::mul(other, *b)),
        },
        other => Expr::mul(Expr::int(-1), other),
    }
}

/// A monomial as an expression; the empty monomial is `1`.
pub fn monomial_to_expr(m: &Monomial) -> Expr {
    monomial_expr(m).unwrap_or_else(|| Expr::int(1))
}

fn monomial_expr(m: &Monomial) -> Option<Expr> {
    m.iter()
        .map(|f| match f {
            Factor::Atom(name) => match name.as_str() {
                "x" => Expr::X,
                "lambda" => Expr::Lambda,
                _ => Expr::sym(name),
            },
            Factor::P(inner) => Expr::p(monomial_expr(inner).unwrap_or_else(|| Expr::int(1))),
        })
        .reduce(Expr::mul)
}

impl fmt::Display for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

fn to_poly(e: &Expr, lambda_is_one: bool) -> Result<Poly> {
    let go = |e: &Expr| to_poly(e, lambda_is_one);
    let atom = |name: &str| Poly::from([(vec![Factor::Atom(name.to_string())], Rational::one())]);
    Ok(match e {
        Expr::Rational(r) => {
            let mut p = Poly::new();
            poly_add(&mut p, Vec::new(), r.clone());
            p
        }
        Expr::X => atom("x"),
        Expr::Symbol(s) => atom(s),
        Expr::Lambda if lambda_is_one => Poly::from([(Vec::new(), Rational::one())]),
        Expr::Lambda => atom("lambda"),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let mut out = go(a)?;
            let sign = if matches!(e, Expr::Add(..)) { Rational::one() } else { -Rational::one() };
            for (m, c) in go(b)? {
                poly_add(&mut out, m, c * &sign);
            }
            out
        }
        Expr::Mul(a, b) => poly_mul(&go(a)?, &go(b)?),
        Expr::Pow(a, n) => {
            let base = go(a)?;
            let mut acc = Poly::from([(Vec::new(), Rational::one())]);
            for _ in 0..*n {
                acc = poly_mul(&acc, &base);
            }
            acc
        }
        Expr::P(a) => go(a)?
            .into_iter()
            .map(|(m, c)| (vec![Factor::P(m)], c))
            .collect(),
        Expr::D(_) => return Err(Error::UnsupportedNode("D".into())),
        Expr::Call(f, _) => return Err(Error::UnsupportedNode(f.to_string())),
    })
}

struct Rewriter {
    lambda_is_one: bool,
    memo: HashMap<(Monomial, usize), Poly>,
}

impl Rewriter {
    /// Normal form of `m` keeping only terms of weight at most `budget`.
    fn normalize(&mut self, m: &Monomial, budget: usize) -> Poly {
        let weight = monomial_weight(m);
        if weight > budget {
            return Poly::new();
        }
        let key = (m.clone(), budget);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let atoms: Monomial = m.iter().filter(|f| matches!(f, Factor::Atom(_))).cloned().collect();
        let ps: Vec<&Monomial> = m
            .iter()
            .filter_map(|f| match f {
                Factor::P(inner) => Some(inner),
                Factor::Atom(_) => None,
            })
            .collect();
        let result = match ps.len() {
            0 => Poly::from([(m.clone(), Rational::one())]),
            1 => {
                let mut out = Poly::new();
                for (inner, c) in self.normalize(ps[0], budget - 1) {
                    poly_add(&mut out, times(&atoms, &vec![Factor::P(inner)]), c);
                }
                out
            }
            _ => {
                // innermost first: normalize the two leftmost P arguments,
                // then rewrite P(a)P(b) = P(P(a)b) + P(aP(b)) - P(P(a)λP(b))
                let rest: Monomial = atoms
                    .iter()
                    .cloned()
                    .chain(ps[2..].iter().map(|inner| Factor::P((*inner).clone())))
                    .collect();
                let rest_weight = monomial_weight(&rest);
                let w1 = monomial_weight(ps[1]);
                let w0 = monomial_weight(ps[0]);
                let a_terms = self.normalize(ps[0], budget - rest_weight - w1 - 2);
                let b_terms = self.normalize(ps[1], budget - rest_weight - w0 - 2);
                let lambda: Monomial = if self.lambda_is_one {
                    Vec::new()
                } else {
                    vec![Factor::Atom("lambda".into())]
                };
                let mut out = Poly::new();
                for (a, ca) in &a_terms {
                    for (b, cb) in &b_terms {
                        let c = ca * cb;
                        let pa = vec![Factor::P(a.clone())];
                        let pb = vec![Factor::P(b.clone())];
                        let candidates = [
                            (times(&pa, b), c.clone()),
                            (times(a, &pb), c.clone()),
                            (times(&times(&pa, &lambda), &pb), -c.clone()),
                        ];
                        for (inner, coeff) in candidates {
                            let whole = times(&rest, &vec![Factor::P(inner)]);
                            for (nm, nc) in self.normalize(&whole, budget) {
                                poly_add(&mut out, nm, nc * &coeff);
                            }
                        }
                    }
                }
                out
            }
        };
        self.memo.insert(key, result.clone());
        result
    }
}

/// Rewrites every product of two `P` terms by
/// `P(a)P(b) ↦ P(P(a)b) + P(aP(b)) - P(P(a)λP(b))` until none is left,
/// dropping terms whose `P`-weight exceeds `order + 1`. Each `P` raises
/// valuation by at least one in the series models, so the dropped terms
/// vanish modulo `x^{order+1}`.
///
/// With `lambda_is_one` the weight is elided; otherwise `lambda` stays an
/// atom. `D` and function calls are rejected.
pub fn reynolds_expand(e: &Expr, order: usize, lambda_is_one: bool) -> Result<Expansion> {
    let poly = to_poly(e, lambda_is_one)?;
    let mut rw = Rewriter {
        lambda_is_one,
        memo: HashMap::new(),
    };
    let mut out = Poly::new();
    for (m, c) in poly {
        for (nm, nc) in rw.normalize(&m, order + 1) {
            poly_add(&mut out, nm, nc * &c);
        }
    }
    Ok(Expansion {
        terms: out,
        lambda_is_one,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::volterra::SeparableKernel;

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("P(f)*P(f)").unwrap(),
            Expr::mul(Expr::p(Expr::sym("f")), Expr::p(Expr::sym("f")))
        );
        assert_eq!(parse("D(1)").unwrap(), Expr::d(Expr::int(1)));
        let srb = parse("P(f*P(g)) + P(P(f)*g) - P(lambda*P(f)*P(g))").unwrap();
        let f = || Expr::sym("f");
        let g = || Expr::sym("g");
        let expected = Expr::sub(
            Expr::add(
                Expr::p(Expr::mul(f(), Expr::p(g()))),
                Expr::p(Expr::mul(Expr::p(f()), g())),
            ),
            Expr::p(Expr::mul(Expr::mul(Expr::Lambda, Expr::p(f())), Expr::p(g()))),
        );
        assert_eq!(srb, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("a - b - c").unwrap(),
            Expr::sub(Expr::sub(Expr::sym("a"), Expr::sym("b")), Expr::sym("c"))
        );
        assert_eq!(
            parse("a + b * c ^ 2").unwrap(),
            Expr::add(Expr::sym("a"), Expr::mul(Expr::sym("b"), Expr::pow(Expr::sym("c"), 2)))
        );
        assert_eq!(parse(" 3 / 6 ").unwrap(), Expr::Rational(rat(1, 2)));
        assert_eq!(parse("-3/2").unwrap(), Expr::Rational(rat(-3, 2)));
        assert_eq!(parse("inv(1+x)").unwrap(), Expr::Call(Func::Inv, Box::new(Expr::add(Expr::int(1), Expr::X))));
        assert_eq!(parse("exp").unwrap(), Expr::sym("exp"));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(
            parse("P(f").unwrap_err(),
            Error::Syntax {
                offset: 3,
                expected: vec![")".into()]
            }
        );
        match parse("1 + * 2").unwrap_err() {
            Error::Syntax { offset, expected } => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"P(".to_string()));
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse("f g"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("1/0"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("f^x"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("Q(f)"), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
    }

    #[test]
    fn print_round_trip() {
        for text in [
            "P(f)*P(f)",
            "a - (b - c)",
            "(a + b)*c",
            "(a^2)^3",
            "-3/2*x^2 - 1",
            "P(f*P(g)) + P(P(f)*g) - P(lambda*P(f)*P(g))",
            "a*(b*c)",
            "D(P(f)) - f",
            "inv(1 + x^2)",
        ] {
            let e = parse(text).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{text} -> {e}");
        }
        assert_eq!(parse("(a+b)*c").unwrap().to_string(), "(a + b)*c");
    }

    #[test]
    fn eval_examples() {
        let model = SeriesModel::volterra(&SeparableKernel::exp(4));
        let mut b = BTreeMap::new();
        b.insert("f".to_string(), Series::one(4));
        let p1 = eval(&parse("P(f)").unwrap(), &model, &b).unwrap();
        assert_eq!(p1.coeffs(), Series::from_coeffs([rat(0, 1), rat(1, 1), rat(-1, 2), rat(1, 6), rat(-1, 24)], 4).coeffs());
        let g = Series::from_ints(&[1, 2, 3], 4);
        b.insert("g".into(), g.clone());
        assert_eq!(eval(&parse("g+0").unwrap(), &model, &b).unwrap(), g);
        assert_eq!(
            eval(&parse("h").unwrap(), &model, &b),
            Err(Error::UnboundSymbol("h".into()))
        );
        assert_eq!(
            eval(&parse("D(f)").unwrap(), &SeriesModel::new(4), &b),
            Err(Error::MissingOperator("D"))
        );
    }

    #[test]
    fn plain_series() {
        let s = eval_plain_series(&parse("inv(1 + x^2)").unwrap(), 6).unwrap();
        assert_eq!(s, Series::from_ints(&[1, 0, -1, 0, 1, 0, -1], 6));
        let e = eval_plain_series(&parse("exp(0-x)").unwrap(), 5).unwrap();
        assert_eq!(e, Series::exp_linear(&rat(-1, 1), 5));
    }

    fn p_pow(inner: Expr, n: usize) -> Expr {
        (0..n).fold(inner, |acc, _| Expr::p(acc))
    }

    #[test]
    fn reynolds_square_terms() {
        let e = parse("P(f)^2").unwrap();
        let exp = reynolds_expand(&e, 4, true).unwrap();
        let fpf = parse("f*P(f)").unwrap();
        let mut expected = Poly::new();
        for n in 1..=4usize {
            let sign = if n % 2 == 1 { 2 } else { -2 };
            for (m, c) in to_poly(&p_pow(fpf.clone(), n), true).unwrap() {
                poly_add(&mut expected, m, c * rat(sign, 1));
            }
        }
        assert_eq!(exp.terms, expected);
        for (w, terms) in exp.by_weight() {
            assert_eq!(terms.len(), 1, "weight {w}");
        }
        assert_eq!(
            exp.to_string(),
            "2*P(f*P(f)) - 2*P(P(f*P(f))) + 2*P(P(P(f*P(f)))) - 2*P(P(P(P(f*P(f)))))"
        );
    }

    #[test]
    fn no_redex_is_unchanged() {
        for text in ["P(f)", "f*P(g*P(f))", "3*x + f"] {
            let e = parse(text).unwrap();
            assert_eq!(reynolds_expand(&e, 6, true).unwrap(), Expansion::linearize(&e, true).unwrap());
        }
        assert_eq!(
            reynolds_expand(&parse("D(f)").unwrap(), 3, true),
            Err(Error::UnsupportedNode("D".into()))
        );
    }

    #[test]
    fn symbolic_lambda_kept() {
        let e = parse("P(f)*P(g)").unwrap();
        let exp = reynolds_expand(&e, 1, false).unwrap();
        let expected = parse("P(P(f)*g) + P(f*P(g))").unwrap();
        assert_eq!(exp, Expansion::linearize(&expected, false).unwrap());
        let exp = reynolds_expand(&e, 2, false).unwrap();
        assert!(exp.to_string().contains("lambda"));
    }

    #[test]
    fn expansion_evaluates_like_input() {
        let n = 8;
        let model = SeriesModel::volterra(&SeparableKernel::exp(n + 1));
        let mut b = BTreeMap::new();
        b.insert("f".to_string(), Series::from_ints(&[1, -2, 0, 3], n + 1));
        b.insert("g".to_string(), Series::from_ints(&[0, 1, 1], n + 1));
        for text in ["P(f)^2", "P(f)*P(g)*P(f)", "P(f)*P(g) + P(P(f)*P(g))"] {
            let e = parse(text).unwrap();
            let direct = eval(&e, &model, &b).unwrap();
            let expanded = eval(&reynolds_expand(&e, n, true).unwrap().to_expr(), &model, &b).unwrap();
            assert!(direct.equal_mod(&expanded, n).unwrap(), "{text}");
        }
    }
}
