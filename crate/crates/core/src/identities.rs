//! Operator identities as exact residuals.
//!
//! Every identity is evaluated as "left side minus right side" in an
//! [`OperatedModel`]: either truncated series with a pair of operators, or
//! truncated tensor series with the free Reynolds operator and differential.
//! A residual that vanishes through its trusted order means the identity
//! holds at that order.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::BaseAlgebra;
use crate::error::{Error, Result};
use crate::expr::Func;
use crate::sample::Sampler;
use crate::tensor::TensorSeries;
use crate::volterra::SeparableKernel;
use crate::{parse_rational, Rational, Series};

/// An algebra with an operator `P`, optionally a differential `D`, and a
/// weight `λ` (equal to `D(1)` whenever `D` is present).
pub trait OperatedModel: Sync {
    type Elem: Clone + Send + Sync;

    fn constant(&self, c: &Rational) -> Self::Elem;

    fn one(&self) -> Self::Elem {
        self.constant(&Rational::one())
    }

    fn x(&self) -> Result<Self::Elem>;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;

    fn p(&self, a: &Self::Elem) -> Result<Self::Elem>;

    fn d(&self, a: &Self::Elem) -> Result<Self::Elem>;

    fn lambda(&self) -> Result<Self::Elem>;

    fn call(&self, f: Func, _a: &Self::Elem) -> Result<Self::Elem> {
        Err(Error::UnsupportedNode(format!("{f} in this model")))
    }

    fn scale(&self, a: &Self::Elem, c: &Rational) -> Result<Self::Elem> {
        self.mul(&self.constant(c), a)
    }

    /// Number of trusted orders, the truncation order of the element.
    fn trusted(&self, a: &Self::Elem) -> usize;

    /// Lowest-order nonzero part: its order and a printable coefficient.
    fn first_nonzero(&self, a: &Self::Elem) -> Option<(usize, String)>;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.first_nonzero(a).is_none()
    }
}

type SeriesOp = Arc<dyn Fn(&Series) -> Result<Series> + Send + Sync>;

/// Truncated series with arbitrary operators.
#[derive(Clone)]
pub struct SeriesModel {
    ord: usize,
    p: Option<SeriesOp>,
    d: Option<SeriesOp>,
    lambda: Option<Series>,
}

impl SeriesModel {
    /// A model with no operators, constants trusted to `ord`.
    pub fn new(ord: usize) -> Self {
        SeriesModel {
            ord,
            p: None,
            d: None,
            lambda: None,
        }
    }

    pub fn with_p<F>(mut self, p: F) -> Self
    where
        F: Fn(&Series) -> Result<Series> + Send + Sync + 'static,
    {
        self.p = Some(Arc::new(p));
        self
    }

    pub fn with_d<F>(mut self, d: F) -> Self
    where
        F: Fn(&Series) -> Result<Series> + Send + Sync + 'static,
    {
        self.d = Some(Arc::new(d));
        self
    }

    /// Fixes the weight explicitly instead of taking `D(1)`.
    pub fn with_lambda(mut self, lambda: Series) -> Self {
        self.lambda = Some(lambda);
        self
    }

    /// `P_K` and, when `k` and `h` are invertible, `D_K` with weight `D_K(1)`.
    pub fn volterra(kernel: &SeparableKernel) -> Self {
        let pk = kernel.clone();
        let model = SeriesModel::new(kernel.ord()).with_p(move |f| Ok(pk.apply_p(f)));
        if kernel.k_invertible() && kernel.h_invertible() {
            let dk = kernel.clone();
            model.with_d(move |f| dk.apply_d(f))
        } else {
            model
        }
    }

    pub fn ord(&self) -> usize {
        self.ord
    }

    pub fn has_d(&self) -> bool {
        self.d.is_some()
    }
}

impl fmt::Debug for SeriesModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesModel")
            .field("ord", &self.ord)
            .field("p", &self.p.is_some())
            .field("d", &self.d.is_some())
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl OperatedModel for SeriesModel {
    type Elem = Series;

    fn constant(&self, c: &Rational) -> Series {
        Series::constant(c.clone(), self.ord)
    }

    fn x(&self) -> Result<Series> {
        Ok(Series::x(self.ord))
    }

    fn add(&self, a: &Series, b: &Series) -> Result<Series> {
        Ok(a + b)
    }

    fn sub(&self, a: &Series, b: &Series) -> Result<Series> {
        Ok(a - b)
    }

    fn mul(&self, a: &Series, b: &Series) -> Result<Series> {
        Ok(a * b)
    }

    fn scale(&self, a: &Series, c: &Rational) -> Result<Series> {
        Ok(a.scale(c))
    }

    fn p(&self, a: &Series) -> Result<Series> {
        let p = self.p.as_ref().ok_or(Error::MissingOperator("P"))?;
        p(a)
    }

    fn d(&self, a: &Series) -> Result<Series> {
        let d = self.d.as_ref().ok_or(Error::MissingOperator("D"))?;
        d(a)
    }

    fn lambda(&self) -> Result<Series> {
        match &self.lambda {
            Some(l) => Ok(l.clone()),
            None => self.d(&self.one()),
        }
    }

    fn call(&self, f: Func, a: &Series) -> Result<Series> {
        match f {
            Func::Inv => a.inverse(),
            Func::Exp => a.exp(),
        }
    }

    fn trusted(&self, a: &Series) -> usize {
        a.ord()
    }

    fn first_nonzero(&self, a: &Series) -> Option<(usize, String)> {
        a.leading_term().map(|(i, c)| (i, c.to_string()))
    }
}

/// The free object truncated at tensor length `order`, with the diamond
/// product, `P(u) = 1 ⊗ u`, and its differential.
#[derive(Clone, Debug)]
pub struct TensorModel {
    algebra: Arc<dyn BaseAlgebra>,
    order: usize,
}

impl TensorModel {
    pub fn new(algebra: Arc<dyn BaseAlgebra>, order: usize) -> Self {
        TensorModel { algebra, order }
    }

    pub fn algebra(&self) -> &Arc<dyn BaseAlgebra> {
        &self.algebra
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl OperatedModel for TensorModel {
    type Elem = TensorSeries;

    fn constant(&self, c: &Rational) -> TensorSeries {
        TensorSeries::unit(self.algebra.clone(), self.order).scale(c)
    }

    fn x(&self) -> Result<TensorSeries> {
        let x = self
            .algebra
            .generator()
            .ok_or_else(|| Error::Invalid(format!("`{}` has no element x", self.algebra.descriptor())))?;
        Ok(TensorSeries::element(self.algebra.clone(), self.order, &x))
    }

    fn add(&self, a: &TensorSeries, b: &TensorSeries) -> Result<TensorSeries> {
        a.add(b)
    }

    fn sub(&self, a: &TensorSeries, b: &TensorSeries) -> Result<TensorSeries> {
        a.sub(b)
    }

    fn mul(&self, a: &TensorSeries, b: &TensorSeries) -> Result<TensorSeries> {
        a.diamond(b)
    }

    fn scale(&self, a: &TensorSeries, c: &Rational) -> Result<TensorSeries> {
        Ok(a.scale(c))
    }

    fn p(&self, a: &TensorSeries) -> Result<TensorSeries> {
        Ok(a.reynolds_p())
    }

    fn d(&self, a: &TensorSeries) -> Result<TensorSeries> {
        a.deriv_d()
    }

    fn lambda(&self) -> Result<TensorSeries> {
        TensorSeries::lambda(self.algebra.clone(), self.order)
    }

    fn trusted(&self, a: &TensorSeries) -> usize {
        a.order()
    }

    fn first_nonzero(&self, a: &TensorSeries) -> Option<(usize, String)> {
        let len = a.terms().keys().map(Vec::len).min()?;
        let part = TensorSeries::from_terms(
            a.algebra().clone(),
            a.order(),
            a.terms()
                .iter()
                .filter(|(w, _)| w.len() == len)
                .map(|(w, c)| (w.clone(), c.clone())),
        );
        Some((len, part.to_string()))
    }
}

/// The identities the checker knows, each a residual `left - right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identity {
    /// `P(f)P(g) - P(fP(g)) - P(P(f)g) - w P(fg)` for a scalar weight `w`.
    RotaBaxter(Rational),
    /// `P(f)P(g) - P(fP(g)) - P(P(f)g) + P(P(f)P(g))`.
    Reynolds,
    /// `d(xy) - d(x)y - x d(y) - w d(x)d(y)` for a scalar weight `w`.
    WeightedDifferential(Rational),
    /// `p(d(x))p(d(y)) - p(d(x))y - x p(d(y)) + p(d(xy))`.
    IntDiff,
    /// `D(xy) - D(x)y - xD(y) + xλy` with the model's weight `λ`.
    ModifiedDifferential,
    /// `D(xy) - D(x)y - xD(y) + xD(1)y`.
    ModifiedLeibniz,
    /// `P(x)P(y) - P(P(x)y) - P(xP(y)) + P(P(x)λP(y))`.
    WeightedReynolds,
    /// The weighted Reynolds residual with `D(1)` as the weight.
    DifferentialReynolds,
    /// `D(P(x)) - x`.
    LeftInverse,
    /// `P(D(x))P(D(y)) - P(D(x))y - xP(D(y)) + P(D(xy)) + P(D(1))(xy - P(D(xy)))`.
    ModifiedIntDiff,
}

impl Identity {
    pub const ALL: [&'static str; 10] = [
        "rota-baxter",
        "reynolds",
        "weighted-differential",
        "intdiff",
        "modified-differential",
        "modified-leibniz",
        "weighted-reynolds",
        "differential-reynolds",
        "left-inverse",
        "modified-intdiff",
    ];

    pub fn arity(&self) -> usize {
        match self {
            Identity::LeftInverse => 1,
            _ => 2,
        }
    }

    pub fn needs_d(&self) -> bool {
        !matches!(
            self,
            Identity::RotaBaxter(_) | Identity::Reynolds | Identity::WeightedReynolds
        )
    }
}

impl FromStr for Identity {
    type Err = Error;

    /// Identity names, with an optional `=<p/q>` scalar weight for
    /// `rota-baxter` and `weighted-differential` (default 0).
    fn from_str(text: &str) -> Result<Self> {
        let (name, weight) = match text.split_once('=') {
            Some((n, w)) => (n, Some(parse_rational(w)?)),
            None => (text, None),
        };
        let scalar = || weight.clone().unwrap_or_else(Rational::zero);
        let id = match name {
            "rota-baxter" => Identity::RotaBaxter(scalar()),
            "weighted-differential" => Identity::WeightedDifferential(scalar()),
            "reynolds" => Identity::Reynolds,
            "intdiff" => Identity::IntDiff,
            "modified-differential" => Identity::ModifiedDifferential,
            "modified-leibniz" => Identity::ModifiedLeibniz,
            "weighted-reynolds" => Identity::WeightedReynolds,
            "differential-reynolds" => Identity::DifferentialReynolds,
            "left-inverse" => Identity::LeftInverse,
            "modified-intdiff" => Identity::ModifiedIntDiff,
            _ => {
                return Err(Error::Invalid(format!(
                    "unknown identity `{text}`; expected one of {}",
                    Identity::ALL.join(", ")
                )))
            }
        };
        if weight.is_some() && !matches!(id, Identity::RotaBaxter(_) | Identity::WeightedDifferential(_)) {
            return Err(Error::Invalid(format!("identity `{name}` takes no weight")));
        }
        Ok(id)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Identity::RotaBaxter(w) | Identity::WeightedDifferential(w) if !w.is_zero() => {
                let base = if matches!(self, Identity::RotaBaxter(_)) {
                    "rota-baxter"
                } else {
                    "weighted-differential"
                };
                return write!(f, "{base}={w}");
            }
            Identity::RotaBaxter(_) => "rota-baxter",
            Identity::WeightedDifferential(_) => "weighted-differential",
            Identity::Reynolds => "reynolds",
            Identity::IntDiff => "intdiff",
            Identity::ModifiedDifferential => "modified-differential",
            Identity::ModifiedLeibniz => "modified-leibniz",
            Identity::WeightedReynolds => "weighted-reynolds",
            Identity::DifferentialReynolds => "differential-reynolds",
            Identity::LeftInverse => "left-inverse",
            Identity::ModifiedIntDiff => "modified-intdiff",
        };
        write!(f, "{name}")
    }
}

fn weighted_reynolds<M: OperatedModel>(m: &M, x: &M::Elem, y: &M::Elem, w: &M::Elem) -> Result<M::Elem> {
    let px = m.p(x)?;
    let py = m.p(y)?;
    let lhs = m.mul(&px, &py)?;
    let a = m.p(&m.mul(&px, y)?)?;
    let b = m.p(&m.mul(x, &py)?)?;
    let c = m.p(&m.mul(&m.mul(&px, w)?, &py)?)?;
    m.add(&m.sub(&m.sub(&lhs, &a)?, &b)?, &c)
}

fn modified_leibniz<M: OperatedModel>(m: &M, x: &M::Elem, y: &M::Elem, w: &M::Elem) -> Result<M::Elem> {
    let lhs = m.d(&m.mul(x, y)?)?;
    let a = m.mul(&m.d(x)?, y)?;
    let b = m.mul(x, &m.d(y)?)?;
    let c = m.mul(&m.mul(x, w)?, y)?;
    m.add(&m.sub(&m.sub(&lhs, &a)?, &b)?, &c)
}

/// The residual of `identity` on `inputs` (one or two elements).
pub fn residual<M: OperatedModel>(model: &M, identity: &Identity, inputs: &[M::Elem]) -> Result<M::Elem> {
    if inputs.len() < identity.arity() {
        return Err(Error::Invalid(format!(
            "`{identity}` needs {} inputs, got {}",
            identity.arity(),
            inputs.len()
        )));
    }
    let m = model;
    let x = &inputs[0];
    let y = inputs.get(1).unwrap_or(x);
    match identity {
        Identity::RotaBaxter(w) => {
            let px = m.p(x)?;
            let py = m.p(y)?;
            let lhs = m.mul(&px, &py)?;
            let a = m.p(&m.mul(x, &py)?)?;
            let b = m.p(&m.mul(&px, y)?)?;
            let c = m.scale(&m.p(&m.mul(x, y)?)?, w)?;
            m.sub(&m.sub(&m.sub(&lhs, &a)?, &b)?, &c)
        }
        Identity::Reynolds => weighted_reynolds(m, x, y, &m.one()),
        Identity::WeightedDifferential(w) => {
            let dx = m.d(x)?;
            let dy = m.d(y)?;
            let lhs = m.d(&m.mul(x, y)?)?;
            let a = m.mul(&dx, y)?;
            let b = m.mul(x, &dy)?;
            let c = m.scale(&m.mul(&dx, &dy)?, w)?;
            m.sub(&m.sub(&m.sub(&lhs, &a)?, &b)?, &c)
        }
        Identity::IntDiff => {
            let pdx = m.p(&m.d(x)?)?;
            let pdy = m.p(&m.d(y)?)?;
            let lhs = m.mul(&pdx, &pdy)?;
            let a = m.mul(&pdx, y)?;
            let b = m.mul(x, &pdy)?;
            let c = m.p(&m.d(&m.mul(x, y)?)?)?;
            m.add(&m.sub(&m.sub(&lhs, &a)?, &b)?, &c)
        }
        Identity::ModifiedDifferential => modified_leibniz(m, x, y, &m.lambda()?),
        Identity::ModifiedLeibniz => modified_leibniz(m, x, y, &m.d(&m.one())?),
        Identity::WeightedReynolds => weighted_reynolds(m, x, y, &m.lambda()?),
        Identity::DifferentialReynolds => weighted_reynolds(m, x, y, &m.d(&m.one())?),
        Identity::LeftInverse => m.sub(&m.d(&m.p(x)?)?, x),
        Identity::ModifiedIntDiff => {
            let pdx = m.p(&m.d(x)?)?;
            let pdy = m.p(&m.d(y)?)?;
            let xy = m.mul(x, y)?;
            let pdxy = m.p(&m.d(&xy)?)?;
            let pd1 = m.p(&m.d(&m.one())?)?;
            let lhs = m.mul(&pdx, &pdy)?;
            let a = m.mul(&pdx, y)?;
            let b = m.mul(x, &pdy)?;
            let tail = m.mul(&pd1, &m.sub(&xy, &pdxy)?)?;
            let r = m.sub(&m.sub(&lhs, &a)?, &b)?;
            m.add(&m.add(&r, &pdxy)?, &tail)
        }
    }
}

/// Outcome of one randomized trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub index: u64,
    /// Order through which the residual was examined.
    pub checked_to: usize,
    /// First nonzero part of the residual, if any.
    pub failure: Option<(usize, String)>,
}

impl Trial {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs `trials` independent seeded trials of `identity`, inputs drawn by
/// `draw`, examining each residual through `order` (or its trusted order
/// when lower). Results are in trial order.
pub fn run_trials<M, F>(
    model: &M,
    identity: &Identity,
    trials: u64,
    seed: u64,
    order: usize,
    draw: F,
) -> Result<Vec<Trial>>
where
    M: OperatedModel,
    F: Fn(&mut Sampler) -> Vec<M::Elem> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|index| {
            let mut sampler = Sampler::for_trial(seed, index);
            let inputs = draw(&mut sampler);
            let r = residual(model, identity, &inputs)?;
            let checked_to = model.trusted(&r).min(order);
            let failure = model.first_nonzero(&r).filter(|(at, _)| *at <= checked_to);
            Ok(Trial {
                index,
                checked_to,
                failure,
            })
        })
        .collect()
}

/// `x ↦ d(λx)`, a modified differential of weight `d(λ)` whenever `d` is
/// a derivation and `λ` is central. Returns the model with that operator.
pub fn compose_mdiff<F>(d: F, lambda: &Series) -> SeriesModel
where
    F: Fn(&Series) -> Result<Series> + Send + Sync + 'static,
{
    let lam = lambda.clone();
    SeriesModel::new(lambda.ord()).with_d(move |f| d(&(&lam * f)))
}

/// `D = x ↦ d(λ^{-1}x)` and `Π = x ↦ λ p(x)` from a derivation `d` with
/// right inverse `p`.
pub fn compose_intdiff<D, P>(d: D, p: P, lambda: &Series) -> Result<SeriesModel>
where
    D: Fn(&Series) -> Result<Series> + Send + Sync + 'static,
    P: Fn(&Series) -> Result<Series> + Send + Sync + 'static,
{
    let inv = lambda.inverse()?;
    let lam = lambda.clone();
    Ok(SeriesModel::new(lambda.ord())
        .with_d(move |f| d(&(&inv * f)))
        .with_p(move |f| Ok(&lam * &p(f)?)))
}

/// `E(x)E(y) - E(1) E(xy)` for `E = id - ΠD`, which vanishes exactly when
/// `E(xy) = E(1)^{-1} E(x) E(y)`.
pub fn evaluation_defect(model: &SeriesModel, x: &Series, y: &Series) -> Result<Series> {
    let e = |f: &Series| -> Result<Series> { Ok(f - &model.p(&model.d(f)?)?) };
    Ok(&(&e(x)? * &e(y)?) - &(&e(&model.one())? * &e(&(x * y))?))
}

/// Whether "`d` has modified Leibniz defect zero with weight `λ`" and
/// "`d - λ·id` is a derivation" agree on every pair from `tests`.
pub fn twist_check<F>(d: F, lambda: &Rational, tests: &[Series]) -> Result<bool>
where
    F: Fn(&Series) -> Result<Series> + Send + Sync + 'static,
{
    let d = Arc::new(d);
    let ord = tests.iter().map(Series::ord).min().unwrap_or(0);
    let lam = lambda.clone();
    let modified = SeriesModel::new(ord)
        .with_d({
            let d = d.clone();
            move |f| d(f)
        })
        .with_lambda(Series::constant(lambda.clone(), ord));
    let twisted = SeriesModel::new(ord).with_d(move |f| Ok(&d(f)? - &f.scale(&lam)));
    let mut wda_holds = true;
    let mut leibniz_holds = true;
    for x in tests {
        for y in tests {
            let r = residual(&modified, &Identity::ModifiedDifferential, &[x.clone(), y.clone()])?;
            wda_holds &= r.is_zero();
            let r = residual(&twisted, &Identity::WeightedDifferential(Rational::zero()), &[x.clone(), y.clone()])?;
            leibniz_holds &= r.is_zero();
        }
    }
    Ok(wda_holds == leibniz_holds)
}

/// With `d` a derivation raising valuation, `P = (id + d)^{-1} = Σ (-d)^r`
/// is a Reynolds operator. Returns the classical Reynolds residual of that
/// `P` on `f, g`, truncated at `n`.
pub fn neumann_reynolds<F>(d: F, f: &Series, g: &Series, n: usize) -> Result<Series>
where
    F: Fn(&Series) -> Result<Series> + Send + Sync + 'static,
{
    for i in 0..=n {
        let image = d(&Series::monomial(Rational::one(), i, n))?;
        if let Some(v) = image.truncate(n.min(image.ord())).valuation() {
            if v <= i {
                return Err(Error::PreconditionViolated(format!(
                    "d(x^{i}) has valuation {v}, so d does not raise valuation"
                )));
            }
        }
    }
    let d = Arc::new(d);
    let model = SeriesModel::new(n).with_p(move |u| {
        let mut total = u.clone();
        let mut term = u.clone();
        for _ in 0..=n {
            term = -d(&term)?;
            if term.truncate(n.min(term.ord())).is_zero() {
                break;
            }
            total = &total + &term;
        }
        Ok(total)
    });
    let r = residual(&model, &Identity::Reynolds, &[f.truncate(n), g.truncate(n)])?;
    Ok(r.truncate(n.min(r.ord())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PolyAlg, ScalarAlg};
    use crate::rat;

    fn derivative(f: &Series) -> Result<Series> {
        f.derivative()
    }

    fn integrate(f: &Series) -> Result<Series> {
        Ok(f.integrate())
    }

    #[test]
    fn rota_baxter_counterexample() {
        let n = 8;
        let kernel = SeparableKernel::new(Series::x(n), Series::one(n));
        let model = SeriesModel::volterra(&kernel);
        let one = Series::one(n);
        let r = residual(&model, &Identity::RotaBaxter(rat(0, 1)), &[one.clone(), one]).unwrap();
        assert_eq!(r.truncate(6), Series::monomial(rat(1, 3), 4, 6));
        assert!(matches!(
            residual(&model, &Identity::ModifiedLeibniz, &[Series::one(n), Series::one(n)]),
            Err(Error::MissingOperator("D"))
        ));
    }

    #[test]
    fn volterra_identities_vanish() {
        let n = 12;
        let model = SeriesModel::volterra(&SeparableKernel::exp(n + 2));
        let mut s = Sampler::new(5);
        for _ in 0..5 {
            let f = s.series(n + 2);
            let g = s.series(n + 2);
            for id in [
                Identity::WeightedReynolds,
                Identity::DifferentialReynolds,
                Identity::ModifiedLeibniz,
                Identity::ModifiedDifferential,
                Identity::LeftInverse,
                Identity::ModifiedIntDiff,
                Identity::Reynolds,
            ] {
                let r = residual(&model, &id, &[f.clone(), g.clone()]).unwrap();
                assert!(r.ord() >= n, "{id}: ord {}", r.ord());
                assert!(r.is_zero(), "{id}: {r}");
            }
        }
    }

    #[test]
    fn modified_intdiff_exp_ones() {
        let model = SeriesModel::volterra(&SeparableKernel::exp(10));
        let one = Series::one(10);
        let r = residual(&model, &Identity::ModifiedIntDiff, &[one.clone(), one]).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn tensor_model_identities() {
        let algs: Vec<Arc<dyn BaseAlgebra>> = vec![
            Arc::new(ScalarAlg::from_mu(rat(1, 1)).unwrap()),
            Arc::new(ScalarAlg::from_mu(rat(2, 3)).unwrap()),
            Arc::new(PolyAlg::default()),
        ];
        for alg in algs {
            let model = TensorModel::new(alg.clone(), 5);
            let mut s = Sampler::new(9);
            let x = s.tensor(&alg, 5, 3, 3, 2);
            let y = s.tensor(&alg, 5, 3, 3, 2);
            for id in [
                Identity::WeightedReynolds,
                Identity::ModifiedLeibniz,
                Identity::LeftInverse,
            ] {
                let r = residual(&model, &id, &[x.clone(), y.clone()]).unwrap();
                assert!(r.is_zero(), "{id} over {}: {r}", alg.descriptor());
            }
            let r = residual(&model, &Identity::ModifiedLeibniz, &[x.clone(), y.clone()]).unwrap();
            assert_eq!(r.order(), 4);
        }
    }

    #[test]
    fn identity_names() {
        for name in Identity::ALL {
            let id: Identity = name.parse().unwrap();
            assert_eq!(id.to_string(), name);
        }
        assert_eq!("rota-baxter=1/2".parse::<Identity>().unwrap(), Identity::RotaBaxter(rat(1, 2)));
        assert!("reynolds=1".parse::<Identity>().is_err());
        assert!("baxter".parse::<Identity>().is_err());
    }

    #[test]
    fn run_trials_is_ordered_and_deterministic() {
        let model = SeriesModel::volterra(&SeparableKernel::exp(10));
        let draw = |s: &mut Sampler| vec![s.series(10), s.series(10)];
        let a = run_trials(&model, &Identity::RotaBaxter(rat(0, 1)), 6, 3, 8, draw).unwrap();
        let b = run_trials(&model, &Identity::RotaBaxter(rat(0, 1)), 6, 3, 8, draw).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|t| t.index).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
        assert!(a.iter().any(|t| !t.passed()));
    }

    #[test]
    fn compose_mdiff_examples() {
        let n = 10;
        let d = compose_mdiff(derivative, &Series::one(n));
        let f = Series::from_ints(&[1, 2, 0, -1], n);
        assert_eq!(d.d(&f).unwrap(), f.derivative().unwrap());
        assert!(d.lambda().unwrap().is_zero());

        let lam = Series::from_ints(&[1, 1], n);
        let d = compose_mdiff(derivative, &lam);
        assert_eq!(d.lambda().unwrap(), Series::one(n - 1));
        let mut s = Sampler::new(2);
        for _ in 0..5 {
            let r = residual(&d, &Identity::ModifiedDifferential, &[s.series(n), s.series(n)]).unwrap();
            assert!(r.is_zero());
        }

        let d = compose_mdiff(derivative, &Series::x(n));
        let one = Series::one(n);
        assert_eq!(d.d(&one).unwrap(), Series::one(n - 1));
        let r = residual(&d, &Identity::ModifiedDifferential, &[one.clone(), one]).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn compose_intdiff_reproduces_exp_kernel() {
        let n = 10;
        let h = Series::exp_linear(&rat(1, 1), n + 1);
        let h_inv = h.inverse().unwrap();
        let h2 = h.clone();
        let lam = Series::exp_linear(&rat(-1, 1), n + 1);
        let model = compose_intdiff(
            move |f: &Series| Ok(&h_inv * &f.derivative()?),
            move |f: &Series| Ok((&h2 * f).integrate()),
            &lam,
        )
        .unwrap();
        let kernel = SeparableKernel::exp(n + 1);
        let mut s = Sampler::new(4);
        for _ in 0..5 {
            let f = s.series(n + 1);
            assert_eq!(model.p(&f).unwrap(), kernel.apply_p(&f));
            assert_eq!(model.d(&f).unwrap(), kernel.apply_d(&f).unwrap());
        }
    }

    #[test]
    fn compose_intdiff_with_plain_pair() {
        let n = 10;
        let model = compose_intdiff(derivative, integrate, &Series::one(n)).unwrap();
        let f = Series::from_ints(&[2, 0, 3], n);
        assert_eq!(model.d(&f).unwrap(), f.derivative().unwrap());
        assert_eq!(model.p(&f).unwrap(), f.integrate().truncate(n));
        assert!(compose_intdiff(derivative, integrate, &Series::x(n)).is_err());

        let lam = Series::from_ints(&[1, 1], n + 2).inverse().unwrap();
        let model = compose_intdiff(derivative, integrate, &lam).unwrap();
        let mut s = Sampler::new(8);
        for _ in 0..4 {
            let (f, g) = (s.series(n + 2), s.series(n + 2));
            for id in [
                Identity::ModifiedLeibniz,
                Identity::DifferentialReynolds,
                Identity::LeftInverse,
                Identity::ModifiedIntDiff,
            ] {
                let r = residual(&model, &id, &[f.clone(), g.clone()]).unwrap();
                assert!(r.ord() >= n && r.is_zero(), "{id}: {r}");
            }
            assert!(evaluation_defect(&model, &f, &g).unwrap().is_zero());
        }
    }

    #[test]
    fn twist_check_examples() {
        let tests: Vec<Series> = vec![
            Series::from_ints(&[1], 6),
            Series::from_ints(&[0, 1, 2], 6),
            Series::from_ints(&[3, 0, 0, -1], 6),
        ];
        assert!(twist_check(|f: &Series| Ok(f.clone()), &rat(1, 1), &tests).unwrap());
        assert!(twist_check(derivative, &rat(0, 1), &tests).unwrap());
        let k = SeparableKernel::exp(7);
        let tests7: Vec<Series> = tests.iter().map(|t| Series::from_coeffs(t.coeffs().to_vec(), 7)).collect();
        assert!(twist_check(move |f: &Series| k.apply_d(f), &rat(1, 1), &tests7).unwrap());
    }

    #[test]
    fn neumann_examples() {
        let n = 10;
        let zero_d = |f: &Series| Ok(Series::zero(f.ord()));
        let f = Series::from_ints(&[1, 2], n);
        assert!(neumann_reynolds(zero_d, &f, &f, n).unwrap().is_zero());

        let d = |f: &Series| Ok(f.derivative()?.shift(2));
        let one = Series::one(n);
        assert!(neumann_reynolds(d, &one, &one, n).unwrap().is_zero());
        let r = neumann_reynolds(d, &Series::x(n), &Series::monomial(rat(1, 1), 2, n), n).unwrap();
        assert_eq!(r.ord(), n);
        assert!(r.is_zero());

        assert!(matches!(
            neumann_reynolds(derivative, &one, &one, n),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
