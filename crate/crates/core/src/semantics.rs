//! Truth and exact probability.
//!
//! Evaluation is bottom-up over the whole model: each subformula yields the
//! vector of worlds where it is true, and an [`Evaluator`] memoizes those
//! vectors so that repeated subformulas (the inner chance term of a Miller
//! instance, say) are computed once per model.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::formula::{Comparator, Formula, Polynomial, TimeSymbol};
use crate::model::{Extent, Model, TimePoint, WorldId};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("time symbol `{0}` is not denoted by the model")]
    UnboundTime(String),
    #[error("unknown fact symbol `{0}`")]
    UnknownFact(String),
    #[error("unknown event symbol `{0}`")]
    UnknownEvent(String),
}

/// A model and the world at which formulas are evaluated.
#[derive(Clone, Copy, Debug)]
pub struct EvalContext<'m> {
    pub model: &'m Model,
    pub world: WorldId,
}

type Truth = Rc<Vec<bool>>;

pub struct Evaluator<'m> {
    model: &'m Model,
    memo: RefCell<BTreeMap<Formula, Truth>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Self {
        Evaluator { model, memo: RefCell::new(BTreeMap::new()) }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn time(&self, sym: &TimeSymbol) -> Result<TimePoint, EvalError> {
        self.model.denote(sym).ok_or_else(|| EvalError::UnboundTime(sym.to_string()))
    }

    /// Truth value of `f` at every world, indexed by world.
    pub fn truth(&self, f: &Formula) -> Result<Truth, EvalError> {
        // Atoms and connectives are cheaper to recompute than to key.
        let modal = matches!(f, Formula::Inev(..) | Formula::Poss(..) | Formula::Prob(_) | Formula::CondProb(_));
        if !modal {
            return Ok(Rc::new(self.compute(f)?));
        }
        if let Some(hit) = self.memo.borrow().get(f) {
            return Ok(hit.clone());
        }
        let value = Rc::new(self.compute(f)?);
        self.memo.borrow_mut().insert(f.clone(), value.clone());
        Ok(value)
    }

    pub fn holds_at(&self, w: WorldId, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.truth(f)?[w.0])
    }

    /// `μ_t^w` of the worlds accessible from `w` at `t` where `f` is true.
    pub fn probability(&self, t: TimePoint, w: WorldId, f: &Formula) -> Result<Rational, EvalError> {
        let truth = self.truth(f)?;
        Ok(self.mass_of(t, w, &truth))
    }

    /// [`Evaluator::probability`] for every world at once.
    pub fn probabilities(&self, t: TimePoint, f: &Formula) -> Result<Vec<Rational>, EvalError> {
        let truth = self.truth(f)?;
        Ok(self.per_group(t, |w| self.mass_of(t, w, &truth)))
    }

    /// `value` at one world of each chance group at `t`, copied to the rest.
    fn per_group<T: Clone>(&self, t: TimePoint, mut value: impl FnMut(WorldId) -> T) -> Vec<T> {
        let m = self.model;
        let mut out: Vec<T> = Vec::with_capacity(m.world_count());
        for w in m.worlds() {
            let rep = m.chance_group(t, w);
            let v = if rep == w { value(w) } else { out[rep.0].clone() };
            out.push(v);
        }
        out
    }

    fn mass_of(&self, t: TimePoint, w: WorldId, truth: &[bool]) -> Rational {
        let dist = self.model.distribution(t, w);
        sum(self.model.accessible(t, w).iter().filter(|v| truth[v.0]).map(|v| dist.mass(*v)))
    }

    fn interval(&self, a: &TimeSymbol, b: &TimeSymbol) -> Result<(TimePoint, TimePoint), EvalError> {
        Ok((self.time(a)?, self.time(b)?))
    }

    fn compute(&self, f: &Formula) -> Result<Vec<bool>, EvalError> {
        let m = self.model;
        let n = m.world_count();
        let constant = |b: bool| alloc::vec![b; n];
        Ok(match f {
            Formula::TimeEq(a, b) => {
                let (a, b) = self.interval(a, b)?;
                constant(a == b)
            }
            Formula::TimeLe(a, b) => {
                let (a, b) = self.interval(a, b)?;
                constant(a <= b)
            }
            Formula::TimeLt(a, b) => {
                let (a, b) = self.interval(a, b)?;
                constant(a < b)
            }
            Formula::Holds(a, b, fact) => {
                let (start, end) = self.interval(a, b)?;
                let extents = m.fact_extents(fact).ok_or_else(|| EvalError::UnknownFact(fact.to_string()))?;
                m.worlds().map(|world| extents.contains(&Extent { start, end, world })).collect()
            }
            Formula::Occ(a, b, event) => {
                let (start, end) = self.interval(a, b)?;
                let extents = m.event_extents(event).ok_or_else(|| EvalError::UnknownEvent(event.to_string()))?;
                m.worlds().map(|world| extents.contains(&Extent { start, end, world })).collect()
            }
            Formula::Not(g) => self.truth(g)?.iter().map(|b| !b).collect(),
            Formula::And(a, b) => {
                let (a, b) = (self.truth(a)?, self.truth(b)?);
                a.iter().zip(b.iter()).map(|(x, y)| *x && *y).collect()
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.truth(a)?, self.truth(b)?);
                a.iter().zip(b.iter()).map(|(x, y)| *x || *y).collect()
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.truth(a)?, self.truth(b)?);
                a.iter().zip(b.iter()).map(|(x, y)| !*x || *y).collect()
            }
            Formula::Inev(t, g) => {
                let t = self.time(t)?;
                let g = self.truth(g)?;
                m.worlds().map(|w| m.accessible(t, w).iter().all(|v| g[v.0])).collect()
            }
            Formula::Poss(t, g) => {
                let t = self.time(t)?;
                let g = self.truth(g)?;
                m.worlds().map(|w| m.accessible(t, w).iter().any(|v| g[v.0])).collect()
            }
            Formula::Prob(p) => {
                let t = self.time(&p.time)?;
                let values = self.polynomial_values(t, &p.poly)?;
                values.iter().map(|v| p.cmp.holds(v, &Rational::zero())).collect()
            }
            Formula::CondProb(c) => {
                let t = self.time(&c.time)?;
                let target = self.truth(&c.target)?;
                let given = self.truth(&c.given)?;
                let both: Vec<bool> = target.iter().zip(given.iter()).map(|(x, y)| *x && *y).collect();
                self.per_group(t, |w| {
                    let lhs = self.mass_of(t, w, &both);
                    let rhs = &c.bound * self.mass_of(t, w, &given);
                    c.cmp.holds(&lhs, &rhs)
                })
            }
        })
    }

    /// Value of `poly` at every world, every probability term taken at `t`.
    pub fn polynomial_values(&self, t: TimePoint, poly: &Polynomial) -> Result<Vec<Rational>, EvalError> {
        let mut terms = Vec::new();
        for mono in poly.monomials() {
            let truths = mono.factors.iter().map(|f| self.truth(f)).collect::<Result<Vec<_>, _>>()?;
            terms.push((&mono.coeff, truths));
        }
        Ok(self.per_group(t, |w| {
            let mut total = Rational::zero();
            for (coeff, truths) in &terms {
                let mut product = (*coeff).clone();
                for truth in truths {
                    if product.is_zero() {
                        break;
                    }
                    product *= self.mass_of(t, w, truth);
                }
                total += product;
            }
            total
        }))
    }

    /// Some world where `f` is false, if any.
    pub fn counterexample(&self, f: &Formula) -> Result<Option<WorldId>, EvalError> {
        Ok(self.truth(f)?.iter().position(|b| !b).map(WorldId))
    }
}

/// Exact sum, reduced once at the end; masses of one class usually share a
/// denominator.
fn sum<'a>(terms: impl Iterator<Item = &'a Rational>) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for q in terms {
        if q.denom() == &den {
            num += q.numer();
        } else {
            num = num * q.denom() + q.numer() * &den;
            den *= q.denom();
        }
    }
    Rational::new(num, den)
}

pub fn eval_formula(ctx: EvalContext<'_>, f: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(ctx.model).holds_at(ctx.world, f)
}

pub fn probability(m: &Model, t: TimePoint, w: WorldId, f: &Formula) -> Result<Rational, EvalError> {
    Evaluator::new(m).probability(t, w, f)
}

/// True at every world of `m`.
pub fn valid_in_model(m: &Model, f: &Formula) -> Result<bool, EvalError> {
    Ok(Evaluator::new(m).counterexample(f)?.is_none())
}

/// Every world satisfying `f` satisfies `g`.
pub fn entails_in_model(m: &Model, f: &Formula, g: &Formula) -> Result<bool, EvalError> {
    let ev = Evaluator::new(m);
    let (f, g) = (ev.truth(f)?, ev.truth(g)?);
    Ok(f.iter().zip(g.iter()).all(|(a, b)| !*a || *b))
}

/// `P[t](f) cmp bound` in world `w`, without building the formula.
pub fn compare_probability(
    ev: &Evaluator<'_>,
    t: TimePoint,
    w: WorldId,
    f: &Formula,
    cmp: Comparator,
    bound: &Rational,
) -> Result<bool, EvalError> {
    Ok(cmp.holds(&ev.probability(t, w, f)?, bound))
}

/// `P[t](f)` is 0 or 1 in `w`.
pub fn is_determined(ev: &Evaluator<'_>, t: TimePoint, w: WorldId, f: &Formula) -> Result<bool, EvalError> {
    let p = ev.probability(t, w, f)?;
    Ok(p.is_zero() || p.is_one())
}
