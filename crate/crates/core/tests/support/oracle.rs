//! Naive reference semantics: direct recursion on the definitions with no
//! memo, no grouping and no shared code with the library evaluator beyond
//! the model accessors.

#![allow(dead_code)]

use chronoprob_core::formula::{Comparator, Formula};
use chronoprob_core::model::{Extent, Model, TimePoint, WorldId};
use chronoprob_core::rational::Rational;

fn point(m: &Model, s: &chronoprob_core::formula::TimeSymbol) -> TimePoint {
    m.denote(s).expect("time symbol denoted")
}

/// `v` shares a class with `w` at `t`, read straight off the stored partition.
pub fn related(m: &Model, t: TimePoint, w: WorldId, v: WorldId) -> bool {
    m.classes(t).iter().any(|c| c.contains(&w) && c.contains(&v))
}

fn cmp(c: Comparator, a: &Rational, b: &Rational) -> bool {
    match c {
        Comparator::Ge => a >= b,
        Comparator::Le => a <= b,
        Comparator::Eq => a == b,
        Comparator::Gt => a > b,
        Comparator::Lt => a < b,
    }
}

pub fn holds(m: &Model, w: WorldId, f: &Formula) -> bool {
    match f {
        Formula::TimeEq(a, b) => point(m, a) == point(m, b),
        Formula::TimeLe(a, b) => point(m, a) <= point(m, b),
        Formula::TimeLt(a, b) => point(m, a) < point(m, b),
        Formula::Holds(a, b, fact) => {
            let e = Extent { start: point(m, a), end: point(m, b), world: w };
            m.fact_extents(fact).expect("fact").contains(&e)
        }
        Formula::Occ(a, b, ev) => {
            let e = Extent { start: point(m, a), end: point(m, b), world: w };
            m.event_extents(ev).expect("event").contains(&e)
        }
        Formula::Not(g) => !holds(m, w, g),
        Formula::And(a, b) => holds(m, w, a) && holds(m, w, b),
        Formula::Or(a, b) => holds(m, w, a) || holds(m, w, b),
        Formula::Implies(a, b) => !holds(m, w, a) || holds(m, w, b),
        Formula::Inev(t, g) => {
            let t = point(m, t);
            m.worlds().filter(|v| related(m, t, w, *v)).all(|v| holds(m, v, g))
        }
        Formula::Poss(t, g) => {
            let t = point(m, t);
            m.worlds().filter(|v| related(m, t, w, *v)).any(|v| holds(m, v, g))
        }
        Formula::Prob(p) => {
            let t = point(m, &p.time);
            let mut value = Rational::from_integer(0.into());
            for mono in p.poly.monomials() {
                let mut term = mono.coeff.clone();
                for factor in &mono.factors {
                    term *= prob(m, t, w, factor);
                }
                value += term;
            }
            cmp(p.cmp, &value, &Rational::from_integer(0.into()))
        }
        Formula::CondProb(c) => {
            let t = point(m, &c.time);
            let both = Formula::And(c.target.clone(), c.given.clone());
            cmp(c.cmp, &prob(m, t, w, &both), &(c.bound.clone() * prob(m, t, w, &c.given)))
        }
    }
}

/// `μ_t^w` of the accessible worlds where `f` holds.
pub fn prob(m: &Model, t: TimePoint, w: WorldId, f: &Formula) -> Rational {
    let masses = m.distribution(t, w).masses();
    let mut total = Rational::from_integer(0.into());
    for v in m.worlds() {
        if related(m, t, w, v) && holds(m, v, f) {
            total += &masses[v.0];
        }
    }
    total
}
