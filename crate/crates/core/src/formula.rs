//! Abstract syntax of the temporal probability language and its desugaring
//! into the core grammar.
//!
//! The core grammar has time comparisons, `HOLDS`/`OCC` atoms, the boolean
//! connectives, inevitability `INEV[t]`, and polynomial comparisons of
//! probability terms that all share one time index. `->`, `POSS[t]` and the
//! conditional bar form `P[t](a | b) >= c` are sugar.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::rational::Rational;

macro_rules! symbol {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            /// Panics on an empty name.
            pub fn new(name: impl Into<String>) -> Self {
                let name: String = name.into();
                assert!(!name.is_empty(), concat!(stringify!($name), " must be nonempty"));
                Self(Arc::from(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(name: &str) -> Self {
                Self::new(name)
            }
        }
    };
}

symbol!(
    /// Name of a time point, denoted by the model's time map.
    TimeSymbol
);
symbol!(FactSymbol);
symbol!(EventSymbol);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparator {
    Ge,
    Le,
    Eq,
    Gt,
    Lt,
}

impl Comparator {
    pub const ALL: [Comparator; 5] = [
        Comparator::Ge,
        Comparator::Le,
        Comparator::Eq,
        Comparator::Gt,
        Comparator::Lt,
    ];

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Comparator::Ge => lhs >= rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Lt => lhs < rhs,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Comparator::Ge => ">=",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Gt => ">",
            Comparator::Lt => "<",
        }
    }
}

/// `coeff * P[t](f1) * ... * P[t](fk)`; no factors means a constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub coeff: Rational,
    pub factors: Vec<Formula>,
}

impl Monomial {
    pub fn constant(coeff: Rational) -> Self {
        Monomial { coeff, factors: Vec::new() }
    }

    pub fn term(coeff: Rational, factors: Vec<Formula>) -> Self {
        Monomial { coeff, factors }
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }
}

/// A sum of monomials kept in canonical form: non-constant monomials in
/// their original order, then at most one nonzero constant monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polynomial {
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut constant = Rational::zero();
        let mut out = Vec::new();
        for m in monomials {
            if m.is_constant() {
                constant += m.coeff;
            } else {
                out.push(m);
            }
        }
        if !constant.is_zero() {
            out.push(Monomial::constant(constant));
        }
        Polynomial { monomials: out }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn constant_term(&self) -> Rational {
        match self.monomials.last() {
            Some(m) if m.is_constant() => m.coeff.clone(),
            _ => Rational::zero(),
        }
    }

    /// `self - other`, renormalized.
    pub fn minus(self, other: Polynomial) -> Polynomial {
        let negated = other
            .monomials
            .into_iter()
            .map(|m| Monomial { coeff: -m.coeff, factors: m.factors });
        Polynomial::new(self.monomials.into_iter().chain(negated))
    }

    fn map_factors(&self, mut f: impl FnMut(&Formula) -> Formula) -> Polynomial {
        Polynomial {
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial {
                    coeff: m.coeff.clone(),
                    factors: m.factors.iter().map(&mut f).collect(),
                })
                .collect(),
        }
    }
}

/// `poly cmp 0`, every probability term at `time`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbCmp {
    pub time: TimeSymbol,
    pub poly: Polynomial,
    pub cmp: Comparator,
}

/// Sugar for `P[t](target & given) - bound * P[t](given) cmp 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CondProbCmp {
    pub time: TimeSymbol,
    pub target: Box<Formula>,
    pub given: Box<Formula>,
    pub cmp: Comparator,
    pub bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    TimeEq(TimeSymbol, TimeSymbol),
    TimeLe(TimeSymbol, TimeSymbol),
    TimeLt(TimeSymbol, TimeSymbol),
    Holds(TimeSymbol, TimeSymbol, FactSymbol),
    Occ(TimeSymbol, TimeSymbol, EventSymbol),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Inev(TimeSymbol, Box<Formula>),
    Prob(ProbCmp),
    Implies(Box<Formula>, Box<Formula>),
    Poss(TimeSymbol, Box<Formula>),
    CondProb(CondProbCmp),
}

impl Formula {
    pub fn holds(start: &str, end: &str, fact: &str) -> Formula {
        Formula::Holds(start.into(), end.into(), fact.into())
    }

    pub fn occ(start: &str, end: &str, event: &str) -> Formula {
        Formula::Occ(start.into(), end.into(), event.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn inev(t: &str, f: Formula) -> Formula {
        Formula::Inev(t.into(), Box::new(f))
    }

    pub fn poss(t: &str, f: Formula) -> Formula {
        Formula::Poss(t.into(), Box::new(f))
    }

    /// `P[t](f) cmp bound`, stored as `P[t](f) - bound cmp 0`.
    pub fn prob(t: &str, f: Formula, cmp: Comparator, bound: Rational) -> Formula {
        let poly = Polynomial::new([
            Monomial::term(Rational::one(), alloc::vec![f]),
            Monomial::constant(-bound),
        ]);
        Formula::Prob(ProbCmp { time: t.into(), poly, cmp })
    }

    pub fn cond_prob(t: &str, target: Formula, given: Formula, cmp: Comparator, bound: Rational) -> Formula {
        Formula::CondProb(CondProbCmp {
            time: t.into(),
            target: Box::new(target),
            given: Box::new(given),
            cmp,
            bound,
        })
    }

    pub fn is_core(&self) -> bool {
        match self {
            Formula::TimeEq(..)
            | Formula::TimeLe(..)
            | Formula::TimeLt(..)
            | Formula::Holds(..)
            | Formula::Occ(..) => true,
            Formula::Not(f) | Formula::Inev(_, f) => f.is_core(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_core() && b.is_core(),
            Formula::Prob(p) => p.poly.monomials().iter().all(|m| m.factors.iter().all(Formula::is_core)),
            Formula::Implies(..) | Formula::Poss(..) | Formula::CondProb(..) => false,
        }
    }

    /// Number of nested `INEV`/`POSS`/`P` operators on the deepest path.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::TimeEq(..)
            | Formula::TimeLe(..)
            | Formula::TimeLt(..)
            | Formula::Holds(..)
            | Formula::Occ(..) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Inev(_, f) | Formula::Poss(_, f) => 1 + f.modal_depth(),
            Formula::Prob(p) => {
                1 + p
                    .poly
                    .monomials()
                    .iter()
                    .flat_map(|m| m.factors.iter())
                    .map(Formula::modal_depth)
                    .max()
                    .unwrap_or(0)
            }
            Formula::CondProb(c) => 1 + c.target.modal_depth().max(c.given.modal_depth()),
        }
    }
}

/// Rewrites every sugar node into the core grammar.
pub fn desugar(f: &Formula) -> Formula {
    match f {
        Formula::TimeEq(..)
        | Formula::TimeLe(..)
        | Formula::TimeLt(..)
        | Formula::Holds(..)
        | Formula::Occ(..) => f.clone(),
        Formula::Not(g) => Formula::not(desugar(g)),
        Formula::And(a, b) => Formula::and(desugar(a), desugar(b)),
        Formula::Or(a, b) => Formula::or(desugar(a), desugar(b)),
        Formula::Inev(t, g) => Formula::Inev(t.clone(), Box::new(desugar(g))),
        Formula::Prob(p) => Formula::Prob(ProbCmp {
            time: p.time.clone(),
            poly: p.poly.map_factors(desugar),
            cmp: p.cmp,
        }),
        Formula::Implies(a, b) => Formula::or(Formula::not(desugar(a)), desugar(b)),
        Formula::Poss(t, g) => Formula::not(Formula::Inev(t.clone(), Box::new(Formula::not(desugar(g))))),
        Formula::CondProb(c) => {
            let target = desugar(&c.target);
            let given = desugar(&c.given);
            let poly = Polynomial::new([
                Monomial::term(Rational::one(), alloc::vec![Formula::and(target, given.clone())]),
                Monomial::term(-c.bound.clone(), alloc::vec![given]),
            ]);
            Formula::Prob(ProbCmp { time: c.time.clone(), poly, cmp: c.cmp })
        }
    }
}

/// Nonlogical symbols occurring in a formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub times: BTreeSet<TimeSymbol>,
    pub facts: BTreeSet<FactSymbol>,
    pub events: BTreeSet<EventSymbol>,
}

impl Vocabulary {
    pub fn of(f: &Formula) -> Self {
        let mut v = Vocabulary::default();
        v.collect(f);
        v
    }

    pub fn collect(&mut self, f: &Formula) {
        match f {
            Formula::TimeEq(a, b) | Formula::TimeLe(a, b) | Formula::TimeLt(a, b) => {
                self.times.insert(a.clone());
                self.times.insert(b.clone());
            }
            Formula::Holds(a, b, fact) => {
                self.times.insert(a.clone());
                self.times.insert(b.clone());
                self.facts.insert(fact.clone());
            }
            Formula::Occ(a, b, event) => {
                self.times.insert(a.clone());
                self.times.insert(b.clone());
                self.events.insert(event.clone());
            }
            Formula::Not(g) => self.collect(g),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                self.collect(a);
                self.collect(b);
            }
            Formula::Inev(t, g) | Formula::Poss(t, g) => {
                self.times.insert(t.clone());
                self.collect(g);
            }
            Formula::Prob(p) => {
                self.times.insert(p.time.clone());
                for m in p.poly.monomials() {
                    for factor in &m.factors {
                        self.collect(factor);
                    }
                }
            }
            Formula::CondProb(c) => {
                self.times.insert(c.time.clone());
                self.collect(&c.target);
                self.collect(&c.given);
            }
        }
    }
}

pub fn time_symbols(f: &Formula) -> BTreeSet<TimeSymbol> {
    Vocabulary::of(f).times
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn ts(names: &[&str]) -> BTreeSet<TimeSymbol> {
        names.iter().map(|n| TimeSymbol::from(*n)).collect()
    }

    #[test]
    fn poss_desugars_to_not_inev_not() {
        let phi = Formula::occ("t1", "t2", "raise");
        let got = desugar(&Formula::poss("t0", phi.clone()));
        assert_eq!(got, Formula::not(Formula::inev("t0", Formula::not(phi))));
    }

    #[test]
    fn conditional_bar_desugars_to_product_form() {
        let phi = Formula::holds("t2", "t2", "done");
        let psi = Formula::occ("t1", "t2", "bake");
        let sugar = Formula::cond_prob("t0", phi.clone(), psi.clone(), Comparator::Ge, ratio(9, 10));
        let expected = Formula::Prob(ProbCmp {
            time: "t0".into(),
            poly: Polynomial::new([
                Monomial::term(Rational::one(), alloc::vec![Formula::and(phi, psi.clone())]),
                Monomial::term(ratio(-9, 10), alloc::vec![psi]),
            ]),
            cmp: Comparator::Ge,
        });
        assert_eq!(desugar(&sugar), expected);
    }

    #[test]
    fn implies_desugars_to_disjunction() {
        let a = Formula::TimeLt("a".into(), "b".into());
        let b = Formula::holds("a", "b", "f");
        assert_eq!(
            desugar(&Formula::implies(a.clone(), b.clone())),
            Formula::or(Formula::not(a), b)
        );
    }

    #[test]
    fn core_formula_is_fixed_point() {
        let f = Formula::and(
            Formula::inev("t", Formula::holds("a", "b", "f")),
            Formula::prob("t", Formula::occ("a", "b", "e"), Comparator::Lt, ratio(1, 3)),
        );
        assert!(f.is_core());
        assert_eq!(desugar(&f), f);
    }

    #[test]
    fn desugar_removes_nested_sugar_inside_probability_terms() {
        let inner = Formula::poss("t1", Formula::occ("t1", "t2", "e"));
        let f = Formula::prob("t0", Formula::implies(inner.clone(), inner), Comparator::Ge, ratio(1, 2));
        assert!(!f.is_core());
        assert!(desugar(&f).is_core());
    }

    #[test]
    fn time_symbols_examples() {
        assert_eq!(time_symbols(&Formula::holds("t1", "t2", "f")), ts(&["t1", "t2"]));
        let train = Formula::prob(
            "t0",
            Formula::inev("t1", Formula::occ("t2", "t3", "crash")),
            Comparator::Eq,
            ratio(1, 2),
        );
        assert_eq!(time_symbols(&train), ts(&["t0", "t1", "t2", "t3"]));
        assert_eq!(time_symbols(&Formula::TimeEq("t1".into(), "t1".into())), ts(&["t1"]));
    }

    #[test]
    fn polynomial_canonical_form() {
        let p = Formula::occ("a", "b", "e");
        let poly = Polynomial::new([
            Monomial::constant(ratio(1, 2)),
            Monomial::term(ratio(0, 1), alloc::vec![p.clone()]),
            Monomial::term(ratio(2, 1), alloc::vec![p.clone()]),
            Monomial::constant(ratio(-1, 2)),
        ]);
        assert_eq!(
            poly.monomials(),
            &[
                Monomial::term(ratio(0, 1), alloc::vec![p.clone()]),
                Monomial::term(ratio(2, 1), alloc::vec![p])
            ]
        );
        assert!(poly.constant_term().is_zero());
    }

    #[test]
    fn comparator_semantics() {
        let (a, b) = (ratio(1, 2), ratio(2, 3));
        assert!(Comparator::Lt.holds(&a, &b));
        assert!(Comparator::Le.holds(&a, &a));
        assert!(!Comparator::Gt.holds(&a, &a));
        assert!(Comparator::Ge.holds(&b, &a));
        assert!(Comparator::Eq.holds(&b, &b));
    }

    #[test]
    #[should_panic]
    fn empty_symbol_rejected() {
        let _ = TimeSymbol::new("");
    }
}
