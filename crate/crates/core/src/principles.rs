//! Valid-sentence families, Miller's principle and the expected-value identity.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::formula::{Comparator, Formula, Monomial, Polynomial, ProbCmp, TimeSymbol};
use crate::model::{Model, TimePoint, WorldId};
use crate::rational::Rational;
use crate::semantics::{EvalError, Evaluator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Schema {
    PastDetermined,
    InevitableCertain,
    InevitabilityPersists,
    Detachment,
    Miller,
}

impl Schema {
    pub const ALL: [Schema; 5] = [
        Schema::PastDetermined,
        Schema::InevitableCertain,
        Schema::InevitabilityPersists,
        Schema::Detachment,
        Schema::Miller,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::PastDetermined => "past-determined",
            Schema::InevitableCertain => "inevitable-certain",
            Schema::InevitabilityPersists => "inevitability-persists",
            Schema::Detachment => "detachment",
            Schema::Miller => "miller",
        }
    }

    pub fn from_name(name: &str) -> Option<Schema> {
        Schema::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaInstance {
    /// `(t1 <= at) -> (P[at](atom) = 0 | P[at](atom) = 1)` where `atom` is a
    /// HOLDS or OCC over `(t0, t1)`.
    PastDetermined { at: TimeSymbol, atom: Formula },
    InevitableCertain { time: TimeSymbol, phi: Formula },
    /// Read without the stray `= 1`: `(t1 <= t2) -> (INEV[t1](phi) -> INEV[t2](phi))`.
    InevitabilityPersists { t1: TimeSymbol, t2: TimeSymbol, phi: Formula },
    /// If `premise` entails `conclusion` in the model, `P[time](conclusion) >= P[time](premise)`.
    Detachment { time: TimeSymbol, premise: Formula, conclusion: Formula },
    Miller { t1: TimeSymbol, t2: TimeSymbol, phi: Formula, alpha: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("past-determined needs a HOLDS or OCC atom")]
    NotAnAtom,
    #[error("alpha {0} lies outside [0, 1]")]
    AlphaOutOfRange(Rational),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemaOutcome {
    Valid,
    Counterexample(WorldId),
}

impl SchemaOutcome {
    pub fn is_valid(self) -> bool {
        self == SchemaOutcome::Valid
    }
}

fn sym(t: &TimeSymbol) -> &str {
    t.as_str()
}

fn prob_eq(t: &TimeSymbol, f: Formula, value: Rational) -> Formula {
    Formula::prob(sym(t), f, Comparator::Eq, value)
}

impl SchemaInstance {
    pub fn schema(&self) -> Schema {
        match self {
            SchemaInstance::PastDetermined { .. } => Schema::PastDetermined,
            SchemaInstance::InevitableCertain { .. } => Schema::InevitableCertain,
            SchemaInstance::InevitabilityPersists { .. } => Schema::InevitabilityPersists,
            SchemaInstance::Detachment { .. } => Schema::Detachment,
            SchemaInstance::Miller { .. } => Schema::Miller,
        }
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        match self {
            SchemaInstance::PastDetermined { atom, .. } => match atom {
                Formula::Holds(..) | Formula::Occ(..) => Ok(()),
                _ => Err(SchemaError::NotAnAtom),
            },
            SchemaInstance::Miller { alpha, .. } => {
                if *alpha >= Rational::zero() && *alpha <= Rational::one() {
                    Ok(())
                } else {
                    Err(SchemaError::AlphaOutOfRange(alpha.clone()))
                }
            }
            _ => Ok(()),
        }
    }

    /// The sentence this instance asserts. For detachment this is the
    /// conclusion of the rule; the premise is checked separately.
    pub fn formula(&self) -> Result<Formula, SchemaError> {
        self.validate()?;
        Ok(match self {
            SchemaInstance::PastDetermined { at, atom } => {
                let end = match atom {
                    Formula::Holds(_, end, _) | Formula::Occ(_, end, _) => end.clone(),
                    _ => unreachable!("validated"),
                };
                Formula::implies(
                    Formula::TimeLe(end, at.clone()),
                    Formula::or(
                        prob_eq(at, atom.clone(), Rational::zero()),
                        prob_eq(at, atom.clone(), Rational::one()),
                    ),
                )
            }
            SchemaInstance::InevitableCertain { time, phi } => Formula::implies(
                Formula::inev(sym(time), phi.clone()),
                prob_eq(time, phi.clone(), Rational::one()),
            ),
            SchemaInstance::InevitabilityPersists { t1, t2, phi } => Formula::implies(
                Formula::TimeLe(t1.clone(), t2.clone()),
                Formula::implies(Formula::inev(sym(t1), phi.clone()), Formula::inev(sym(t2), phi.clone())),
            ),
            SchemaInstance::Detachment { time, premise, conclusion } => {
                let poly = Polynomial::new([
                    Monomial::term(Rational::one(), alloc::vec![conclusion.clone()]),
                    Monomial::term(-Rational::one(), alloc::vec![premise.clone()]),
                ]);
                Formula::Prob(ProbCmp { time: time.clone(), poly, cmp: Comparator::Ge })
            }
            SchemaInstance::Miller { t1, t2, phi, alpha } => {
                let future = Formula::prob(sym(t2), phi.clone(), Comparator::Ge, alpha.clone());
                let poly = Polynomial::new([
                    Monomial::term(Rational::one(), alloc::vec![Formula::and(phi.clone(), future.clone())]),
                    Monomial::term(-alpha.clone(), alloc::vec![future]),
                ]);
                Formula::implies(
                    Formula::TimeLe(t1.clone(), t2.clone()),
                    Formula::Prob(ProbCmp { time: t1.clone(), poly, cmp: Comparator::Ge }),
                )
            }
        })
    }
}

pub fn check_schema(m: &Model, inst: &SchemaInstance) -> Result<SchemaOutcome, SchemaError> {
    check_schema_with(&Evaluator::new(m), inst)
}

/// [`check_schema`] sharing an evaluator's memo across instances.
pub fn check_schema_with(ev: &Evaluator<'_>, inst: &SchemaInstance) -> Result<SchemaOutcome, SchemaError> {
    let sentence = inst.formula()?;
    if let SchemaInstance::Detachment { premise, conclusion, .. } = inst {
        let (p, c) = (ev.truth(premise)?, ev.truth(conclusion)?);
        if p.iter().zip(c.iter()).any(|(a, b)| *a && !*b) {
            return Ok(SchemaOutcome::Valid);
        }
    }
    Ok(match ev.counterexample(&sentence)? {
        None => SchemaOutcome::Valid,
        Some(w) => SchemaOutcome::Counterexample(w),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExpectError {
    #[error("time {t} is later than {future}")]
    FutureBeforeNow { t: String, future: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `Σ μ_t^w(c) · P_{t2}(f)` over the `t2`-classes `c` meeting `w`'s class at `t`.
pub fn expected_future_probability(
    m: &Model,
    t: TimePoint,
    t2: TimePoint,
    w: WorldId,
    f: &Formula,
) -> Result<Rational, ExpectError> {
    expected_future_probability_with(&Evaluator::new(m), t, t2, w, f)
}

pub fn expected_future_probability_with(
    ev: &Evaluator<'_>,
    t: TimePoint,
    t2: TimePoint,
    w: WorldId,
    f: &Formula,
) -> Result<Rational, ExpectError> {
    let m = ev.model();
    if t > t2 {
        return Err(ExpectError::FutureBeforeNow { t: m.time_name(t), future: m.time_name(t2) });
    }
    let future = ev.probabilities(t2, f)?;
    let here = m.accessible(t, w);
    let dist = m.distribution(t, w);
    let mut total = Rational::zero();
    for class in m.classes(t2) {
        let inside: Vec<WorldId> = class.iter().copied().filter(|v| here.binary_search(v).is_ok()).collect();
        if let Some(rep) = inside.first() {
            total += dist.measure(&inside) * &future[rep.0];
        }
    }
    Ok(total)
}

/// Time symbol pairs `(a, b)` with `a` denoting a point no later than `b`,
/// one symbol per point.
pub fn ordered_time_pairs(m: &Model) -> Vec<(TimeSymbol, TimeSymbol)> {
    let reps = representative_symbols(m);
    let mut out = Vec::new();
    for (i, a) in reps.iter().enumerate() {
        for b in &reps[i..] {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

/// One symbol per time point that has any, in time order.
pub fn representative_symbols(m: &Model) -> Vec<TimeSymbol> {
    m.time_points()
        .filter_map(|t| m.time_symbols().iter().find(|(_, p)| **p == t).map(|(s, _)| s.clone()))
        .collect()
}

/// `{0, 1/n, ..., 1}`.
pub fn alpha_grid(n: u32) -> Vec<Rational> {
    let n = n.max(1);
    (0..=n).map(|k| crate::rational::ratio(k as i64, n as i64)).collect()
}

/// A place where a later distribution is not the earlier one conditioned on
/// the later class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceDefect {
    pub earlier: TimePoint,
    pub later: TimePoint,
    pub from: WorldId,
    pub world: WorldId,
    pub conditioned: Rational,
    pub actual: Rational,
}

impl fmt::Display for CoherenceDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mass of world {} at later time {} is {} but conditioning the distribution at {} from world {} gives {}",
            self.world.0, self.later.0, self.actual, self.earlier.0, self.from.0, self.conditioned
        )
    }
}

/// Miller's principle and the expected-value identity need every later
/// distribution to be the earlier one conditioned on the later class, for
/// classes of positive earlier mass. C1-C6 alone do not force this.
pub fn coherence_report(m: &Model) -> Vec<CoherenceDefect> {
    let mut out = Vec::new();
    let times: Vec<TimePoint> = m.time_points().collect();
    for (i, &earlier) in times.iter().enumerate() {
        for &later in &times[i + 1..] {
            for class in m.classes(earlier) {
                let Some(&from) = class.first() else { continue };
                let dist = m.distribution(earlier, from);
                for sub in m.classes(later) {
                    let mass = dist.measure(sub);
                    if mass.is_zero() {
                        continue;
                    }
                    let later_dist = m.distribution(later, sub[0]);
                    for &v in sub {
                        let conditioned = dist.mass(v) / &mass;
                        let actual = later_dist.mass(v).clone();
                        if conditioned != actual {
                            out.push(CoherenceDefect { earlier, later, from, world: v, conditioned, actual });
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn describe_instance(inst: &SchemaInstance) -> String {
    match inst.formula() {
        Ok(f) => crate::syntax::print_formula(&f),
        Err(e) => e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, AccessibilityDescription, ClassDistribution, ExtentRef, ModelDescription};
    use crate::rational::{int, ratio};
    use crate::semantics::probability;
    use crate::syntax::parse_formula;
    use alloc::borrow::ToOwned;
    use alloc::vec;

    fn s(x: &str) -> String {
        x.to_owned()
    }

    fn ext(w: &str, a: &str, b: &str) -> ExtentRef {
        ExtentRef { world: s(w), start: s(a), end: s(b) }
    }

    fn cd(class: &[&str], dist: &[(&str, Rational)]) -> ClassDistribution {
        ClassDistribution {
            class: class.iter().map(|c| s(c)).collect(),
            dist: dist.iter().map(|(w, q)| (s(w), q.clone())).collect(),
        }
    }

    fn coin() -> Model {
        let worlds = ["fh", "ft", "bh", "bt"];
        let d = ModelDescription {
            times: vec![(s("t0"), int(0)), (s("t1"), int(1)), (s("t2"), int(2))],
            worlds: worlds.iter().map(|w| s(w)).collect(),
            facts: vec![],
            events: vec![
                (s("choose-fair"), vec![ext("fh", "t0", "t1"), ext("ft", "t0", "t1")]),
                (s("choose-biased"), vec![ext("bh", "t0", "t1"), ext("bt", "t0", "t1")]),
                (s("heads"), vec![ext("fh", "t1", "t2"), ext("bh", "t1", "t2")]),
            ],
            accessibility: AccessibilityDescription::Derived,
            prob: vec![
                (
                    s("t0"),
                    vec![cd(
                        &worlds,
                        &[("fh", ratio(1, 4)), ("ft", ratio(1, 4)), ("bh", ratio(7, 20)), ("bt", ratio(3, 20))],
                    )],
                ),
                (
                    s("t1"),
                    vec![
                        cd(&["fh", "ft"], &[("fh", ratio(1, 2)), ("ft", ratio(1, 2))]),
                        cd(&["bh", "bt"], &[("bh", ratio(7, 10)), ("bt", ratio(3, 10))]),
                    ],
                ),
                (
                    s("t2"),
                    worlds.iter().map(|w| cd(&[w], &[(w, int(1))])).collect(),
                ),
            ],
        };
        build_model(&d).unwrap()
    }

    fn heads() -> Formula {
        Formula::occ("t1", "t2", "heads")
    }

    #[test]
    fn schema_names_round_trip() {
        for s in Schema::ALL {
            assert_eq!(Schema::from_name(s.name()), Some(s));
        }
        assert_eq!(Schema::from_name("nope"), None);
    }

    #[test]
    fn miller_on_coin() {
        let m = coin();
        let inst = SchemaInstance::Miller { t1: "t0".into(), t2: "t1".into(), phi: heads(), alpha: ratio(7, 10) };
        assert_eq!(check_schema(&m, &inst), Ok(SchemaOutcome::Valid));
        let lhs = parse_formula("OCC(t1, t2, heads) & P[t1](OCC(t1, t2, heads)) >= 7/10").unwrap();
        let w = m.world("fh").unwrap();
        assert_eq!(probability(&m, TimePoint(0), w, &lhs), Ok(ratio(7, 20)));
        let zero = SchemaInstance::Miller { t1: "t0".into(), t2: "t1".into(), phi: heads(), alpha: int(0) };
        assert!(check_schema(&m, &zero).unwrap().is_valid());
    }

    #[test]
    fn miller_rejects_bad_alpha() {
        let m = coin();
        let inst = SchemaInstance::Miller { t1: "t0".into(), t2: "t1".into(), phi: heads(), alpha: ratio(3, 2) };
        assert_eq!(check_schema(&m, &inst), Err(SchemaError::AlphaOutOfRange(ratio(3, 2))));
    }

    #[test]
    fn miller_sentence_reparses() {
        let inst = SchemaInstance::Miller { t1: "t0".into(), t2: "t1".into(), phi: heads(), alpha: ratio(7, 10) };
        let f = inst.formula().unwrap();
        assert_eq!(parse_formula(&crate::syntax::print_formula(&f)).unwrap(), f);
    }

    #[test]
    fn expected_value_on_coin() {
        let m = coin();
        for w in m.worlds() {
            assert_eq!(expected_future_probability(&m, TimePoint(0), TimePoint(1), w, &heads()), Ok(ratio(3, 5)));
            assert_eq!(expected_future_probability(&m, TimePoint(0), TimePoint(2), w, &heads()), Ok(ratio(3, 5)));
        }
        let w = m.world("bt").unwrap();
        assert_eq!(expected_future_probability(&m, TimePoint(1), TimePoint(1), w, &heads()), Ok(ratio(7, 10)));
        let never = Formula::and(heads(), Formula::not(heads()));
        assert_eq!(expected_future_probability(&m, TimePoint(0), TimePoint(1), w, &never), Ok(int(0)));
        assert!(matches!(
            expected_future_probability(&m, TimePoint(2), TimePoint(1), w, &heads()),
            Err(ExpectError::FutureBeforeNow { .. })
        ));
    }

    #[test]
    fn valid_families_on_coin() {
        let m = coin();
        let ev = Evaluator::new(&m);
        let pairs = ordered_time_pairs(&m);
        assert_eq!(pairs.len(), 6);
        let phis = [heads(), Formula::occ("t0", "t1", "choose-fair"), Formula::poss("t1", heads())];
        for (a, b) in &pairs {
            for phi in &phis {
                let insts = [
                    SchemaInstance::InevitableCertain { time: a.clone(), phi: phi.clone() },
                    SchemaInstance::InevitabilityPersists { t1: a.clone(), t2: b.clone(), phi: phi.clone() },
                    SchemaInstance::InevitabilityPersists { t1: b.clone(), t2: a.clone(), phi: phi.clone() },
                ];
                for inst in &insts {
                    assert!(check_schema_with(&ev, inst).unwrap().is_valid(), "{}", describe_instance(inst));
                }
            }
            let atom = Formula::Occ(a.clone(), b.clone(), "heads".into());
            for (_, at) in &pairs {
                let inst = SchemaInstance::PastDetermined { at: at.clone(), atom: atom.clone() };
                assert!(check_schema_with(&ev, &inst).unwrap().is_valid());
            }
        }
    }

    #[test]
    fn past_determined_needs_atom() {
        let inst = SchemaInstance::PastDetermined { at: "t0".into(), atom: Formula::not(heads()) };
        assert_eq!(inst.formula(), Err(SchemaError::NotAnAtom));
    }

    #[test]
    fn detachment_is_vacuous_without_entailment() {
        let m = coin();
        let fair = Formula::occ("t0", "t1", "choose-fair");
        let both = Formula::and(heads(), fair.clone());
        let ok = SchemaInstance::Detachment { time: "t0".into(), premise: both.clone(), conclusion: fair.clone() };
        assert!(check_schema(&m, &ok).unwrap().is_valid());
        let reversed = SchemaInstance::Detachment { time: "t0".into(), premise: fair, conclusion: both };
        assert!(check_schema(&m, &reversed).unwrap().is_valid());
    }

    #[test]
    fn persistence_fails_without_refinement() {
        // Worlds split at t0 and merge again at t1, against C1.
        let d = ModelDescription {
            times: vec![(s("t0"), int(0)), (s("t1"), int(1))],
            worlds: vec![s("a"), s("b")],
            facts: vec![(s("lit"), vec![ext("a", "t0", "t0")])],
            events: vec![],
            accessibility: AccessibilityDescription::Explicit(vec![
                (s("t0"), vec![vec![s("a")], vec![s("b")]]),
                (s("t1"), vec![vec![s("a"), s("b")]]),
            ]),
            prob: vec![
                (s("t0"), vec![cd(&["a"], &[("a", int(1))]), cd(&["b"], &[("b", int(1))])]),
                (s("t1"), vec![cd(&["a", "b"], &[("a", ratio(1, 2)), ("b", ratio(1, 2))])]),
            ],
        };
        let m = crate::model::build_unchecked(&d).unwrap();
        let inst = SchemaInstance::InevitabilityPersists {
            t1: "t0".into(),
            t2: "t1".into(),
            phi: Formula::holds("t0", "t0", "lit"),
        };
        assert_eq!(check_schema(&m, &inst), Ok(SchemaOutcome::Counterexample(m.world("a").unwrap())));
    }

    #[test]
    fn coin_is_coherent() {
        assert!(coherence_report(&coin()).is_empty());
    }

    #[test]
    fn incoherent_model_breaks_miller() {
        let mut parts = coin().to_parts();
        let t0 = &mut parts.distributions[0];
        let flat = crate::model::Distribution::new(vec![ratio(1, 4); 4]).unwrap();
        for d in t0.iter_mut() {
            *d = flat.clone();
        }
        let m = Model::from_parts(parts).unwrap();
        assert!(crate::constraints::check_constraints(&m, Default::default()).is_clean());
        assert!(!coherence_report(&m).is_empty());
        let inst = SchemaInstance::Miller { t1: "t0".into(), t2: "t1".into(), phi: heads(), alpha: ratio(7, 10) };
        assert!(!check_schema(&m, &inst).unwrap().is_valid());
        assert_ne!(
            expected_future_probability(&m, TimePoint(0), TimePoint(1), WorldId(0), &heads()).unwrap(),
            probability(&m, TimePoint(0), WorldId(0), &heads()).unwrap()
        );
    }

    #[test]
    fn alpha_grid_of_ninths() {
        let g = alpha_grid(9);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], int(0));
        assert_eq!(g[9], int(1));
        assert_eq!(g[3], ratio(1, 3));
    }
}
