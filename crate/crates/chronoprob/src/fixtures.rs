//! The built-in example models, their queries, and single-edit mutants
//! used to exercise the constraint auditor.

use std::fmt;

use chronoprob_core::causality::{analyze_cause_with, EventOccurrence};
use chronoprob_core::constraints::Constraint;
use chronoprob_core::formula::Formula;
use chronoprob_core::model::{build_model, AccessibilityDescription, ExtentRef, Model, ModelDescription};
use chronoprob_core::principles::{check_schema_with, expected_future_probability_with, SchemaInstance};
use chronoprob_core::rational::{parse_rational, Rational};
use chronoprob_core::semantics::Evaluator;
use chronoprob_core::syntax::parse_formula;

use crate::model_file::parse_model;

pub const NAMES: [&str; 3] = ["coin", "car", "carry"];

pub struct Fixture {
    pub name: &'static str,
    pub title: &'static str,
    pub narrative: &'static str,
    pub source: &'static str,
    pub queries: Vec<Query>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Premise,
    Conclusion,
}

#[derive(Clone, Debug)]
pub enum Ask {
    /// `P_time^world(formula)`.
    Probability { time: String, world: String, formula: Formula },
    /// Expected `time2` chance of `formula` as seen from `time`.
    Expected { time: String, future: String, world: String, formula: Formula },
    /// Truth at one world.
    At { world: String, formula: Formula },
    /// Truth at every world.
    Valid { formula: Formula },
    Schema(SchemaInstance),
    /// Actual causation at a world.
    Cause { world: String, cause: EventOccurrence, effect: EventOccurrence },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expect {
    Equal(Rational),
    AtLeast(Rational),
    AtMost(Rational),
    Truth(bool),
}

#[derive(Clone, Debug)]
pub struct Query {
    pub role: Role,
    pub label: &'static str,
    pub ask: Ask,
    pub expect: Expect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observed {
    Value(Rational),
    Truth(bool),
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Value(q) => write!(f, "{q}"),
            Observed::Truth(b) => write!(f, "{b}"),
        }
    }
}

impl Expect {
    pub fn accepts(&self, seen: &Observed) -> bool {
        match (self, seen) {
            (Expect::Equal(q), Observed::Value(v)) => v == q,
            (Expect::AtLeast(q), Observed::Value(v)) => v >= q,
            (Expect::AtMost(q), Observed::Value(v)) => v <= q,
            (Expect::Truth(b), Observed::Truth(v)) => v == b,
            _ => false,
        }
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Equal(q) => write!(f, "= {q}"),
            Expect::AtLeast(q) => write!(f, ">= {q}"),
            Expect::AtMost(q) => write!(f, "<= {q}"),
            Expect::Truth(b) => write!(f, "{b}"),
        }
    }
}

pub struct Answer<'a> {
    pub query: &'a Query,
    pub observed: Observed,
    pub ok: bool,
}

impl Fixture {
    pub fn description(&self) -> ModelDescription {
        parse_model(self.source).expect("fixture file parses")
    }

    pub fn model(&self) -> Model {
        build_model(&self.description()).expect("fixture model is clean")
    }

    /// Evaluates every query on `m`.
    pub fn answer(&self, m: &Model) -> Result<Vec<Answer<'_>>, String> {
        let ev = Evaluator::new(m);
        self.queries
            .iter()
            .map(|q| {
                let observed = ask(&ev, &q.ask)?;
                let ok = q.expect.accepts(&observed);
                Ok(Answer { query: q, observed, ok })
            })
            .collect()
    }
}

pub fn ask(ev: &Evaluator<'_>, a: &Ask) -> Result<Observed, String> {
    let m = ev.model();
    let world = |w: &str| m.world(w).map_err(|e| e.to_string());
    let time = |t: &str| m.time(t).map_err(|e| e.to_string());
    let s = |e: &dyn fmt::Display| e.to_string();
    Ok(match a {
        Ask::Probability { time: t, world: w, formula } => {
            Observed::Value(ev.probability(time(t)?, world(w)?, formula).map_err(|e| s(&e))?)
        }
        Ask::Expected { time: t, future, world: w, formula } => Observed::Value(
            expected_future_probability_with(ev, time(t)?, time(future)?, world(w)?, formula).map_err(|e| s(&e))?,
        ),
        Ask::At { world: w, formula } => Observed::Truth(ev.holds_at(world(w)?, formula).map_err(|e| s(&e))?),
        Ask::Valid { formula } => Observed::Truth(ev.truth(formula).map_err(|e| s(&e))?.iter().all(|b| *b)),
        Ask::Schema(inst) => Observed::Truth(check_schema_with(ev, inst).map_err(|e| s(&e))?.is_valid()),
        Ask::Cause { world: w, cause, effect } => {
            Observed::Truth(analyze_cause_with(ev, world(w)?, cause, effect).map_err(|e| s(&e))?.actual)
        }
    })
}

fn f(text: &str) -> Formula {
    parse_formula(text).unwrap_or_else(|e| panic!("fixture formula `{text}`: {e}"))
}

fn q(text: &str) -> Rational {
    parse_rational(text).expect("fixture rational")
}

fn prob(role: Role, label: &'static str, time: &str, world: &str, formula: &str, expect: Expect) -> Query {
    Query { role, label, ask: Ask::Probability { time: time.into(), world: world.into(), formula: f(formula) }, expect }
}

fn valid(role: Role, label: &'static str, formula: &str) -> Query {
    Query { role, label, ask: Ask::Valid { formula: f(formula) }, expect: Expect::Truth(true) }
}

fn at(label: &'static str, world: &str, formula: &str, truth: bool) -> Query {
    Query {
        role: Role::Conclusion,
        label,
        ask: Ask::At { world: world.into(), formula: f(formula) },
        expect: Expect::Truth(truth),
    }
}

pub fn fixture(name: &str) -> Option<Fixture> {
    match name {
        "coin" => Some(coin()),
        "car" => Some(car()),
        "carry" => Some(carry()),
        _ => None,
    }
}

pub fn all() -> Vec<Fixture> {
    NAMES.iter().filter_map(|n| fixture(n)).collect()
}

fn coin() -> Fixture {
    use Role::*;
    let heads = "OCC(t1, t2, heads)";
    Fixture {
        name: "coin",
        title: "Choosing a coin",
        narrative: "\
At t0 one of two coins is picked at random, the choice being settled over (t0, t1).
One coin is fair, the other lands heads 70% of the time. The coin is tossed over
(t1, t2). Once the coin is known at t1 the chance of heads is 1/2 or 7/10; at t0
the chance of heads is the average of the two, weighted by the chance of each coin.",
        source: include_str!("../fixtures/coin.json"),
        queries: vec![
            prob(Premise, "chance of picking the fair coin", "t0", "fair-heads", "OCC(t0, t1, choose-fair)", Expect::Equal(q("1/2"))),
            prob(Premise, "fair coin, chance of heads at t1", "t1", "fair-heads", heads, Expect::Equal(q("1/2"))),
            prob(Premise, "biased coin, chance of heads at t1", "t1", "biased-heads", heads, Expect::Equal(q("7/10"))),
            prob(Conclusion, "chance of heads at t0", "t0", "fair-heads", heads, Expect::Equal(q("3/5"))),
            Query {
                role: Conclusion,
                label: "expected t1 chance of heads, seen from t0",
                ask: Ask::Expected { time: "t0".into(), future: "t1".into(), world: "fair-heads".into(), formula: f(heads) },
                expect: Expect::Equal(q("3/5")),
            },
            Query {
                role: Conclusion,
                label: "Miller's principle at alpha = 7/10",
                ask: Ask::Schema(SchemaInstance::Miller {
                    t1: "t0".into(),
                    t2: "t1".into(),
                    phi: f(heads),
                    alpha: q("7/10"),
                }),
                expect: Expect::Truth(true),
            },
        ],
    }
}

fn car() -> Fixture {
    use Role::*;
    let key = "OCC(ts, ts', turn-key)";
    let start = "OCC(ts, ts', start)";
    let cold = "HOLDS(ts, ts', below-freezing)";
    Fixture {
        name: "car",
        title: "Starting the car",
        narrative: "\
The key is turned, or not, over (ts, ts') and the car starts, or not, over the same
interval. With the key turned the car starts 30% of the time when it is below
freezing. There is an 80% chance that it is below freezing over (tM, tM'), an
interval containing (ts, ts'). Key turning and temperature are independent, so the
t0 distribution is a product. Turning the key in warm weather always starts the car,
and the chance of starting reaches the bound .24 + .2 = .44 exactly. Without the key
the car still starts with chance 7/20 in the cold and 4/5 in the warm. Given these
numbers, no model lets the key raise the cold start rate above the keyless rate, so
the key acts as a cause only in warm worlds.
Worlds are named temperature/key/start: c or w, k or n, s or n.",
        source: include_str!("../fixtures/car.json"),
        queries: vec![
            valid(Premise, "cold start rate with the key", &format!("P[t0]({start} | {key} & {cold}) = 3/10")),
            valid(Premise, "chance of frost over (tM, tM')", "P[t0](HOLDS(tM, tM', below-freezing)) = 4/5"),
            valid(Premise, "key and temperature independent", &format!("P[t0]({key} & {cold}) = P[t0]({key}) * P[t0]({cold})")),
            valid(Premise, "warm start rate with the key", &format!("P[t0]({start} | {key} & ~{cold}) = 1")),
            valid(Premise, "time order", "t0 < tM & tM <= ts & ts < ts' & ts' <= tM'"),
            Query {
                role: Conclusion,
                label: "detachment from (tM, tM') to (ts, ts')",
                ask: Ask::Schema(SchemaInstance::Detachment {
                    time: "t0".into(),
                    premise: f("HOLDS(tM, tM', below-freezing)"),
                    conclusion: f(cold),
                }),
                expect: Expect::Truth(true),
            },
            prob(Conclusion, "chance of frost over (ts, ts')", "t0", "cks", cold, Expect::AtLeast(q("4/5"))),
            prob(Conclusion, "chance of start with the key", "t0", "cks", &format!("{start} & {key}"), Expect::Equal(q("6/25"))),
            prob(Conclusion, "chance of start", "t0", "cks", start, Expect::Equal(q("11/25"))),
            prob(Conclusion, "bound on the chance of start", "t0", "cks", start, Expect::AtMost(q("11/25"))),
            Query {
                role: Conclusion,
                label: "turning the key caused the start (warm world)",
                ask: Ask::Cause {
                    world: "wks".into(),
                    cause: EventOccurrence::new("turn-key", "ts", "ts'"),
                    effect: EventOccurrence::new("start", "ts", "ts'"),
                },
                expect: Expect::Truth(true),
            },
        ],
    }
}

fn carry() -> Fixture {
    use Role::*;
    let co = "OCC(t1, t2, carry-b1) & OCC(t1, t2, carry-b2)";
    Fixture {
        name: "carry",
        title: "Two carry-on bags",
        narrative: "\
Carrying two bags aboard over (t1, t2) is usually impossible when the plane is full,
and the plane is full with chance 1/2. The model has six worlds. Worlds w1-w4 settle
by t1 that both bags cannot go aboard; w5 and w6 stay in one class at t1, where
carrying both is still possible, and only in w6 does it happen. The masses are one
assignment satisfying the premises, not the only one.",
        source: include_str!("../fixtures/carry.json"),
        queries: vec![
            valid(Premise, "infeasible when full", &format!("P[now](~POSS[t1]({co}) | HOLDS(t1, t2, plane-full)) = 4/5")),
            valid(Premise, "chance the plane is full", "P[now](HOLDS(t1, t2, plane-full)) = 1/2"),
            valid(Premise, "time order", "now < t1 & t1 < t2"),
            prob(Conclusion, "chance carrying both is infeasible", "now", "w1", &format!("~POSS[t1]({co})"), Expect::AtLeast(q("2/5"))),
            prob(Conclusion, "chance the t1 chance is zero", "now", "w1", &format!("P[t1]({co}) = 0"), Expect::AtLeast(q("2/5"))),
            prob(Conclusion, "chance both bags go aboard", "now", "w1", co, Expect::AtMost(q("3/5"))),
            at("both bags aboard in w6", "w6", co, true),
            at("possible in w1", "w1", &format!("POSS[t1]({co})"), false),
            at("possible in w4", "w4", &format!("POSS[t1]({co})"), false),
            at("possible in w5", "w5", &format!("POSS[t1]({co})"), true),
        ],
    }
}

/// A single edit of a fixture that breaks one constraint.
pub struct Mutant {
    pub target: Constraint,
    pub base: &'static str,
    pub edit: &'static str,
    pub description: ModelDescription,
}

fn set_partition(d: &mut ModelDescription, time: &str, partition: &[&[&str]]) {
    let classes = match &mut d.accessibility {
        AccessibilityDescription::Explicit(c) => c,
        AccessibilityDescription::Derived => panic!("explicit R expected"),
    };
    let p = partition.iter().map(|c| c.iter().map(|w| (*w).to_owned()).collect()).collect();
    classes.iter_mut().find(|(t, _)| t == time).expect("time listed").1 = p;
}

/// A class and its masses, by name.
type Entry<'a> = (&'a [&'a str], &'a [(&'a str, &'a str)]);

fn set_prob(d: &mut ModelDescription, time: &str, entries: &[Entry<'_>]) {
    let e = entries
        .iter()
        .map(|(class, dist)| chronoprob_core::model::ClassDistribution {
            class: class.iter().map(|w| (*w).to_owned()).collect(),
            dist: dist.iter().map(|(w, m)| ((*w).to_owned(), q(m))).collect(),
        })
        .collect();
    d.prob.iter_mut().find(|(t, _)| t == time).expect("time listed").1 = e;
}

/// The coin fixture with its derived relation written out.
fn explicit_coin() -> ModelDescription {
    let mut d = coin().description();
    let classes = chronoprob_core::model::derive_canonical_r(&d).expect("coin resolves");
    d.accessibility =
        AccessibilityDescription::Explicit(d.times.iter().map(|(t, _)| t.clone()).zip(classes).collect());
    d
}

pub fn mutants() -> Vec<Mutant> {
    let (fh, ft, bh, bt) = ("fair-heads", "fair-tails", "biased-heads", "biased-tails");
    let mut out = Vec::new();

    let mut d = explicit_coin();
    set_partition(&mut d, "t0", &[&[fh, bh], &[ft, bt]]);
    set_prob(&mut d, "t0", &[(&[fh, bh], &[(fh, "5/12"), (bh, "7/12")]), (&[ft, bt], &[(ft, "5/8"), (bt, "3/8")])]);
    out.push(Mutant {
        target: Constraint::C1,
        base: "coin",
        edit: "t0 classes split by outcome, which t1 then merges",
        description: d,
    });

    let mut d = explicit_coin();
    set_partition(&mut d, "t2", &[&[fh], &[ft], &[bh], &[bt], &[bt]]);
    out.push(Mutant { target: Constraint::C2, base: "coin", edit: "biased-tails listed in two t2 classes", description: d });

    let mut d = car().description();
    let bf = &mut d.facts.iter_mut().find(|(s, _)| s == "below-freezing").expect("fact").1;
    bf.retain(|e| !(e.world == "cks" && e.start == "ts" && e.end == "ts'"));
    out.push(Mutant { target: Constraint::C3, base: "car", edit: "frost over (ts, ts') dropped in cks", description: d });

    let mut d = explicit_coin();
    let heads = &mut d.events.iter_mut().find(|(s, _)| s == "heads").expect("event").1;
    heads[0] = ExtentRef { world: fh.into(), start: "t0".into(), end: "t1".into() };
    out.push(Mutant { target: Constraint::C4, base: "coin", edit: "heads in fair-heads moved to (t0, t1)", description: d });

    let mut d = coin().description();
    set_prob(
        &mut d,
        "t1",
        &[(&[fh, ft], &[(fh, "1/2"), (bh, "1/2")]), (&[bh, bt], &[(bh, "7/10"), (bt, "3/10")])],
    );
    out.push(Mutant { target: Constraint::C5, base: "coin", edit: "half the fair class's t1 mass on biased-heads", description: d });

    let mut d = coin().description();
    set_prob(
        &mut d,
        "t1",
        &[
            (&[fh], &[(fh, "1/2"), (ft, "1/2")]),
            (&[ft], &[(fh, "1/3"), (ft, "2/3")]),
            (&[bh, bt], &[(bh, "7/10"), (bt, "3/10")]),
        ],
    );
    out.push(Mutant { target: Constraint::C6, base: "coin", edit: "fair-tails given its own t1 distribution", description: d });

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chronoprob_core::constraints::{check_constraints, C3Mode};
    use chronoprob_core::model::{build_unchecked, derive_canonical_r};
    use std::collections::BTreeSet;

    #[test]
    fn fixtures_are_clean_and_answer_as_expected() {
        for fx in all() {
            let m = fx.model();
            for mode in [C3Mode::Literal, C3Mode::Strict] {
                let report = check_constraints(&m, mode);
                let strict_exempt = fx.name == "carry" && mode == C3Mode::Strict;
                assert_eq!(report.is_clean(), !strict_exempt, "{} {mode:?}: {report}", fx.name);
            }
            for a in fx.answer(&m).unwrap() {
                assert!(a.ok, "{}: {} gave {}", fx.name, a.query.label, a.observed);
            }
        }
    }

    #[test]
    fn car_relation_matches_derived() {
        let d = car().description();
        let AccessibilityDescription::Explicit(explicit) = &d.accessibility else { panic!() };
        let derived = derive_canonical_r(&d).unwrap();
        let norm = |p: &Vec<Vec<String>>| {
            p.iter().map(|c| c.iter().cloned().collect::<BTreeSet<_>>()).collect::<BTreeSet<_>>()
        };
        for ((_, e), r) in explicit.iter().zip(&derived) {
            assert_eq!(norm(e), norm(r));
        }
    }

    #[test]
    fn each_mutant_trips_its_constraint() {
        for mt in mutants() {
            let m = build_unchecked(&mt.description).unwrap();
            let violated = check_constraints(&m, C3Mode::Literal).violated();
            assert_eq!(violated, BTreeSet::from([mt.target]), "{}", mt.edit);
        }
    }
}
