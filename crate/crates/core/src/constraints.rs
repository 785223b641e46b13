//! Audit of the six model constraints:
//!
//! * C1: classes refine as time advances (a shared past up to `t2` is a
//!   shared past up to every earlier `t1`);
//! * C2: at each time the relation is an equivalence, checked as "the
//!   classes partition the worlds";
//! * C3: a fact holding over an interval holds over its subintervals;
//! * C4: related worlds agree on every extent that has already ended;
//! * C5: `μ_t^w` puts all of its mass on `w`'s class;
//! * C6: related worlds share one distribution.
//!
//! Every check is exhaustive over the finite model and every breach is
//! reported with the instance that falsifies it.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::One;

use crate::formula::{EventSymbol, FactSymbol};
use crate::model::{Extent, Model, TimePoint, WorldId};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
}

impl Constraint {
    pub const ALL: [Constraint; 6] =
        [Constraint::C1, Constraint::C2, Constraint::C3, Constraint::C4, Constraint::C5, Constraint::C6];

    pub fn label(self) -> &'static str {
        match self {
            Constraint::C1 => "C1",
            Constraint::C2 => "C2",
            Constraint::C3 => "C3",
            Constraint::C4 => "C4",
            Constraint::C5 => "C5",
            Constraint::C6 => "C6",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which subintervals a fact must inherit.
///
/// `Literal` requires `((t2,t3),w)` for `t1 <= t2 <= t3 <= t4` only when
/// `t1 != t3` and `t2 != t4`, which exempts the degenerate point intervals
/// at either end of `(t1,t4)`. `Strict` requires every subinterval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum C3Mode {
    #[default]
    Literal,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionDefect {
    /// The world lies in no class (reflexivity fails).
    Uncovered,
    /// The world lies in two or more classes (transitivity fails).
    Overlap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Refinement { earlier: TimePoint, later: TimePoint, worlds: (WorldId, WorldId) },
    Partition { time: TimePoint, world: WorldId, defect: PartitionDefect },
    Subinterval { fact: FactSymbol, world: WorldId, holds: (TimePoint, TimePoint), missing: (TimePoint, TimePoint) },
    Agreement { time: TimePoint, worlds: (WorldId, WorldId), symbol: String, interval: (TimePoint, TimePoint) },
    ClassMass { time: TimePoint, world: WorldId, mass: Rational },
    SharedDistribution { time: TimePoint, worlds: (WorldId, WorldId) },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub witness: Witness,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub entries: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn violated(&self) -> BTreeSet<Constraint> {
        self.entries.iter().map(|v| v.constraint).collect()
    }

    pub fn of(&self, c: Constraint) -> impl Iterator<Item = &Violation> {
        self.entries.iter().filter(move |v| v.constraint == c)
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("all constraints satisfied");
        }
        for (i, v) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{}: {}", v.constraint, v.message)?;
        }
        Ok(())
    }
}

struct Auditor<'m> {
    m: &'m Model,
    report: ViolationReport,
}

impl<'m> Auditor<'m> {
    fn t(&self, t: TimePoint) -> String {
        self.m.time_name(t)
    }

    fn w(&self, w: WorldId) -> &str {
        self.m.world_name(w)
    }

    fn push(&mut self, constraint: Constraint, witness: Witness, message: String) {
        self.report.entries.push(Violation { constraint, witness, message });
    }

    fn refinement(&mut self) {
        let m = self.m;
        for later in m.time_points() {
            for earlier in m.time_points().take_while(|e| e < &later) {
                for a in m.worlds() {
                    for &b in m.accessible(later, a) {
                        if a < b && !m.related(earlier, a, b) {
                            let msg = alloc::format!(
                                "worlds `{}` and `{}` share a past up to {} but not up to earlier {}",
                                self.w(a),
                                self.w(b),
                                self.t(later),
                                self.t(earlier)
                            );
                            self.push(
                                Constraint::C1,
                                Witness::Refinement { earlier, later, worlds: (a, b) },
                                msg,
                            );
                        }
                    }
                }
            }
        }
    }

    fn partition(&mut self) {
        let m = self.m;
        for t in m.time_points() {
            for w in m.worlds() {
                let count = m.classes(t).iter().filter(|c| c.contains(&w)).count();
                let defect = match count {
                    0 => PartitionDefect::Uncovered,
                    1 => continue,
                    _ => PartitionDefect::Overlap,
                };
                let msg = match defect {
                    PartitionDefect::Uncovered => {
                        alloc::format!("world `{}` belongs to no class at {}", self.w(w), self.t(t))
                    }
                    PartitionDefect::Overlap => {
                        alloc::format!("world `{}` belongs to {count} classes at {}", self.w(w), self.t(t))
                    }
                };
                self.push(Constraint::C2, Witness::Partition { time: t, world: w, defect }, msg);
            }
        }
    }

    fn subintervals(&mut self, mode: C3Mode) {
        let m = self.m;
        for (fact, extents) in m.facts() {
            for e in extents {
                let (t1, t4) = (e.start.0, e.end.0);
                for t2 in t1..=t4 {
                    for t3 in t2..=t4 {
                        if mode == C3Mode::Literal && (t1 == t3 || t2 == t4) {
                            continue;
                        }
                        let sub = Extent { start: TimePoint(t2), end: TimePoint(t3), world: e.world };
                        if !extents.contains(&sub) {
                            let msg = alloc::format!(
                                "fact `{fact}` holds over ({}, {}) in `{}` but not over ({}, {})",
                                self.t(e.start),
                                self.t(e.end),
                                self.w(e.world),
                                self.t(sub.start),
                                self.t(sub.end)
                            );
                            self.push(
                                Constraint::C3,
                                Witness::Subinterval {
                                    fact: fact.clone(),
                                    world: e.world,
                                    holds: (e.start, e.end),
                                    missing: (sub.start, sub.end),
                                },
                                msg,
                            );
                        }
                    }
                }
            }
        }
    }

    fn agreement(&mut self) {
        let m = self.m;
        let symbols: Vec<(String, &BTreeSet<Extent>)> = m
            .facts()
            .iter()
            .map(|(s, e): (&FactSymbol, _)| (String::from(s.as_str()), e))
            .chain(m.events().iter().map(|(s, e): (&EventSymbol, _)| (String::from(s.as_str()), e)))
            .collect();
        for t in m.time_points() {
            for a in m.worlds() {
                for &b in m.accessible(t, a) {
                    if a >= b {
                        continue;
                    }
                    for (name, extents) in &symbols {
                        let ended = |w: WorldId| -> BTreeSet<(TimePoint, TimePoint)> {
                            extents.iter().filter(|e| e.world == w && e.end <= t).map(|e| (e.start, e.end)).collect()
                        };
                        let (ea, eb) = (ended(a), ended(b));
                        for &interval in ea.symmetric_difference(&eb) {
                            let (has, lacks) = if ea.contains(&interval) { (a, b) } else { (b, a) };
                            let msg = alloc::format!(
                                "`{}` and `{}` share a past up to {} but `{name}` over ({}, {}) is in `{}` only (missing from `{}`)",
                                self.w(a),
                                self.w(b),
                                self.t(t),
                                self.t(interval.0),
                                self.t(interval.1),
                                self.w(has),
                                self.w(lacks)
                            );
                            self.push(
                                Constraint::C4,
                                Witness::Agreement { time: t, worlds: (a, b), symbol: name.clone(), interval },
                                msg,
                            );
                        }
                    }
                }
            }
        }
    }

    fn class_mass(&mut self) {
        let m = self.m;
        for t in m.time_points() {
            for w in m.worlds() {
                let mass = m.distribution(t, w).measure(m.accessible(t, w));
                if !mass.is_one() {
                    let msg = alloc::format!(
                        "distribution of `{}` at {} gives its own class mass {mass}",
                        self.w(w),
                        self.t(t)
                    );
                    self.push(Constraint::C5, Witness::ClassMass { time: t, world: w, mass }, msg);
                }
            }
        }
    }

    fn shared_distribution(&mut self) {
        let m = self.m;
        for t in m.time_points() {
            for a in m.worlds() {
                for &b in m.accessible(t, a) {
                    if a < b && m.distribution(t, a) != m.distribution(t, b) {
                        let msg = alloc::format!(
                            "`{}` and `{}` share a past up to {} but have different distributions",
                            self.w(a),
                            self.w(b),
                            self.t(t)
                        );
                        self.push(Constraint::C6, Witness::SharedDistribution { time: t, worlds: (a, b) }, msg);
                    }
                }
            }
        }
    }
}

pub fn check_constraints(m: &Model, c3: C3Mode) -> ViolationReport {
    let mut auditor = Auditor { m, report: ViolationReport::default() };
    auditor.refinement();
    auditor.partition();
    auditor.subintervals(c3);
    auditor.agreement();
    auditor.class_mass();
    auditor.shared_distribution();
    auditor.report
}
