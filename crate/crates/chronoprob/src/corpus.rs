//! Instance enumeration for checking the valid schemas, the expected-value
//! identity and the Suppes entailment over a model.

use chronoprob_core::causality::{analyze_cause_with, EventOccurrence};
use chronoprob_core::formula::Formula;
use chronoprob_core::model::Model;
use chronoprob_core::modelgen::Sampler;
use chronoprob_core::principles::{
    alpha_grid, check_schema_with, describe_instance, expected_future_probability_with, ordered_time_pairs,
    representative_symbols, Schema, SchemaInstance, SchemaOutcome,
};
use chronoprob_core::semantics::Evaluator;
use chronoprob_core::syntax::print_formula;

#[derive(Clone, Copy, Debug)]
pub struct CorpusParams {
    pub formulas: usize,
    pub depth: usize,
    /// Miller thresholds are `k / alpha_steps`.
    pub alpha_steps: u32,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams { formulas: 6, depth: 2, alpha_steps: 9 }
    }
}

/// Instances checked and the counterexamples found, rendered as text.
#[derive(Clone, Debug, Default)]
pub struct Tally {
    pub checked: u64,
    pub failures: Vec<String>,
}

impl Tally {
    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    pub fn absorb(&mut self, other: Tally) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
        self.failures.truncate(20);
    }

    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn sample_formulas(m: &Model, seed: u64, p: &CorpusParams) -> Vec<Formula> {
    let mut s = Sampler::new(seed);
    (0..p.formulas).map(|_| s.formula(m, p.depth)).collect()
}

/// Every HOLDS and OCC atom over an ordered pair of time symbols.
pub fn atoms(m: &Model) -> Vec<Formula> {
    let pairs = ordered_time_pairs(m);
    let mut out = Vec::new();
    for (a, b) in &pairs {
        out.extend(m.facts().keys().map(|f| Formula::Holds(a.clone(), b.clone(), f.clone())));
        out.extend(m.events().keys().map(|e| Formula::Occ(a.clone(), b.clone(), e.clone())));
    }
    out
}

pub fn occurrences(m: &Model) -> Vec<EventOccurrence> {
    let pairs = ordered_time_pairs(m);
    m.events()
        .keys()
        .flat_map(|e| pairs.iter().map(move |(a, b)| EventOccurrence { event: e.clone(), start: a.clone(), end: b.clone() }))
        .collect()
}

pub fn instances(m: &Model, schema: Schema, formulas: &[Formula], p: &CorpusParams) -> Vec<SchemaInstance> {
    let times = representative_symbols(m);
    let pairs = ordered_time_pairs(m);
    let mut out = Vec::new();
    match schema {
        Schema::PastDetermined => {
            for atom in atoms(m) {
                out.extend(times.iter().map(|at| SchemaInstance::PastDetermined { at: at.clone(), atom: atom.clone() }));
            }
        }
        Schema::InevitableCertain => {
            for phi in formulas {
                out.extend(times.iter().map(|t| SchemaInstance::InevitableCertain { time: t.clone(), phi: phi.clone() }));
            }
        }
        Schema::InevitabilityPersists => {
            for phi in formulas {
                out.extend(pairs.iter().map(|(a, b)| SchemaInstance::InevitabilityPersists {
                    t1: a.clone(),
                    t2: b.clone(),
                    phi: phi.clone(),
                }));
            }
        }
        Schema::Detachment => {
            for (i, f) in formulas.iter().enumerate() {
                let g = &formulas[(i + 1) % formulas.len()];
                let candidates = [
                    (f.clone(), Formula::or(f.clone(), g.clone())),
                    (Formula::and(f.clone(), g.clone()), f.clone()),
                    (f.clone(), g.clone()),
                ];
                for (premise, conclusion) in candidates {
                    out.extend(times.iter().map(|t| SchemaInstance::Detachment {
                        time: t.clone(),
                        premise: premise.clone(),
                        conclusion: conclusion.clone(),
                    }));
                }
            }
        }
        Schema::Miller => {
            let alphas = alpha_grid(p.alpha_steps);
            for phi in formulas {
                for (a, b) in &pairs {
                    out.extend(alphas.iter().map(|alpha| SchemaInstance::Miller {
                        t1: a.clone(),
                        t2: b.clone(),
                        phi: phi.clone(),
                        alpha: alpha.clone(),
                    }));
                }
            }
        }
    }
    out
}

pub fn check_schema_on(ev: &Evaluator<'_>, schema: Schema, formulas: &[Formula], p: &CorpusParams) -> Tally {
    let mut tally = Tally::default();
    for inst in instances(ev.model(), schema, formulas, p) {
        let outcome = check_schema_with(ev, &inst);
        tally.record(matches!(outcome, Ok(SchemaOutcome::Valid)), || match outcome {
            Ok(SchemaOutcome::Counterexample(w)) => {
                format!("{} fails at {}", describe_instance(&inst), ev.model().world_name(w))
            }
            Ok(SchemaOutcome::Valid) => unreachable!(),
            Err(e) => format!("{}: {e}", describe_instance(&inst)),
        });
    }
    tally
}

/// Expected future chance equals present chance, for every ordered pair of
/// times and every world.
pub fn check_expectation_on(ev: &Evaluator<'_>, formulas: &[Formula]) -> Tally {
    let m = ev.model();
    let mut tally = Tally::default();
    for f in formulas {
        for t in m.time_points() {
            let now = ev.probabilities(t, f).expect("formula evaluates");
            for t2 in m.time_points().filter(|t2| *t2 >= t) {
                for w in m.worlds() {
                    let expected = expected_future_probability_with(ev, t, t2, w, f);
                    tally.record(expected.as_ref() == Ok(&now[w.0]), || {
                        format!(
                            "{}: expected chance at {} seen from {} in {} is {expected:?}, chance is {}",
                            print_formula(f),
                            m.time_name(t2),
                            m.time_name(t),
                            m.world_name(w),
                            now[w.0]
                        )
                    });
                }
            }
        }
    }
    tally
}

/// Positive influence implies the other two conditions.
pub fn check_suppes_on(ev: &Evaluator<'_>) -> Tally {
    let m = ev.model();
    let occ = occurrences(m);
    let mut tally = Tally::default();
    for cause in &occ {
        for effect in &occ {
            for w in m.worlds() {
                let r = analyze_cause_with(ev, w, cause, effect).expect("occurrences resolve");
                tally.record(!r.cond3 || (r.cond1 && r.cond2), || {
                    format!("{cause} and {effect} at {}: {r:?}", m.world_name(w))
                });
            }
        }
    }
    tally
}
