use chronoprob_core::constraints::{check_constraints, C3Mode};
use chronoprob_core::formula::{desugar, time_symbols, Formula};
use chronoprob_core::model::Model;
use chronoprob_core::modelgen::{generate_model, GenParams, Sampler};
use chronoprob_core::principles::{
    check_schema_with, coherence_report, expected_future_probability_with, ordered_time_pairs, SchemaInstance,
};
use chronoprob_core::rational::int;
use chronoprob_core::semantics::Evaluator;
use chronoprob_core::syntax::{parse_formula, print_formula};
use proptest::prelude::*;

fn small(seed: u64) -> Model {
    generate_model(&GenParams { max_worlds: 5, ..GenParams::default() }.with_seed(seed))
}

fn formulas(m: &Model, seed: u64, n: usize, depth: usize) -> Vec<Formula> {
    let mut s = Sampler::new(seed);
    (0..n).map(|_| s.formula(m, depth)).collect()
}

fn atoms(m: &Model) -> Vec<Formula> {
    let mut out = Vec::new();
    for (a, b) in ordered_time_pairs(m) {
        for f in m.facts().keys() {
            out.push(Formula::Holds(a.clone(), b.clone(), f.clone()));
        }
        for e in m.events().keys() {
            out.push(Formula::Occ(a.clone(), b.clone(), e.clone()));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn desugar_is_idempotent_and_keeps_times(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        for f in formulas(&m, fs, 8, 3) {
            let d = desugar(&f);
            prop_assert!(d.is_core());
            prop_assert_eq!(desugar(&d), d.clone());
            prop_assert_eq!(time_symbols(&d), time_symbols(&f));
        }
    }

    #[test]
    fn desugar_preserves_truth(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        let ev = Evaluator::new(&m);
        for f in formulas(&m, fs, 8, 3) {
            prop_assert_eq!(ev.truth(&f).unwrap(), ev.truth(&desugar(&f)).unwrap());
        }
    }

    #[test]
    fn complement_sums_to_one(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        let ev = Evaluator::new(&m);
        for f in formulas(&m, fs, 6, 2) {
            for t in m.time_points() {
                let p = ev.probabilities(t, &f).unwrap();
                let q = ev.probabilities(t, &Formula::not(f.clone())).unwrap();
                for w in m.worlds() {
                    prop_assert_eq!(&p[w.0] + &q[w.0], int(1));
                }
            }
        }
    }

    #[test]
    fn probability_is_monotone_under_entailment(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        let ev = Evaluator::new(&m);
        let fs = formulas(&m, fs, 6, 2);
        for pair in fs.windows(2) {
            let (f, g) = (&pair[0], Formula::or(pair[0].clone(), pair[1].clone()));
            for t in m.time_points() {
                let (pf, pg) = (ev.probabilities(t, f).unwrap(), ev.probabilities(t, &g).unwrap());
                prop_assert!(m.worlds().all(|w| pf[w.0] <= pg[w.0]));
            }
            for time in chronoprob_core::principles::representative_symbols(&m) {
                let inst = SchemaInstance::Detachment { time, premise: f.clone(), conclusion: g.clone() };
                prop_assert!(check_schema_with(&ev, &inst).unwrap().is_valid());
            }
        }
    }

    #[test]
    fn past_is_determined(seed in any::<u64>()) {
        let m = small(seed);
        let ev = Evaluator::new(&m);
        let atoms = atoms(&m);
        for at in chronoprob_core::principles::representative_symbols(&m) {
            for atom in &atoms {
                let inst = SchemaInstance::PastDetermined { at: at.clone(), atom: atom.clone() };
                prop_assert!(check_schema_with(&ev, &inst).unwrap().is_valid());
            }
        }
    }

    #[test]
    fn inevitability_persists_and_is_certain(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        let ev = Evaluator::new(&m);
        let pairs = ordered_time_pairs(&m);
        for phi in formulas(&m, fs, 4, 2) {
            for (t1, t2) in &pairs {
                let inst = SchemaInstance::InevitabilityPersists { t1: t1.clone(), t2: t2.clone(), phi: phi.clone() };
                prop_assert!(check_schema_with(&ev, &inst).unwrap().is_valid());
                let inst = SchemaInstance::InevitableCertain { time: t1.clone(), phi: phi.clone() };
                prop_assert!(check_schema_with(&ev, &inst).unwrap().is_valid());
            }
        }
    }

    #[test]
    fn probability_is_constant_on_classes(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        let ev = Evaluator::new(&m);
        for f in formulas(&m, fs, 6, 2) {
            for t in m.time_points() {
                let p = ev.probabilities(t, &f).unwrap();
                for class in m.classes(t) {
                    prop_assert!(class.iter().all(|w| p[w.0] == p[class[0].0]));
                }
            }
        }
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        for f in formulas(&m, fs, 8, 3) {
            let text = print_formula(&f);
            prop_assert_eq!(parse_formula(&text).unwrap(), f);
        }
    }

    #[test]
    fn miller_and_expectation(seed in any::<u64>(), fs in any::<u64>()) {
        let m = small(seed);
        prop_assume!(coherence_report(&m).is_empty());
        let ev = Evaluator::new(&m);
        let alphas = chronoprob_core::principles::alpha_grid(4);
        for phi in formulas(&m, fs, 3, 2) {
            for (t1, t2) in ordered_time_pairs(&m) {
                for alpha in &alphas {
                    let inst = SchemaInstance::Miller { t1: t1.clone(), t2: t2.clone(), phi: phi.clone(), alpha: alpha.clone() };
                    prop_assert!(check_schema_with(&ev, &inst).unwrap().is_valid());
                }
                let (a, b) = (m.denote(&t1).unwrap(), m.denote(&t2).unwrap());
                for w in m.worlds() {
                    let expected = expected_future_probability_with(&ev, a, b, w, &phi).unwrap();
                    prop_assert_eq!(expected, ev.probability(a, w, &phi).unwrap());
                }
            }
        }
    }
}

#[test]
fn generated_models_are_clean_and_coherent() {
    for seed in 0..1000 {
        let m = generate_model(&GenParams::default().with_seed(seed));
        assert!(check_constraints(&m, C3Mode::Strict).is_clean(), "seed {seed}");
        assert!(coherence_report(&m).is_empty(), "seed {seed}");
    }
}

#[test]
fn generation_is_deterministic() {
    let p = GenParams::default().with_seed(42);
    assert_eq!(generate_model(&p).to_description(), generate_model(&p).to_description());
}
