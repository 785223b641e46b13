mod support;

use chronoprob_core::modelgen::{generate_model, GenParams, Sampler};
use chronoprob_core::semantics::Evaluator;
use support::oracle;

#[test]
fn probability_matches_brute_force() {
    let params = GenParams { max_worlds: 4, ..GenParams::default() };
    let mut checked = 0;
    for seed in 0..200 {
        let m = generate_model(&params.with_seed(seed));
        let ev = Evaluator::new(&m);
        let mut sampler = Sampler::new(seed ^ 0x5eed);
        for _ in 0..6 {
            let f = sampler.formula(&m, 3);
            for t in m.time_points() {
                let fast = ev.probabilities(t, &f).unwrap();
                for w in m.worlds() {
                    assert_eq!(fast[w.0], oracle::prob(&m, t, w, &f), "seed {seed}, formula {f:?}");
                    checked += 1;
                }
            }
            for w in m.worlds() {
                assert_eq!(ev.holds_at(w, &f).unwrap(), oracle::holds(&m, w, &f));
            }
        }
    }
    assert!(checked > 2000);
}
