//! Seeded random models and formulas.
//!
//! Models are built to satisfy C1-C6 directly: a refining sequence of
//! partitions, fact extents closed under the subinterval rule and spread over
//! each class, and distributions taken from a single weight vector so that
//! later chances are earlier chances conditioned on the later class.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{
    CondProbCmp, Comparator, EventSymbol, FactSymbol, Formula, Monomial, Polynomial, ProbCmp, TimeSymbol,
    Vocabulary,
};
use crate::model::{Distribution, Extent, Model, ModelParts, TimePoint, WorldId};
use crate::rational::{int, ratio, Rational};
use crate::semantics::Evaluator;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub max_worlds: usize,
    pub max_times: usize,
    pub max_facts: usize,
    pub max_events: usize,
    pub seed: u64,
    pub mass_granularity: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_worlds: 6, max_times: 4, max_facts: 2, max_events: 2, seed: 0, mass_granularity: 4 }
    }
}

impl GenParams {
    pub fn with_seed(&self, seed: u64) -> Self {
        GenParams { seed, ..self.clone() }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn generate_model(p: &GenParams) -> Model {
    let mut rng = p.rng();
    let nt = rng.gen_range(1..=p.max_times.max(1));
    let times = (0..nt).map(|i| (TimeSymbol::new(format!("t{i}")), i)).collect();
    let facts = (0..rng.gen_range(0..=p.max_facts)).map(|i| FactSymbol::new(format!("f{i}"))).collect();
    let events = (0..rng.gen_range(0..=p.max_events)).map(|i| EventSymbol::new(format!("e{i}"))).collect();
    build(&mut rng, p, times, nt, facts, events)
}

/// A model over exactly the symbols of `vocab`, its time symbols placed at
/// random points (possibly several on one point).
pub fn generate_model_for(p: &GenParams, vocab: &Vocabulary) -> Model {
    generate_model_placed(p, vocab, &[])
}

/// Time atoms that every model of `f` must satisfy: those among its top-level conjuncts.
pub fn time_requirements(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = time_requirements(a);
            out.extend(time_requirements(b));
            out
        }
        Formula::TimeEq(..) | Formula::TimeLe(..) | Formula::TimeLt(..) => vec![f.clone()],
        _ => Vec::new(),
    }
}

fn placement_ok(raw: &[(TimeSymbol, usize)], required: &[Formula]) -> bool {
    let at = |s: &TimeSymbol| raw.iter().find(|(t, _)| t == s).map(|(_, i)| *i);
    required.iter().all(|f| match f {
        Formula::TimeEq(a, b) => at(a) == at(b),
        Formula::TimeLe(a, b) => at(a) <= at(b),
        Formula::TimeLt(a, b) => at(a) < at(b),
        _ => true,
    })
}

/// [`generate_model_for`] with time symbols placed, when a few draws allow,
/// so that the `required` time atoms hold.
pub fn generate_model_placed(p: &GenParams, vocab: &Vocabulary, required: &[Formula]) -> Model {
    let mut rng = p.rng();
    let skeleton = skeleton_placed(&mut rng, p, vocab, required, 1);
    let weight = draw_weights(&mut rng, p, skeleton.worlds);
    skeleton.with_weights(&weight)
}

fn skeleton_placed(
    rng: &mut ChaCha8Rng,
    p: &GenParams,
    vocab: &Vocabulary,
    required: &[Formula],
    min_worlds: usize,
) -> Skeleton {
    if vocab.times.is_empty() {
        let nt = rng.gen_range(1..=p.max_times.max(1));
        let times = (0..nt).map(|i| (TimeSymbol::new(format!("t{i}")), i)).collect();
        let facts = vocab.facts.iter().cloned().collect();
        let events = vocab.events.iter().cloned().collect();
        return draw_skeleton(rng, p, times, nt, facts, events, min_worlds);
    }
    let cap = p.max_times.max(1).min(vocab.times.len());
    let mut raw = Vec::new();
    for _ in 0..4096 {
        let slots = rng.gen_range(1..=cap);
        raw = vocab.times.iter().map(|s| (s.clone(), rng.gen_range(0..slots))).collect();
        if placement_ok(&raw, required) {
            break;
        }
    }
    let used: BTreeSet<usize> = raw.iter().map(|(_, i)| *i).collect();
    let used: Vec<usize> = used.into_iter().collect();
    let times = raw
        .into_iter()
        .map(|(s, i)| (s, used.binary_search(&i).expect("collected above")))
        .collect();
    let facts = vocab.facts.iter().cloned().collect();
    let events = vocab.events.iter().cloned().collect();
    draw_skeleton(rng, p, times, used.len(), facts, events, min_worlds)
}

fn split(rng: &mut ChaCha8Rng, class: &[usize]) -> Vec<Vec<usize>> {
    if class.len() < 2 || rng.gen_bool(0.5) {
        return vec![class.to_vec()];
    }
    loop {
        let (a, b): (Vec<usize>, Vec<usize>) = class.iter().partition(|_| rng.gen_bool(0.5));
        if !a.is_empty() && !b.is_empty() {
            return vec![a, b];
        }
    }
}

/// Everything but the masses.
#[derive(Clone, Debug)]
pub struct Skeleton {
    worlds: usize,
    times: Vec<(TimeSymbol, usize)>,
    classes: Vec<Vec<Vec<usize>>>,
    class_of: Vec<Vec<usize>>,
    facts: Vec<(FactSymbol, RawExtents)>,
    events: Vec<(EventSymbol, RawExtents)>,
    /// Weights used inside a class whose worlds all weigh zero.
    fill: Vec<u32>,
}

impl Skeleton {
    pub fn world_count(&self) -> usize {
        self.worlds
    }

    /// The model whose chances are `weight` normalized within each class.
    /// A class of total weight zero takes its worlds' fill weights instead,
    /// from then on, so later classes stay conditioned on earlier ones.
    pub fn with_weights(&self, weight: &[u32]) -> Model {
        let n = self.worlds;
        let mut weight = weight.to_vec();
        let mut distributions = Vec::with_capacity(self.classes.len());
        for cs in &self.classes {
            let mut at_t = vec![Distribution::point(n, WorldId(0)); n];
            for c in cs {
                if c.iter().all(|&w| weight[w] == 0) {
                    for &w in c {
                        weight[w] = self.fill[w];
                    }
                }
                let total: u32 = c.iter().map(|&w| weight[w]).sum();
                let mut mass = vec![Rational::zero(); n];
                for &w in c {
                    mass[w] = ratio(weight[w] as i64, total as i64);
                }
                let d = Distribution::new(mass).expect("normalized weights");
                for &w in c {
                    at_t[w] = d.clone();
                }
            }
            distributions.push(at_t);
        }
        let parts = ModelParts {
            worlds: (0..n).map(|i| format!("w{i}")).collect(),
            time_symbols: self.times.iter().map(|(s, i)| (s.clone(), int(*i as i64))).collect(),
            facts: self.facts.iter().map(|(s, e)| (s.clone(), to_extents(e))).collect(),
            events: self.events.iter().map(|(s, e)| (s.clone(), to_extents(e))).collect(),
            classes: self
                .classes
                .iter()
                .map(|cs| cs.iter().map(|c| c.iter().copied().map(WorldId).collect()).collect())
                .collect(),
            distributions,
        };
        Model::from_parts(parts).expect("generator output is well formed")
    }

    /// One local edit of an extent set that keeps C3 and C4: toggle an event
    /// over an interval for a whole class at the interval's end, or add (and
    /// close) or remove (with every superinterval) a fact likewise.
    pub fn mutate(&mut self, rng: &mut ChaCha8Rng) {
        let nt = self.classes.len();
        let total = self.facts.len() + self.events.len();
        if total == 0 {
            return;
        }
        let a = rng.gen_range(0..nt);
        let b = rng.gen_range(a..nt);
        let class = self.classes[b].choose(rng).expect("partition is nonempty").clone();
        let pick = rng.gen_range(0..total);
        if pick >= self.facts.len() {
            let set = &mut self.events[pick - self.facts.len()].1;
            let present = set.contains(&(a, b, class[0]));
            for &w in &class {
                if present {
                    set.remove(&(a, b, w));
                } else {
                    set.insert((a, b, w));
                }
            }
            return;
        }
        let set = &mut self.facts[pick].1;
        if set.contains(&(a, b, class[0])) {
            set.retain(|&(x, y, w)| !(x <= a && y >= b && class.contains(&w)));
        } else {
            set.extend(class.iter().map(|&w| (a, b, w)));
            close_facts(set, &self.classes, &self.class_of);
        }
    }
}

fn draw_weights(rng: &mut ChaCha8Rng, p: &GenParams, n: usize) -> Vec<u32> {
    let g = p.mass_granularity.max(1);
    if rng.gen_bool(0.3) {
        vec![1; n]
    } else {
        (0..n).map(|_| rng.gen_range(0..=g)).collect()
    }
}

fn build(
    rng: &mut ChaCha8Rng,
    p: &GenParams,
    times: Vec<(TimeSymbol, usize)>,
    nt: usize,
    facts: Vec<FactSymbol>,
    events: Vec<EventSymbol>,
) -> Model {
    let skeleton = draw_skeleton(rng, p, times, nt, facts, events, 1);
    let weight = draw_weights(rng, p, skeleton.worlds);
    skeleton.with_weights(&weight)
}

fn draw_skeleton(
    rng: &mut ChaCha8Rng,
    p: &GenParams,
    times: Vec<(TimeSymbol, usize)>,
    nt: usize,
    facts: Vec<FactSymbol>,
    events: Vec<EventSymbol>,
    min_worlds: usize,
) -> Skeleton {
    let max = p.max_worlds.max(1);
    let n = rng.gen_range(min_worlds.clamp(1, max)..=max);
    let all: Vec<usize> = (0..n).collect();
    let mut classes: Vec<Vec<Vec<usize>>> = Vec::with_capacity(nt);
    let mut current = vec![all];
    for _ in 0..nt {
        current = current.iter().flat_map(|c| split(rng, c)).collect();
        classes.push(current.clone());
    }
    let mut class_of = vec![vec![0usize; n]; nt];
    for (t, cs) in classes.iter().enumerate() {
        for (i, c) in cs.iter().enumerate() {
            for &w in c {
                class_of[t][w] = i;
            }
        }
    }

    let mut fact_sets = Vec::new();
    for fact in facts {
        let density = *[0.15, 0.3, 0.5].choose(rng).expect("nonempty");
        let mut set = draw_extents(rng, &classes, nt, density);
        close_facts(&mut set, &classes, &class_of);
        fact_sets.push((fact, set));
    }
    let mut event_sets = Vec::new();
    for event in events {
        let density = *[0.2, 0.4, 0.6].choose(rng).expect("nonempty");
        event_sets.push((event, draw_extents(rng, &classes, nt, density)));
    }
    let g = p.mass_granularity.max(1);
    let fill = (0..n).map(|_| rng.gen_range(1..=g)).collect();
    Skeleton { worlds: n, times, classes, class_of, facts: fact_sets, events: event_sets, fill }
}

type RawExtents = BTreeSet<(usize, usize, usize)>;

/// Membership of `(a, b)` decided once per class at `b`.
fn draw_extents(rng: &mut ChaCha8Rng, classes: &[Vec<Vec<usize>>], nt: usize, density: f64) -> RawExtents {
    let mut set = BTreeSet::new();
    for a in 0..nt {
        for (b, per_time) in classes.iter().enumerate().skip(a) {
            for c in per_time {
                if rng.gen_bool(density) {
                    set.extend(c.iter().map(|&w| (a, b, w)));
                }
            }
        }
    }
    set
}

/// Every subinterval of a holding interval holds, in the whole class at its end.
fn close_facts(set: &mut RawExtents, classes: &[Vec<Vec<usize>>], class_of: &[Vec<usize>]) {
    let mut pending: Vec<(usize, usize, usize)> = set.iter().copied().collect();
    while let Some((a, b, w)) = pending.pop() {
        for c in a..=b {
            for d in c..=b {
                for &v in &classes[d][class_of[d][w]] {
                    if set.insert((c, d, v)) {
                        pending.push((c, d, v));
                    }
                }
            }
        }
    }
}

fn to_extents(set: &RawExtents) -> BTreeSet<Extent> {
    set.iter()
        .map(|&(a, b, w)| Extent { start: TimePoint(a), end: TimePoint(b), world: WorldId(w) })
        .collect()
}

/// Draws formulas over a model's symbols.
pub struct Sampler {
    rng: ChaCha8Rng,
}

const BOUNDS: [(i64, i64); 7] = [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];
const COEFFS: [(i64, i64); 5] = [(1, 1), (-1, 1), (2, 1), (1, 2), (-1, 3)];

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items.choose(&mut self.rng).expect("nonempty").clone()
    }

    fn bound(&mut self) -> Rational {
        let (p, q) = self.pick(&BOUNDS);
        ratio(p, q)
    }

    fn cmp(&mut self) -> Comparator {
        self.pick(&Comparator::ALL)
    }

    fn interval(&mut self, m: &Model, times: &[TimeSymbol]) -> (TimeSymbol, TimeSymbol) {
        let (a, b) = (self.pick(times), self.pick(times));
        if self.rng.gen_bool(0.9) && m.denote(&a) > m.denote(&b) {
            (b, a)
        } else {
            (a, b)
        }
    }

    pub fn atom(&mut self, m: &Model) -> Formula {
        let times: Vec<TimeSymbol> = m.time_symbols().keys().cloned().collect();
        let facts: Vec<FactSymbol> = m.facts().keys().cloned().collect();
        let events: Vec<EventSymbol> = m.events().keys().cloned().collect();
        let roll = self.rng.gen_range(0..10);
        if roll < 4 && !facts.is_empty() {
            let (a, b) = self.interval(m, &times);
            return Formula::Holds(a, b, self.pick(&facts));
        }
        if roll < 8 && !events.is_empty() {
            let (a, b) = self.interval(m, &times);
            return Formula::Occ(a, b, self.pick(&events));
        }
        let (a, b) = (self.pick(&times), self.pick(&times));
        match self.rng.gen_range(0..3) {
            0 => Formula::TimeEq(a, b),
            1 => Formula::TimeLe(a, b),
            _ => Formula::TimeLt(a, b),
        }
    }

    /// A formula whose nesting of operators is at most `depth`.
    pub fn formula(&mut self, m: &Model, depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.15) {
            return self.atom(m);
        }
        let d = depth - 1;
        let times: Vec<TimeSymbol> = m.time_symbols().keys().cloned().collect();
        match self.rng.gen_range(0..10) {
            0 => Formula::not(self.formula(m, d)),
            1 => Formula::and(self.formula(m, d), self.formula(m, d)),
            2 => Formula::or(self.formula(m, d), self.formula(m, d)),
            3 => Formula::implies(self.formula(m, d), self.formula(m, d)),
            4 => Formula::Inev(self.pick(&times), self.formula(m, d).into()),
            5 => Formula::Poss(self.pick(&times), self.formula(m, d).into()),
            6 | 7 => {
                let t = self.pick(&times);
                let (cmp, bound) = (self.cmp(), self.bound());
                Formula::prob(t.as_str(), self.formula(m, d), cmp, bound)
            }
            8 => {
                let time = self.pick(&times);
                let mut monomials = Vec::new();
                for _ in 0..self.rng.gen_range(1..=2) {
                    let (p, q) = self.pick(&COEFFS);
                    let factors = (0..self.rng.gen_range(1..=2)).map(|_| self.formula(m, d)).collect();
                    monomials.push(Monomial::term(ratio(p, q), factors));
                }
                monomials.push(Monomial::constant(-self.bound()));
                Formula::Prob(ProbCmp { time, poly: Polynomial::new(monomials), cmp: self.cmp() })
            }
            _ => Formula::CondProb(CondProbCmp {
                time: self.pick(&times),
                target: self.formula(m, d).into(),
                given: self.formula(m, d).into(),
                cmp: self.cmp(),
                bound: self.bound(),
            }),
        }
    }
}

pub fn sample_formula(p: &GenParams, m: &Model, depth: usize) -> Formula {
    Sampler::new(p.seed).formula(m, depth)
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum SatOutcome {
    Found { model: Model, world: WorldId, trials: u64 },
    Unknown { trials: u64 },
}

/// Random search for a model of `f`; success is sound, failure proves nothing.
pub fn bounded_sat(f: &Formula, p: &GenParams, budget: u64) -> SatOutcome {
    bounded_sat_while(f, p, budget, || true)
}

/// [`bounded_sat`] that also stops as soon as `keep_going` returns false.
///
/// Each skeleton gets a short local search over its weights, guided by how
/// far the top-level probability comparisons are from holding.
pub fn bounded_sat_while(f: &Formula, p: &GenParams, budget: u64, mut keep_going: impl FnMut() -> bool) -> SatOutcome {
    const STEPS: u32 = 48;
    let vocab = Vocabulary::of(f);
    let required = time_requirements(f);
    let conjuncts = conjuncts(f);
    let g = p.mass_granularity.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut trials = 0;
    while trials < budget {
        if !keep_going() {
            return SatOutcome::Unknown { trials };
        }
        let skeleton = skeleton_placed(&mut rng, p, &vocab, &required, p.max_worlds.div_ceil(2));
        let mut weight = draw_weights(&mut rng, p, skeleton.worlds);
        let mut current: Option<Rational> = None;
        let mut skeleton = skeleton;
        for _ in 0..STEPS {
            if trials == budget {
                break;
            }
            trials += 1;
            let mut proposal = weight.clone();
            let mut shape = None;
            if current.is_some() {
                if rng.gen_bool(0.5) {
                    let w = rng.gen_range(0..skeleton.worlds);
                    proposal[w] = rng.gen_range(0..=g);
                } else {
                    let mut s = skeleton.clone();
                    s.mutate(&mut rng);
                    shape = Some(s);
                }
            }
            let model = shape.as_ref().unwrap_or(&skeleton).with_weights(&proposal);
            let Some((score, world)) = distance(&model, &conjuncts) else { break };
            if score.is_zero() {
                return SatOutcome::Found { model, world, trials };
            }
            if current.as_ref().is_none_or(|c| score <= *c) {
                current = Some(score);
                weight = proposal;
                if let Some(s) = shape {
                    skeleton = s;
                }
            }
        }
    }
    SatOutcome::Unknown { trials }
}

fn conjuncts(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        _ => vec![f.clone()],
    }
}

/// How far `v cmp 0` is from holding.
fn gap(v: &Rational, cmp: Comparator) -> Rational {
    if cmp.holds(v, &Rational::zero()) {
        return Rational::zero();
    }
    match cmp {
        Comparator::Gt | Comparator::Lt => v.abs() + ratio(1, 1000),
        _ => v.abs(),
    }
}

/// The least, over worlds, of the summed gaps of the conjuncts; a conjunct
/// that is not a probability comparison contributes 1 when false. Zero
/// exactly when the conjunction holds at the returned world.
fn distance(m: &Model, conjuncts: &[Formula]) -> Option<(Rational, WorldId)> {
    let ev = Evaluator::new(m);
    let mut total = vec![Rational::zero(); m.world_count()];
    for c in conjuncts {
        let core = match c {
            Formula::CondProb(_) => crate::formula::desugar(c),
            _ => c.clone(),
        };
        if let Formula::Prob(pc) = &core {
            let t = ev.time(&pc.time).ok()?;
            let values = ev.polynomial_values(t, &pc.poly).ok()?;
            for (acc, v) in total.iter_mut().zip(&values) {
                *acc += gap(v, pc.cmp);
            }
            continue;
        }
        let truth = ev.truth(c).ok()?;
        for (acc, holds) in total.iter_mut().zip(truth.iter()) {
            if !holds {
                *acc += Rational::one();
            }
        }
    }
    let (w, best) = total.into_iter().enumerate().min_by(|a, b| a.1.cmp(&b.1))?;
    Some((best, WorldId(w)))
}

/// Names used by generated models, for messages.
pub fn describe(p: &GenParams) -> String {
    format!(
        "worlds <= {}, times <= {}, facts <= {}, events <= {}, granularity {}, seed {}",
        p.max_worlds, p.max_times, p.max_facts, p.max_events, p.mass_granularity, p.seed
    )
}
