//! Finite models: world-histories, a rational time line, fact and event
//! extents, the accessibility relation as per-time classes, and one
//! probability distribution per (time, world).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::constraints::{check_constraints, C3Mode, ViolationReport};
use crate::formula::{EventSymbol, FactSymbol, TimeSymbol};
use crate::rational::{parse_rational, Rational};
use crate::syntax::is_symbol_name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldId(pub usize);

/// Index of a point in the model's sorted time line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimePoint(pub usize);

/// `((start, end), world)` membership in a fact or event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Extent {
    pub start: TimePoint,
    pub end: TimePoint,
    pub world: WorldId,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DistributionError {
    #[error("distribution covers {got} worlds, model has {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("negative mass {mass} on world #{world}")]
    NegativeMass { world: usize, mass: Rational },
    #[error("masses sum to {0}, not 1")]
    SumNotOne(Rational),
}

/// Probability masses indexed by world; nonnegative, summing to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution {
    mass: Vec<Rational>,
}

impl Distribution {
    pub fn new(mass: Vec<Rational>) -> Result<Self, DistributionError> {
        if let Some((world, m)) = mass.iter().enumerate().find(|(_, m)| m.is_negative()) {
            return Err(DistributionError::NegativeMass { world, mass: m.clone() });
        }
        let total: Rational = mass.iter().cloned().sum();
        if !total.is_one() {
            return Err(DistributionError::SumNotOne(total));
        }
        Ok(Distribution { mass })
    }

    pub fn point(worlds: usize, at: WorldId) -> Self {
        let mut mass = vec![Rational::zero(); worlds];
        mass[at.0] = Rational::one();
        Distribution { mass }
    }

    pub fn mass(&self, w: WorldId) -> &Rational {
        &self.mass[w.0]
    }

    pub fn masses(&self) -> &[Rational] {
        &self.mass
    }

    pub fn measure<'a>(&self, worlds: impl IntoIterator<Item = &'a WorldId>) -> Rational {
        worlds.into_iter().map(|w| &self.mass[w.0]).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = WorldId> + '_ {
        self.mass.iter().enumerate().filter(|(_, m)| !m.is_zero()).map(|(i, _)| WorldId(i))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown time `{0}`")]
    UnknownTime(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("model has no worlds")]
    NoWorlds,
    #[error("model has no time points")]
    NoTimes,
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("duplicate time symbol `{0}`")]
    DuplicateTimeSymbol(String),
    #[error("`{0}` is not a usable symbol name")]
    BadSymbol(String),
    #[error("`{0}` is declared both as a fact and as an event")]
    FactEventClash(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown time `{0}`")]
    UnknownTime(String),
    #[error("extent of `{symbol}` in world `{world}` ends before it starts")]
    BackwardInterval { symbol: String, world: String },
    #[error("no partition given for time `{0}`")]
    MissingPartition(String),
    #[error("partition for time `{0}` given twice")]
    DuplicatePartition(String),
    #[error("no distribution for world `{world}` at time `{time}`")]
    MissingDistribution { time: String, world: String },
    #[error("world `{world}` assigned two distributions at time `{time}`")]
    ConflictingDistribution { time: String, world: String },
    #[error("distribution at time `{time}`: {source}")]
    Distribution { time: String, source: DistributionError },
    #[error("model violates its constraints:\n{0}")]
    Violations(ViolationReport),
}

/// Raw model as read from a file, before references are resolved.
/// Time references are symbol names or rational literals naming a point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelDescription {
    pub times: Vec<(String, Rational)>,
    pub worlds: Vec<String>,
    pub facts: Vec<(String, Vec<ExtentRef>)>,
    pub events: Vec<(String, Vec<ExtentRef>)>,
    pub accessibility: AccessibilityDescription,
    pub prob: Vec<(String, Vec<ClassDistribution>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtentRef {
    pub world: String,
    pub start: String,
    pub end: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum AccessibilityDescription {
    /// Classes listed per time reference.
    Explicit(Vec<(String, Vec<Vec<String>>)>),
    /// The coarsest relation agreeing with every extent that has ended.
    #[default]
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDistribution {
    pub class: Vec<String>,
    pub dist: Vec<(String, Rational)>,
}

/// Resolved model contents, used to construct or mutate a [`Model`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelParts {
    pub worlds: Vec<String>,
    pub time_symbols: Vec<(TimeSymbol, Rational)>,
    pub facts: BTreeMap<FactSymbol, BTreeSet<Extent>>,
    pub events: BTreeMap<EventSymbol, BTreeSet<Extent>>,
    /// Accessibility classes per time point; a partition of the worlds when
    /// the relation is an equivalence.
    pub classes: Vec<Vec<Vec<WorldId>>>,
    /// `distributions[t][w]`.
    pub distributions: Vec<Vec<Distribution>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    worlds: Vec<String>,
    times: Vec<Rational>,
    time_symbols: BTreeMap<TimeSymbol, TimePoint>,
    facts: BTreeMap<FactSymbol, BTreeSet<Extent>>,
    events: BTreeMap<EventSymbol, BTreeSet<Extent>>,
    classes: Vec<Vec<Vec<WorldId>>>,
    /// `accessible[t][w]`, the sorted union of classes containing `w`.
    accessible: Vec<Vec<Vec<WorldId>>>,
    distributions: Vec<Vec<Distribution>>,
    /// `chance_group[t][w]`: the least world with `w`'s accessible set and
    /// distribution at `t`, so chances need computing once per group.
    chance_group: Vec<Vec<WorldId>>,
}

/// Sorted distinct points and the symbol map for a list of time symbols.
fn time_line(
    symbols: &[(TimeSymbol, Rational)],
) -> Result<(Vec<Rational>, BTreeMap<TimeSymbol, TimePoint>), BuildError> {
    if symbols.is_empty() {
        return Err(BuildError::NoTimes);
    }
    let points: BTreeSet<&Rational> = symbols.iter().map(|(_, v)| v).collect();
    let times: Vec<Rational> = points.into_iter().cloned().collect();
    let mut map = BTreeMap::new();
    for (sym, value) in symbols {
        let idx = times.binary_search(value).expect("point collected above");
        if map.insert(sym.clone(), TimePoint(idx)).is_some() {
            return Err(BuildError::DuplicateTimeSymbol(sym.to_string()));
        }
    }
    Ok((times, map))
}

impl Model {
    /// Structural validation only; constraint violations are left for
    /// [`check_constraints`] to report.
    pub fn from_parts(parts: ModelParts) -> Result<Model, BuildError> {
        let ModelParts { worlds, time_symbols, facts, events, classes, distributions } = parts;
        if worlds.is_empty() {
            return Err(BuildError::NoWorlds);
        }
        let mut seen = BTreeSet::new();
        for w in &worlds {
            if !seen.insert(w.as_str()) {
                return Err(BuildError::DuplicateWorld(w.clone()));
            }
        }
        for (sym, _) in &time_symbols {
            if !is_symbol_name(sym.as_str()) {
                return Err(BuildError::BadSymbol(sym.to_string()));
            }
        }
        let (times, symbol_map) = time_line(&time_symbols)?;
        let n = worlds.len();
        let check_extents = |name: &str, extents: &BTreeSet<Extent>| -> Result<(), BuildError> {
            if !is_symbol_name(name) {
                return Err(BuildError::BadSymbol(name.to_string()));
            }
            for e in extents {
                if e.world.0 >= n {
                    return Err(BuildError::UnknownWorld(alloc::format!("#{}", e.world.0)));
                }
                for p in [e.start, e.end] {
                    if p.0 >= times.len() {
                        return Err(BuildError::UnknownTime(alloc::format!("#{}", p.0)));
                    }
                }
                if e.start > e.end {
                    return Err(BuildError::BackwardInterval {
                        symbol: name.to_string(),
                        world: worlds[e.world.0].clone(),
                    });
                }
            }
            Ok(())
        };
        for (sym, extents) in &facts {
            check_extents(sym.as_str(), extents)?;
            if events.keys().any(|e| e.as_str() == sym.as_str()) {
                return Err(BuildError::FactEventClash(sym.to_string()));
            }
        }
        for (sym, extents) in &events {
            check_extents(sym.as_str(), extents)?;
        }
        let time_name = |i: usize| -> String {
            symbol_map
                .iter()
                .find(|(_, p)| p.0 == i)
                .map(|(s, _)| s.to_string())
                .unwrap_or_else(|| times[i].to_string())
        };
        if classes.len() != times.len() {
            return Err(BuildError::MissingPartition(time_name(classes.len().min(times.len()))));
        }
        for class in classes.iter().flatten() {
            if let Some(w) = class.iter().find(|w| w.0 >= n) {
                return Err(BuildError::UnknownWorld(alloc::format!("#{}", w.0)));
            }
        }
        if distributions.len() != times.len() {
            return Err(BuildError::MissingDistribution {
                time: time_name(distributions.len().min(times.len())),
                world: worlds[0].clone(),
            });
        }
        for (t, row) in distributions.iter().enumerate() {
            if row.len() != n {
                return Err(BuildError::MissingDistribution {
                    time: time_name(t),
                    world: worlds[row.len().min(n - 1)].clone(),
                });
            }
            for d in row {
                if d.masses().len() != n {
                    return Err(BuildError::Distribution {
                        time: time_name(t),
                        source: DistributionError::WrongLength { expected: n, got: d.masses().len() },
                    });
                }
            }
        }
        let accessible = classes
            .iter()
            .map(|per_time| {
                (0..n)
                    .map(|w| {
                        let set: BTreeSet<WorldId> = per_time
                            .iter()
                            .filter(|c| c.contains(&WorldId(w)))
                            .flat_map(|c| c.iter().copied())
                            .collect();
                        set.into_iter().collect()
                    })
                    .collect()
            })
            .collect::<Vec<Vec<Vec<WorldId>>>>();
        let chance_group = (0..times.len())
            .map(|t| {
                (0..n)
                    .map(|w| {
                        let same = |u: &usize| {
                            accessible[t][*u] == accessible[t][w] && distributions[t][*u] == distributions[t][w]
                        };
                        WorldId((0..w).find(same).unwrap_or(w))
                    })
                    .collect()
            })
            .collect();
        Ok(Model {
            worlds,
            times,
            time_symbols: symbol_map,
            facts,
            events,
            classes,
            accessible,
            distributions,
            chance_group,
        })
    }

    pub fn to_parts(&self) -> ModelParts {
        let mut time_symbols: Vec<(TimeSymbol, Rational)> = self
            .time_symbols
            .iter()
            .map(|(s, p)| (s.clone(), self.times[p.0].clone()))
            .collect();
        time_symbols.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        ModelParts {
            worlds: self.worlds.clone(),
            time_symbols,
            facts: self.facts.clone(),
            events: self.events.clone(),
            classes: self.classes.clone(),
            distributions: self.distributions.clone(),
        }
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> impl Iterator<Item = WorldId> {
        (0..self.worlds.len()).map(WorldId)
    }

    pub fn world_name(&self, w: WorldId) -> &str {
        &self.worlds[w.0]
    }

    pub fn world(&self, name: &str) -> Result<WorldId, ModelError> {
        self.worlds
            .iter()
            .position(|w| w == name)
            .map(WorldId)
            .ok_or_else(|| ModelError::UnknownWorld(name.to_string()))
    }

    pub fn time_count(&self) -> usize {
        self.times.len()
    }

    pub fn time_points(&self) -> impl Iterator<Item = TimePoint> {
        (0..self.times.len()).map(TimePoint)
    }

    pub fn time_value(&self, t: TimePoint) -> &Rational {
        &self.times[t.0]
    }

    pub fn time_symbols(&self) -> &BTreeMap<TimeSymbol, TimePoint> {
        &self.time_symbols
    }

    pub fn denote(&self, sym: &TimeSymbol) -> Option<TimePoint> {
        self.time_symbols.get(sym).copied()
    }

    /// Resolves a time symbol, or else a rational literal naming a point.
    pub fn time(&self, reference: &str) -> Result<TimePoint, ModelError> {
        if let Some(p) = self.time_symbols.iter().find(|(s, _)| s.as_str() == reference).map(|(_, p)| *p) {
            return Ok(p);
        }
        parse_rational(reference)
            .ok()
            .and_then(|v| self.times.binary_search(&v).ok())
            .map(TimePoint)
            .ok_or_else(|| ModelError::UnknownTime(reference.to_string()))
    }

    /// A symbol denoting `t`, or the point's value when none does.
    pub fn time_name(&self, t: TimePoint) -> String {
        self.time_symbols
            .iter()
            .find(|(_, p)| **p == t)
            .map(|(s, _)| s.to_string())
            .unwrap_or_else(|| self.times[t.0].to_string())
    }

    pub fn facts(&self) -> &BTreeMap<FactSymbol, BTreeSet<Extent>> {
        &self.facts
    }

    pub fn events(&self) -> &BTreeMap<EventSymbol, BTreeSet<Extent>> {
        &self.events
    }

    pub fn fact_extents(&self, fact: &FactSymbol) -> Option<&BTreeSet<Extent>> {
        self.facts.get(fact)
    }

    pub fn event_extents(&self, event: &EventSymbol) -> Option<&BTreeSet<Extent>> {
        self.events.get(event)
    }

    /// The classes of the accessibility relation at `t`, as stored.
    pub fn classes(&self, t: TimePoint) -> &[Vec<WorldId>] {
        &self.classes[t.0]
    }

    pub fn distribution(&self, t: TimePoint, w: WorldId) -> &Distribution {
        &self.distributions[t.0][w.0]
    }

    /// Worlds sharing `w`'s past up to `t`, sorted.
    pub fn accessible(&self, t: TimePoint, w: WorldId) -> &[WorldId] {
        &self.accessible[t.0][w.0]
    }

    /// A representative world whose accessible set and distribution at `t`
    /// equal `w`'s.
    pub fn chance_group(&self, t: TimePoint, w: WorldId) -> WorldId {
        self.chance_group[t.0][w.0]
    }

    pub fn related(&self, t: TimePoint, a: WorldId, b: WorldId) -> bool {
        self.accessible[t.0][a.0].binary_search(&b).is_ok()
    }

    /// Checked lookup by names, for callers holding user input.
    pub fn accessible_named(&self, t: &str, w: &str) -> Result<Vec<&str>, ModelError> {
        let t = self.time(t)?;
        let w = self.world(w)?;
        Ok(self.accessible(t, w).iter().map(|v| self.world_name(*v)).collect())
    }

    /// Explicit description reproducing this model: every point keyed by a
    /// symbol, classes listed, one distribution entry per group of
    /// same-class worlds sharing a distribution.
    pub fn to_description(&self) -> ModelDescription {
        let parts = self.to_parts();
        let name = |t: TimePoint| self.time_name(t);
        let extent_refs = |set: &BTreeSet<Extent>| -> Vec<ExtentRef> {
            set.iter()
                .map(|e| ExtentRef {
                    world: self.worlds[e.world.0].clone(),
                    start: name(e.start),
                    end: name(e.end),
                })
                .collect()
        };
        let names = |ws: &[WorldId]| ws.iter().map(|w| self.worlds[w.0].clone()).collect::<Vec<_>>();
        let mut prob = Vec::new();
        let mut explicit = Vec::new();
        for t in self.time_points() {
            explicit.push((name(t), self.classes[t.0].iter().map(|c| names(c)).collect()));
            let mut entries: Vec<(Vec<WorldId>, &Distribution)> = Vec::new();
            for class in &self.classes[t.0] {
                let mut groups: Vec<(Vec<WorldId>, &Distribution)> = Vec::new();
                for &w in class {
                    let d = self.distribution(t, w);
                    match groups.iter_mut().find(|(_, g)| *g == d) {
                        Some((ws, _)) => ws.push(w),
                        None => groups.push((vec![w], d)),
                    }
                }
                entries.extend(groups);
            }
            let entries = entries
                .into_iter()
                .map(|(ws, d)| ClassDistribution {
                    class: names(&ws),
                    dist: d.support().map(|w| (self.worlds[w.0].clone(), d.mass(w).clone())).collect(),
                })
                .collect();
            prob.push((name(t), entries));
        }
        ModelDescription {
            times: parts.time_symbols.iter().map(|(s, v)| (s.to_string(), v.clone())).collect(),
            worlds: self.worlds.clone(),
            facts: self.facts.iter().map(|(s, e)| (s.to_string(), extent_refs(e))).collect(),
            events: self.events.iter().map(|(s, e)| (s.to_string(), extent_refs(e))).collect(),
            accessibility: AccessibilityDescription::Explicit(explicit),
            prob,
        }
    }
}

/// Description with references resolved against its own symbol tables.
struct Resolver<'d> {
    d: &'d ModelDescription,
    times: Vec<Rational>,
    symbols: BTreeMap<TimeSymbol, TimePoint>,
}

impl<'d> Resolver<'d> {
    fn new(d: &'d ModelDescription) -> Result<Self, BuildError> {
        let mut symbols = Vec::new();
        for (name, value) in &d.times {
            if !is_symbol_name(name) {
                return Err(BuildError::BadSymbol(name.clone()));
            }
            symbols.push((TimeSymbol::new(name.as_str()), value.clone()));
        }
        let (times, symbols) = time_line(&symbols)?;
        Ok(Resolver { d, times, symbols })
    }

    fn time(&self, reference: &str) -> Result<TimePoint, BuildError> {
        if let Some((_, p)) = self.symbols.iter().find(|(s, _)| s.as_str() == reference) {
            return Ok(*p);
        }
        parse_rational(reference)
            .ok()
            .and_then(|v| self.times.binary_search(&v).ok())
            .map(TimePoint)
            .ok_or_else(|| BuildError::UnknownTime(reference.to_string()))
    }

    fn world(&self, name: &str) -> Result<WorldId, BuildError> {
        self.d
            .worlds
            .iter()
            .position(|w| w == name)
            .map(WorldId)
            .ok_or_else(|| BuildError::UnknownWorld(name.to_string()))
    }

    fn extents(&self, symbol: &str, refs: &[ExtentRef]) -> Result<BTreeSet<Extent>, BuildError> {
        refs.iter()
            .map(|r| {
                let e = Extent { start: self.time(&r.start)?, end: self.time(&r.end)?, world: self.world(&r.world)? };
                if e.start > e.end {
                    return Err(BuildError::BackwardInterval { symbol: symbol.to_string(), world: r.world.clone() });
                }
                Ok(e)
            })
            .collect()
    }

    fn fact_table(&self) -> Result<BTreeMap<FactSymbol, BTreeSet<Extent>>, BuildError> {
        let mut out = BTreeMap::new();
        for (name, refs) in &self.d.facts {
            if !is_symbol_name(name) {
                return Err(BuildError::BadSymbol(name.clone()));
            }
            let set: &mut BTreeSet<Extent> = out.entry(FactSymbol::new(name.as_str())).or_default();
            set.extend(self.extents(name, refs)?);
        }
        Ok(out)
    }

    fn event_table(&self) -> Result<BTreeMap<EventSymbol, BTreeSet<Extent>>, BuildError> {
        let mut out = BTreeMap::new();
        for (name, refs) in &self.d.events {
            if !is_symbol_name(name) {
                return Err(BuildError::BadSymbol(name.clone()));
            }
            let set: &mut BTreeSet<Extent> = out.entry(EventSymbol::new(name.as_str())).or_default();
            set.extend(self.extents(name, refs)?);
        }
        Ok(out)
    }

    fn time_label(&self, t: usize) -> String {
        self.symbols
            .iter()
            .find(|(_, p)| p.0 == t)
            .map(|(s, _)| s.to_string())
            .unwrap_or_else(|| self.times[t].to_string())
    }
}

/// Coarsest accessibility satisfying the agreement condition: two worlds
/// share a class at `t` iff they agree on every fact and event extent whose
/// interval ends at or before `t`.
pub fn canonical_classes(
    world_count: usize,
    time_count: usize,
    extents: &[&BTreeSet<Extent>],
) -> Vec<Vec<Vec<WorldId>>> {
    (0..time_count)
        .map(|t| {
            let mut signature: Vec<BTreeSet<(usize, TimePoint, TimePoint)>> = vec![BTreeSet::new(); world_count];
            for (k, set) in extents.iter().enumerate() {
                for e in set.iter().filter(|e| e.end.0 <= t) {
                    signature[e.world.0].insert((k, e.start, e.end));
                }
            }
            let mut classes: Vec<Vec<WorldId>> = Vec::new();
            let mut reps: Vec<usize> = Vec::new();
            for w in 0..world_count {
                match reps.iter().position(|&r| signature[r] == signature[w]) {
                    Some(i) => classes[i].push(WorldId(w)),
                    None => {
                        reps.push(w);
                        classes.push(vec![WorldId(w)]);
                    }
                }
            }
            classes
        })
        .collect()
}

/// The canonical per-time partitions for a description's extents, in time
/// order; entry `i` belongs to the `i`-th smallest point.
pub fn derive_canonical_r(d: &ModelDescription) -> Result<Vec<Vec<Vec<String>>>, BuildError> {
    let r = Resolver::new(d)?;
    let facts = r.fact_table()?;
    let events = r.event_table()?;
    let all: Vec<&BTreeSet<Extent>> = facts.values().chain(events.values()).collect();
    let classes = canonical_classes(d.worlds.len(), r.times.len(), &all);
    Ok(classes
        .into_iter()
        .map(|per_time| {
            per_time
                .into_iter()
                .map(|c| c.into_iter().map(|w| d.worlds[w.0].clone()).collect())
                .collect()
        })
        .collect())
}

/// Resolves a description into a structurally valid model without auditing
/// constraints.
pub fn build_unchecked(d: &ModelDescription) -> Result<Model, BuildError> {
    if d.worlds.is_empty() {
        return Err(BuildError::NoWorlds);
    }
    let mut seen = BTreeSet::new();
    for w in &d.worlds {
        if !seen.insert(w.as_str()) {
            return Err(BuildError::DuplicateWorld(w.clone()));
        }
    }
    let r = Resolver::new(d)?;
    let facts = r.fact_table()?;
    let events = r.event_table()?;
    let n = d.worlds.len();
    let tcount = r.times.len();

    let classes = match &d.accessibility {
        AccessibilityDescription::Derived => {
            let all: Vec<&BTreeSet<Extent>> = facts.values().chain(events.values()).collect();
            canonical_classes(n, tcount, &all)
        }
        AccessibilityDescription::Explicit(entries) => {
            let mut slots: Vec<Option<Vec<Vec<WorldId>>>> = vec![None; tcount];
            for (time, partition) in entries {
                let t = r.time(time)?;
                let resolved = partition
                    .iter()
                    .map(|c| c.iter().map(|w| r.world(w)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                if slots[t.0].replace(resolved).is_some() {
                    return Err(BuildError::DuplicatePartition(time.clone()));
                }
            }
            slots
                .into_iter()
                .enumerate()
                .map(|(t, s)| s.ok_or_else(|| BuildError::MissingPartition(r.time_label(t))))
                .collect::<Result<Vec<_>, _>>()?
        }
    };

    let mut distributions: Vec<Vec<Option<Distribution>>> = vec![vec![None; n]; tcount];
    for (time, entries) in &d.prob {
        let t = r.time(time)?;
        for entry in entries {
            let mut mass = vec![Rational::zero(); n];
            for (w, m) in &entry.dist {
                mass[r.world(w)?.0] += m;
            }
            let dist = Distribution::new(mass)
                .map_err(|source| BuildError::Distribution { time: time.clone(), source })?;
            for w in &entry.class {
                let id = r.world(w)?;
                if distributions[t.0][id.0].replace(dist.clone()).is_some() {
                    return Err(BuildError::ConflictingDistribution { time: time.clone(), world: w.clone() });
                }
            }
        }
    }
    let distributions = distributions
        .into_iter()
        .enumerate()
        .map(|(t, row)| {
            row.into_iter()
                .enumerate()
                .map(|(w, d)| {
                    d.ok_or_else(|| BuildError::MissingDistribution {
                        time: r.time_label(t),
                        world: d_world(&r, w),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let time_symbols = d
        .times
        .iter()
        .map(|(s, v)| (TimeSymbol::new(s.as_str()), v.clone()))
        .collect();
    Model::from_parts(ModelParts { worlds: d.worlds.clone(), time_symbols, facts, events, classes, distributions })
}

fn d_world(r: &Resolver<'_>, w: usize) -> String {
    r.d.worlds[w].clone()
}

/// Resolves and audits a description; any constraint violation fails the
/// build.
pub fn build_model(d: &ModelDescription) -> Result<Model, BuildError> {
    build_model_with(d, C3Mode::Literal)
}

pub fn build_model_with(d: &ModelDescription, c3: C3Mode) -> Result<Model, BuildError> {
    let m = build_unchecked(d)?;
    let report = check_constraints(&m, c3);
    if report.is_clean() {
        Ok(m)
    } else {
        Err(BuildError::Violations(report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use alloc::borrow::ToOwned;

    fn s(x: &str) -> String {
        x.to_owned()
    }

    fn ext(world: &str, start: &str, end: &str) -> ExtentRef {
        ExtentRef { world: s(world), start: s(start), end: s(end) }
    }

    /// Two-coin chance setup: pick a coin over (t0,t1), flip over (t1,t2).
    pub(crate) fn coin() -> ModelDescription {
        let worlds = ["fair-heads", "fair-tails", "biased-heads", "biased-tails"];
        let class = |ws: &[&str], dist: &[(&str, Rational)]| ClassDistribution {
            class: ws.iter().map(|w| s(w)).collect(),
            dist: dist.iter().map(|(w, m)| (s(w), m.clone())).collect(),
        };
        let singletons: Vec<ClassDistribution> =
            worlds.iter().map(|w| class(&[w], &[(w, ratio(1, 1))])).collect();
        ModelDescription {
            times: vec![(s("t0"), ratio(0, 1)), (s("t1"), ratio(1, 1)), (s("t2"), ratio(2, 1))],
            worlds: worlds.iter().map(|w| s(w)).collect(),
            facts: vec![],
            events: vec![
                (s("choose-fair"), vec![ext("fair-heads", "t0", "t1"), ext("fair-tails", "t0", "t1")]),
                (s("choose-biased"), vec![ext("biased-heads", "t0", "t1"), ext("biased-tails", "t0", "t1")]),
                (s("heads"), vec![ext("fair-heads", "t1", "t2"), ext("biased-heads", "t1", "t2")]),
            ],
            accessibility: AccessibilityDescription::Derived,
            prob: vec![
                (
                    s("t0"),
                    vec![class(
                        &worlds,
                        &[
                            ("fair-heads", ratio(1, 4)),
                            ("fair-tails", ratio(1, 4)),
                            ("biased-heads", ratio(7, 20)),
                            ("biased-tails", ratio(3, 20)),
                        ],
                    )],
                ),
                (
                    s("t1"),
                    vec![
                        class(&worlds[..2], &[("fair-heads", ratio(1, 2)), ("fair-tails", ratio(1, 2))]),
                        class(&worlds[2..], &[("biased-heads", ratio(7, 10)), ("biased-tails", ratio(3, 10))]),
                    ],
                ),
                (s("2"), singletons),
            ],
        }
    }

    #[test]
    fn coin_builds() {
        let m = build_model(&coin()).unwrap();
        assert_eq!(m.world_count(), 4);
        assert_eq!(m.time_count(), 3);
        let t0 = m.time("t0").unwrap();
        for w in m.worlds() {
            assert_eq!(m.accessible(t0, w).len(), 4);
        }
        let t1 = m.time("1").unwrap();
        let fair = m.world("fair-tails").unwrap();
        assert_eq!(m.accessible_named("t1", "fair-tails").unwrap(), vec!["fair-heads", "fair-tails"]);
        assert_eq!(m.accessible(t1, fair).len(), 2);
        assert_eq!(m.accessible_named("t2", "biased-heads").unwrap(), vec!["biased-heads"]);
    }

    #[test]
    fn single_world_model_is_its_own_class() {
        let d = ModelDescription {
            times: vec![(s("a"), ratio(0, 1)), (s("b"), ratio(5, 2))],
            worlds: vec![s("only")],
            prob: vec![
                (s("a"), vec![ClassDistribution { class: vec![s("only")], dist: vec![(s("only"), ratio(1, 1))] }]),
                (s("b"), vec![ClassDistribution { class: vec![s("only")], dist: vec![(s("only"), ratio(1, 1))] }]),
            ],
            ..Default::default()
        };
        let m = build_model(&d).unwrap();
        for t in m.time_points() {
            assert_eq!(m.accessible(t, WorldId(0)), &[WorldId(0)]);
        }
    }

    #[test]
    fn masses_must_sum_to_one() {
        let mut d = coin();
        d.prob[0].1[0].dist[0].1 = ratio(3, 20);
        match build_model(&d) {
            Err(BuildError::Distribution { source: DistributionError::SumNotOne(sum), .. }) => {
                assert_eq!(sum, ratio(9, 10))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_mass_rejected() {
        let err = Distribution::new(vec![ratio(3, 2), ratio(-1, 2)]).unwrap_err();
        assert!(matches!(err, DistributionError::NegativeMass { world: 1, .. }));
    }

    #[test]
    fn unknown_references_rejected() {
        let mut d = coin();
        d.events[0].1.push(ext("nowhere", "t0", "t1"));
        assert_eq!(build_model(&d), Err(BuildError::UnknownWorld(s("nowhere"))));
        let mut d = coin();
        d.events[0].1.push(ext("fair-heads", "t0", "7/2"));
        assert_eq!(build_model(&d), Err(BuildError::UnknownTime(s("7/2"))));
        let mut d = coin();
        d.events[0].1.push(ext("fair-heads", "t2", "t1"));
        assert!(matches!(build_model(&d), Err(BuildError::BackwardInterval { .. })));
    }

    #[test]
    fn duplicate_world_and_missing_distribution() {
        let mut d = coin();
        d.worlds.push(s("fair-heads"));
        assert_eq!(build_model(&d), Err(BuildError::DuplicateWorld(s("fair-heads"))));
        let mut d = coin();
        d.prob.pop();
        assert!(matches!(build_model(&d), Err(BuildError::MissingDistribution { .. })));
    }

    #[test]
    fn distribution_outside_class_is_a_violation_not_repaired() {
        let mut d = coin();
        d.prob[1].1[0].dist = vec![(s("fair-heads"), ratio(1, 2)), (s("biased-heads"), ratio(1, 2))];
        match build_model(&d) {
            Err(BuildError::Violations(report)) => assert!(!report.is_clean()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derived_r_separates_after_extent_ends() {
        let d = coin();
        let r = derive_canonical_r(&d).unwrap();
        assert_eq!(r[0].len(), 1);
        assert_eq!(r[1], vec![vec![s("fair-heads"), s("fair-tails")], vec![s("biased-heads"), s("biased-tails")]]);
        assert_eq!(r[2].len(), 4);
    }

    #[test]
    fn derived_r_ignores_extents_ending_after_the_line() {
        // extents end inside T, so the latest a difference can surface is
        // the last point
        let mut d = coin();
        d.events = vec![(s("late"), vec![ext("fair-heads", "t1", "t2")])];
        let r = derive_canonical_r(&d).unwrap();
        assert_eq!(r[0].len(), 1);
        assert_eq!(r[1].len(), 1);
        assert_eq!(r[2].len(), 2);
    }

    #[test]
    fn derived_r_for_identical_worlds_never_separates() {
        let mut d = coin();
        d.events = vec![];
        let r = derive_canonical_r(&d).unwrap();
        assert!(r.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn description_round_trip() {
        let m = build_model(&coin()).unwrap();
        let again = build_model(&m.to_description()).unwrap();
        assert_eq!(m, again);
    }
}
