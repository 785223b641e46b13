//! Prima facie causation between event occurrences.

use alloc::string::{String, ToString};
use alloc::vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::formula::{Comparator, EventSymbol, Formula, Monomial, Polynomial, ProbCmp, TimeSymbol};
use crate::model::{Model, TimePoint, WorldId};
use crate::rational::Rational;
use crate::semantics::{EvalError, Evaluator};

/// `event` occurring over `(start, end)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventOccurrence {
    pub event: EventSymbol,
    pub start: TimeSymbol,
    pub end: TimeSymbol,
}

impl EventOccurrence {
    pub fn new(event: &str, start: &str, end: &str) -> Self {
        EventOccurrence { event: event.into(), start: start.into(), end: end.into() }
    }

    /// `EV@t1,t2`.
    pub fn parse(text: &str) -> Option<Self> {
        let (event, times) = text.split_once('@')?;
        let (start, end) = times.split_once(',')?;
        let (event, start, end) = (event.trim(), start.trim(), end.trim());
        let ok = |s: &str| crate::syntax::is_symbol_name(s);
        (ok(event) && ok(start) && ok(end)).then(|| EventOccurrence::new(event, start, end))
    }

    pub fn formula(&self) -> Formula {
        Formula::Occ(self.start.clone(), self.end.clone(), self.event.clone())
    }
}

impl fmt::Display for EventOccurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{},{}", self.event, self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalReport {
    /// Temporal non-succession, `t_A < t_E'`. Also called temporal precedence.
    pub cond1: bool,
    /// Possibility of cause, `P_{t_A}(A) > 0`.
    pub cond2: bool,
    /// Positive influence, `P_{t_A}(E & A) > P_{t_A}(E) * P_{t_A}(A)`.
    pub cond3: bool,
    pub prima_facie: bool,
    pub actual: bool,
    pub p_cause: Rational,
    pub p_effect: Rational,
    pub p_joint: Rational,
}

impl CausalReport {
    pub fn temporal_precedence(&self) -> bool {
        self.cond1
    }

    pub fn temporal_non_succession(&self) -> bool {
        self.cond1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CauseError {
    #[error("unknown event symbol `{0}`")]
    UnknownEvent(String),
    #[error("time `{0}` is not a point of the model")]
    UnknownTime(String),
    #[error("interval of {0} ends before it starts")]
    BackwardInterval(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn resolve(m: &Model, occ: &EventOccurrence) -> Result<(TimePoint, TimePoint), CauseError> {
    if m.event_extents(&occ.event).is_none() {
        return Err(CauseError::UnknownEvent(occ.event.to_string()));
    }
    let point = |s: &TimeSymbol| m.denote(s).ok_or_else(|| CauseError::UnknownTime(s.to_string()));
    let (a, b) = (point(&occ.start)?, point(&occ.end)?);
    if a > b {
        return Err(CauseError::BackwardInterval(occ.to_string()));
    }
    Ok((a, b))
}

pub fn analyze_cause(
    m: &Model,
    w: WorldId,
    cause: &EventOccurrence,
    effect: &EventOccurrence,
) -> Result<CausalReport, CauseError> {
    analyze_cause_with(&Evaluator::new(m), w, cause, effect)
}

pub fn analyze_cause_with(
    ev: &Evaluator<'_>,
    w: WorldId,
    cause: &EventOccurrence,
    effect: &EventOccurrence,
) -> Result<CausalReport, CauseError> {
    let m = ev.model();
    let (ta, _) = resolve(m, cause)?;
    let (_, te_end) = resolve(m, effect)?;
    let (a, e) = (cause.formula(), effect.formula());
    let p_cause = ev.probability(ta, w, &a)?;
    let p_effect = ev.probability(ta, w, &e)?;
    let p_joint = ev.probability(ta, w, &Formula::and(e.clone(), a))?;
    let cond1 = ta < te_end;
    let cond2 = p_cause > Rational::zero();
    let cond3 = p_joint > &p_effect * &p_cause;
    let prima_facie = cond1 && cond2 && cond3;
    let actual = prima_facie && ev.holds_at(w, &e)?;
    Ok(CausalReport { cond1, cond2, cond3, prima_facie, actual, p_cause, p_effect, p_joint })
}

/// Positive influence as a sentence of the logic, in product form.
pub fn positive_influence(cause: &EventOccurrence, effect: &EventOccurrence) -> Formula {
    let (a, e) = (cause.formula(), effect.formula());
    let poly = Polynomial::new([
        Monomial::term(Rational::one(), vec![Formula::and(e.clone(), a.clone())]),
        Monomial::term(-Rational::one(), vec![e, a]),
    ]);
    Formula::Prob(ProbCmp { time: cause.start.clone(), poly, cmp: Comparator::Gt })
}
