//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed (constraint violations, a failed
//! expectation or counterexample, no model found), 2 bad usage or input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use chronoprob_core::causality::{analyze_cause_with, CausalReport, EventOccurrence};
use chronoprob_core::constraints::{check_constraints, C3Mode, Violation, Witness};
use chronoprob_core::formula::Formula;
use chronoprob_core::model::{build_model_with, build_unchecked, BuildError, Model, TimePoint, WorldId};
use chronoprob_core::modelgen::{bounded_sat_while, describe, generate_model, GenParams, SatOutcome};
use chronoprob_core::principles::{expected_future_probability_with, Schema};
use chronoprob_core::rational::{to_decimal, Rational};
use chronoprob_core::semantics::Evaluator;
use chronoprob_core::syntax::{parse_formula, print_formula};

use crate::corpus::{self, CorpusParams, Tally};
use crate::fixtures::{self, Answer, Role};
use crate::model_file::{parse_model, rational_text, write_model};

#[derive(Parser, Debug)]
#[command(name = "chronoprob", version, about = "Temporal probability logic over finite branching-time models")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Audit a model file against C1-C6.
    Check {
        model: PathBuf,
        /// Require facts on every subinterval, point intervals included.
        #[arg(long)]
        strict: bool,
    },
    /// Truth of a formula at a world.
    Eval {
        model: PathBuf,
        #[arg(long)]
        world: String,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
    },
    /// Chance of a formula at a time and world.
    Prob {
        model: PathBuf,
        #[arg(long)]
        time: String,
        #[arg(long)]
        world: String,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
    },
    /// Expected chance at a later time, compared with the chance now.
    Expect {
        model: PathBuf,
        #[arg(long)]
        time: String,
        #[arg(long)]
        future: String,
        #[arg(long)]
        world: String,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
    },
    /// Check a valid schema (past-determined, inevitable-certain,
    /// inevitability-persists, detachment, miller, or all).
    Schema {
        name: String,
        #[arg(long, conflicts_with = "random")]
        model: Option<PathBuf>,
        /// Check generated models instead of a file.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Sampled formulas per model.
        #[arg(long, default_value_t = 6)]
        formulas: usize,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Prima facie and actual causation between two occurrences.
    Cause {
        model: PathBuf,
        #[arg(long)]
        world: String,
        /// `EVENT@t1,t2`
        #[arg(long)]
        cause: String,
        /// `EVENT@t1,t2`
        #[arg(long)]
        effect: String,
    },
    /// Search for a model of a formula.
    Sat {
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        #[command(flatten)]
        gen: GenArgs,
        /// Maximum number of candidate models.
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
        /// Seconds.
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
        /// Also write the model found to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in example: coin, car or carry.
    Example { name: String },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 6)]
    max_worlds: usize,
    #[arg(long, default_value_t = 4)]
    max_times: usize,
    #[arg(long, default_value_t = 2)]
    max_facts: usize,
    #[arg(long, default_value_t = 2)]
    max_events: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest denominator of a generated mass.
    #[arg(long, default_value_t = 4)]
    granularity: u32,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        GenParams {
            max_worlds: self.max_worlds.max(1),
            max_times: self.max_times.max(1),
            max_facts: self.max_facts,
            max_events: self.max_events,
            seed: self.seed,
            mass_granularity: self.granularity.max(1),
        }
    }
}

/// A finished command: exit code, text and JSON renderings.
struct Done {
    code: i32,
    text: String,
    json: Value,
}

/// Bad usage or unreadable input.
struct Usage(String);

type Outcome = Result<Done, Usage>;

/// Parses `args` (program name first) and runs the command, writing the
/// result to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let json = cli.json;
    match dispatch(cli.command) {
        Ok(done) => {
            let body = if json {
                serde_json::to_string_pretty(&done.json).expect("JSON values serialize")
            } else {
                done.text.trim_end().to_owned()
            };
            let _ = writeln!(out, "{body}");
            done.code
        }
        Err(Usage(msg)) => {
            if json {
                let _ = writeln!(out, "{}", json!({"error": msg}));
            }
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Check { model, strict } => check(&model, if strict { C3Mode::Strict } else { C3Mode::Literal }),
        Command::Eval { model, world, formula } => eval(&model, &world, &formula),
        Command::Prob { model, time, world, formula } => prob(&model, &time, &world, &formula),
        Command::Expect { model, time, future, world, formula } => expect(&model, &time, &future, &world, &formula),
        Command::Schema { name, model, random, trials, formulas, gen } => {
            schema(&name, model.as_deref(), random, trials, formulas, &gen)
        }
        Command::Cause { model, world, cause, effect } => cause_cmd(&model, &world, &cause, &effect),
        Command::Sat { formula, gen, budget, timeout, out } => sat(&formula, &gen, budget, timeout, out.as_deref()),
        Command::Example { name } => example(&name),
    }
}

fn read(path: &Path) -> Result<String, Usage> {
    std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn describe_file(path: &Path) -> Result<chronoprob_core::model::ModelDescription, Usage> {
    let text = read(path)?;
    parse_model(&text).map_err(|e| Usage(format!("{}:{e}", path.display())))
}

/// Loads and audits a model. Violations end the command with exit 1.
fn load(path: &Path) -> Result<Result<Model, Done>, Usage> {
    let d = describe_file(path)?;
    match build_model_with(&d, C3Mode::Literal) {
        Ok(m) => Ok(Ok(m)),
        Err(BuildError::Violations(_)) => {
            let m = build_unchecked(&d).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            Ok(Err(report(&m, C3Mode::Literal)))
        }
        Err(e) => Err(Usage(format!("{}: {e}", path.display()))),
    }
}

macro_rules! model_or_report {
    ($path:expr) => {
        match load($path)? {
            Ok(m) => m,
            Err(done) => return Ok(done),
        }
    };
}

fn formula(text: &str) -> Result<Formula, Usage> {
    parse_formula(text).map_err(|e| Usage(format!("formula:{e}")))
}

fn world(m: &Model, name: &str) -> Result<WorldId, Usage> {
    m.world(name).map_err(|e| Usage(e.to_string()))
}

fn time(m: &Model, name: &str) -> Result<TimePoint, Usage> {
    m.time(name).map_err(|e| Usage(e.to_string()))
}

fn exact(q: &Rational) -> Value {
    json!({"exact": rational_text(q), "decimal": to_decimal(q, 6)})
}

fn shown(q: &Rational) -> String {
    format!("{} ({})", rational_text(q), to_decimal(q, 6))
}

fn check(path: &Path, mode: C3Mode) -> Outcome {
    let d = describe_file(path)?;
    let m = build_unchecked(&d).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    Ok(report(&m, mode))
}

fn report(m: &Model, mode: C3Mode) -> Done {
    let r = check_constraints(m, mode);
    let entries: Vec<Value> = r.entries.iter().map(|v| violation_json(m, v)).collect();
    Done {
        code: if r.is_clean() { 0 } else { 1 },
        text: r.to_string(),
        json: json!({"clean": r.is_clean(), "violations": entries}),
    }
}

fn violation_json(m: &Model, v: &Violation) -> Value {
    let t = |p: &TimePoint| m.time_name(*p);
    let w = |x: &WorldId| m.world_name(*x).to_owned();
    let witness = match &v.witness {
        Witness::Refinement { earlier, later, worlds } => {
            json!({"earlier": t(earlier), "later": t(later), "worlds": [w(&worlds.0), w(&worlds.1)]})
        }
        Witness::Partition { time, world, defect } => {
            json!({"time": t(time), "world": w(world), "defect": format!("{defect:?}").to_lowercase()})
        }
        Witness::Subinterval { fact, world, holds, missing } => json!({
            "fact": fact.as_str(), "world": w(world),
            "holds": [t(&holds.0), t(&holds.1)], "missing": [t(&missing.0), t(&missing.1)],
        }),
        Witness::Agreement { time, worlds, symbol, interval } => json!({
            "time": t(time), "worlds": [w(&worlds.0), w(&worlds.1)],
            "symbol": symbol, "interval": [t(&interval.0), t(&interval.1)],
        }),
        Witness::ClassMass { time, world, mass } => json!({"time": t(time), "world": w(world), "mass": rational_text(mass)}),
        Witness::SharedDistribution { time, worlds } => json!({"time": t(time), "worlds": [w(&worlds.0), w(&worlds.1)]}),
    };
    json!({"constraint": v.constraint.label(), "message": v.message, "witness": witness})
}

fn eval(path: &Path, w: &str, text: &str) -> Outcome {
    let m = model_or_report!(path);
    let f = formula(text)?;
    let w = world(&m, w)?;
    let value = Evaluator::new(&m).holds_at(w, &f).map_err(|e| Usage(e.to_string()))?;
    Ok(Done {
        code: 0,
        text: format!("{value}"),
        json: json!({"world": m.world_name(w), "formula": print_formula(&f), "value": value}),
    })
}

fn prob(path: &Path, t: &str, w: &str, text: &str) -> Outcome {
    let m = model_or_report!(path);
    let f = formula(text)?;
    let (t, w) = (time(&m, t)?, world(&m, w)?);
    let p = Evaluator::new(&m).probability(t, w, &f).map_err(|e| Usage(e.to_string()))?;
    Ok(Done {
        code: 0,
        text: shown(&p),
        json: json!({
            "time": m.time_name(t), "world": m.world_name(w), "formula": print_formula(&f),
            "probability": exact(&p),
        }),
    })
}

fn expect(path: &Path, t: &str, future: &str, w: &str, text: &str) -> Outcome {
    let m = model_or_report!(path);
    let f = formula(text)?;
    let (t, t2, w) = (time(&m, t)?, time(&m, future)?, world(&m, w)?);
    let ev = Evaluator::new(&m);
    let expected = expected_future_probability_with(&ev, t, t2, w, &f).map_err(|e| Usage(e.to_string()))?;
    let now = ev.probability(t, w, &f).map_err(|e| Usage(e.to_string()))?;
    let agree = expected == now;
    Ok(Done {
        code: if agree { 0 } else { 1 },
        text: format!(
            "expected chance at {}: {}\nchance at {}: {}\n{}",
            m.time_name(t2),
            shown(&expected),
            m.time_name(t),
            shown(&now),
            if agree { "equal" } else { "DIFFERENT" }
        ),
        json: json!({
            "time": m.time_name(t), "future": m.time_name(t2), "world": m.world_name(w),
            "formula": print_formula(&f), "expected": exact(&expected), "probability": exact(&now), "equal": agree,
        }),
    })
}

fn schemas(name: &str) -> Result<Vec<Schema>, Usage> {
    if name == "all" {
        return Ok(Schema::ALL.to_vec());
    }
    Schema::from_name(name).map(|s| vec![s]).ok_or_else(|| {
        let names: Vec<&str> = Schema::ALL.iter().map(|s| s.name()).collect();
        Usage(format!("unknown schema `{name}` (expected one of {}, all)", names.join(", ")))
    })
}

fn schema(name: &str, model: Option<&Path>, random: bool, trials: u64, formulas: usize, gen: &GenArgs) -> Outcome {
    let list = schemas(name)?;
    let cp = CorpusParams { formulas: formulas.max(1), ..CorpusParams::default() };
    let mut tallies: Vec<Tally> = vec![Tally::default(); list.len()];
    let mut run_on = |m: &Model, seed: u64| {
        let ev = Evaluator::new(m);
        let fs = corpus::sample_formulas(m, seed, &cp);
        for (s, tally) in list.iter().zip(tallies.iter_mut()) {
            tally.absorb(corpus::check_schema_on(&ev, *s, &fs, &cp));
        }
    };
    let models = match (model, random) {
        (Some(path), _) => {
            let m = model_or_report!(path);
            run_on(&m, gen.seed);
            1
        }
        (None, true) => {
            let p = gen.params();
            for seed in gen.seed..gen.seed.saturating_add(trials) {
                run_on(&generate_model(&p.with_seed(seed)), seed);
            }
            trials
        }
        (None, false) => return Err(Usage("schema needs --model <file> or --random".into())),
    };
    let clean = tallies.iter().all(Tally::is_clean);
    let mut text = String::new();
    let mut rows = Vec::new();
    for (s, t) in list.iter().zip(&tallies) {
        text.push_str(&format!("{}: {} instances, {} counterexamples\n", s, t.checked, t.failures.len()));
        for f in &t.failures {
            text.push_str(&format!("  {f}\n"));
        }
        rows.push(json!({"schema": s.name(), "instances": t.checked, "counterexamples": t.failures}));
    }
    Ok(Done { code: if clean { 0 } else { 1 }, text, json: json!({"models": models, "results": rows, "valid": clean}) })
}

fn occurrence(text: &str) -> Result<EventOccurrence, Usage> {
    EventOccurrence::parse(text).ok_or_else(|| Usage(format!("`{text}` is not of the form EVENT@t1,t2")))
}

fn cause_json(r: &CausalReport) -> Value {
    json!({
        "cond1": r.cond1, "cond2": r.cond2, "cond3": r.cond3,
        "prima_facie": r.prima_facie, "actual": r.actual,
        "p_cause": exact(&r.p_cause), "p_effect": exact(&r.p_effect), "p_joint": exact(&r.p_joint),
    })
}

fn cause_text(cause: &EventOccurrence, effect: &EventOccurrence, r: &CausalReport) -> String {
    format!(
        "cause {cause}, effect {effect}\n\
         1. temporal non-succession: {}\n\
         2. possibility of cause: {} (P = {})\n\
         3. positive influence: {} (P(joint) = {}, P(effect) * P(cause) = {})\n\
         prima facie: {}\nactual: {}",
        r.cond1,
        r.cond2,
        shown(&r.p_cause),
        r.cond3,
        shown(&r.p_joint),
        shown(&(&r.p_effect * &r.p_cause)),
        r.prima_facie,
        r.actual
    )
}

fn cause_cmd(path: &Path, w: &str, cause: &str, effect: &str) -> Outcome {
    let m = model_or_report!(path);
    let w = world(&m, w)?;
    let (c, e) = (occurrence(cause)?, occurrence(effect)?);
    let r = analyze_cause_with(&Evaluator::new(&m), w, &c, &e).map_err(|e| Usage(e.to_string()))?;
    let mut j = cause_json(&r);
    j["world"] = json!(m.world_name(w));
    j["cause"] = json!(c.to_string());
    j["effect"] = json!(e.to_string());
    Ok(Done { code: 0, text: cause_text(&c, &e, &r), json: j })
}

fn sat(text: &str, gen: &GenArgs, budget: u64, timeout: f64, out: Option<&Path>) -> Outcome {
    let f = formula(text)?;
    if !(timeout.is_finite() && timeout >= 0.0) {
        return Err(Usage(format!("bad timeout {timeout}")));
    }
    let p = gen.params();
    let deadline = Instant::now() + Duration::from_secs_f64(timeout);
    let started = Instant::now();
    let outcome = bounded_sat_while(&f, &p, budget, || Instant::now() < deadline);
    let secs = started.elapsed().as_secs_f64();
    Ok(match outcome {
        SatOutcome::Found { model, world, trials } => {
            let d = model.to_description();
            let file = write_model(&d);
            if let Some(path) = out {
                std::fs::write(path, &file).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            }
            Done {
                code: 0,
                text: format!(
                    "found a model after {trials} candidates ({secs:.2}s); the formula holds at {}\n{file}",
                    model.world_name(world)
                ),
                json: json!({
                    "found": true, "trials": trials, "world": model.world_name(world),
                    "model": crate::model_file::description_to_json(&d),
                }),
            }
        }
        SatOutcome::Unknown { trials } => Done {
            code: 1,
            text: format!("no model found after {trials} candidates ({secs:.2}s) with {}", describe(&p)),
            json: json!({"found": false, "trials": trials}),
        },
    })
}

fn answer_json(a: &Answer<'_>) -> Value {
    let observed = match &a.observed {
        fixtures::Observed::Value(q) => exact(q),
        fixtures::Observed::Truth(b) => json!(b),
    };
    json!({"label": a.query.label, "expected": a.query.expect.to_string(), "observed": observed, "ok": a.ok})
}

fn example(name: &str) -> Outcome {
    let fx = fixtures::fixture(name).ok_or_else(|| {
        Usage(format!("unknown example `{name}` (expected one of {})", fixtures::NAMES.join(", ")))
    })?;
    let m = fx.model();
    let clean = check_constraints(&m, C3Mode::Literal);
    let answers = fx.answer(&m).map_err(Usage)?;
    let ok = clean.is_clean() && answers.iter().all(|a| a.ok);

    let mut text = format!("{}\n\n{}\n\nmodel: {} worlds, {} time points; constraints: {}\n", fx.title, fx.narrative, m.world_count(), m.time_count(), clean);
    for (role, heading) in [(Role::Premise, "premises"), (Role::Conclusion, "conclusions")] {
        text.push_str(&format!("\n{heading}:\n"));
        for a in answers.iter().filter(|a| a.query.role == role) {
            let seen = match &a.observed {
                fixtures::Observed::Value(q) => shown(q),
                fixtures::Observed::Truth(b) => b.to_string(),
            };
            let mark = if a.ok { "ok" } else { "FAILED" };
            text.push_str(&format!("  [{mark}] {}: {seen} (expected {})\n", a.query.label, a.query.expect));
        }
    }
    if name == "car" {
        let ev = Evaluator::new(&m);
        let c = EventOccurrence::new("turn-key", "ts", "ts'");
        let e = EventOccurrence::new("start", "ts", "ts'");
        for w in ["wks", "cks"] {
            let r = analyze_cause_with(&ev, m.world(w).expect("fixture world"), &c, &e).map_err(|e| Usage(e.to_string()))?;
            text.push_str(&format!("\nin world {w}:\n{}\n", cause_text(&c, &e, &r)));
        }
    }
    let premises: Vec<Value> =
        answers.iter().filter(|a| a.query.role == Role::Premise).map(answer_json).collect();
    let conclusions: Vec<Value> =
        answers.iter().filter(|a| a.query.role == Role::Conclusion).map(answer_json).collect();
    Ok(Done {
        code: if ok { 0 } else { 1 },
        text,
        json: json!({
            "example": fx.name, "title": fx.title, "narrative": fx.narrative, "clean": clean.is_clean(),
            "premises": premises, "conclusions": conclusions, "ok": ok,
        }),
    })
}
