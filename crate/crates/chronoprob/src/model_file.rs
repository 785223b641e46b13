//! JSON model files.
//!
//! ```json
//! {
//!   "times":  {"t0": 0, "t1": "1/2"},
//!   "worlds": ["a", "b"],
//!   "facts":  {"raining": [["a", "t0", "t1"]]},
//!   "events": {},
//!   "R":      {"mode": "derived"},
//!   "prob":   {"t0": [{"class": ["a", "b"], "dist": {"a": "1/2", "b": "1/2"}}], ...}
//! }
//! ```
//!
//! `facts`, `events` and `R` may be omitted; `R` then defaults to derived.

use std::collections::BTreeSet;
use std::fmt;
use std::marker::PhantomData;

use chronoprob_core::model::{AccessibilityDescription, ClassDistribution, ExtentRef, ModelDescription};
use chronoprob_core::rational::{parse_rational, Rational};
use chronoprob_core::syntax::ParseError;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::{self, DeserializeOwned, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer};
use serde_json::{json, Map, Value};

/// Parses a model file into a description. Positions in errors are those
/// reported by the JSON reader.
pub fn parse_model(text: &str) -> Result<ModelDescription, ParseError> {
    let file: File = serde_json::from_str(text).map_err(|e| {
        let message = strip_position(&e.to_string());
        ParseError::new(e.line().max(1), e.column().max(1), message)
    })?;
    Ok(file.into_description())
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_owned(),
        None => message.to_owned(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    times: Ordered<Exact>,
    worlds: Worlds,
    #[serde(default)]
    facts: Ordered<Vec<(TimeRef, TimeRef, TimeRef)>>,
    #[serde(default)]
    events: Ordered<Vec<(TimeRef, TimeRef, TimeRef)>>,
    #[serde(rename = "R", default)]
    r: Relation,
    prob: Ordered<Vec<ClassEntry>>,
}

#[derive(Deserialize, Default)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
enum Relation {
    Explicit {
        classes: Ordered<Vec<Vec<String>>>,
    },
    #[default]
    Derived,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    class: Vec<String>,
    dist: Ordered<Exact>,
}

impl File {
    fn into_description(self) -> ModelDescription {
        let extents = |entries: Ordered<Vec<(TimeRef, TimeRef, TimeRef)>>| {
            entries
                .0
                .into_iter()
                .map(|(sym, list)| {
                    let list = list
                        .into_iter()
                        .map(|(w, a, b)| ExtentRef { world: w.0, start: a.0, end: b.0 })
                        .collect();
                    (sym, list)
                })
                .collect()
        };
        ModelDescription {
            times: self.times.0.into_iter().map(|(k, v)| (k, v.0)).collect(),
            worlds: self.worlds.0,
            facts: extents(self.facts),
            events: extents(self.events),
            accessibility: match self.r {
                Relation::Derived => AccessibilityDescription::Derived,
                Relation::Explicit { classes } => AccessibilityDescription::Explicit(classes.0),
            },
            prob: self
                .prob
                .0
                .into_iter()
                .map(|(t, entries)| {
                    let entries = entries
                        .into_iter()
                        .map(|e| ClassDistribution {
                            class: e.class,
                            dist: e.dist.0.into_iter().map(|(w, q)| (w, q.0)).collect(),
                        })
                        .collect();
                    (t, entries)
                })
                .collect(),
        }
    }
}

/// A JSON object read in order, rejecting repeated keys.
struct Ordered<T>(Vec<(String, T)>);

impl<T> Default for Ordered<T> {
    fn default() -> Self {
        Ordered(Vec::new())
    }
}

impl<'de, T: DeserializeOwned> Deserialize<'de> for Ordered<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: DeserializeOwned> Visitor<'de> for V<T> {
            type Value = Ordered<T>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                while let Some(key) = map.next_key::<String>()? {
                    if !seen.insert(key.clone()) {
                        return Err(de::Error::custom(format!("duplicate key `{key}`")));
                    }
                    out.push((key, map.next_value()?));
                }
                Ok(Ordered(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

struct Worlds(Vec<String>);

impl<'de> Deserialize<'de> for Worlds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Worlds;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of world names")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Worlds, A::Error> {
                let mut out: Vec<String> = Vec::new();
                while let Some(w) = seq.next_element::<String>()? {
                    if out.contains(&w) {
                        return Err(de::Error::custom(format!("duplicate world `{w}`")));
                    }
                    out.push(w);
                }
                Ok(Worlds(out))
            }
        }
        d.deserialize_seq(V)
    }
}

/// A time or world reference: a string, or a number taken as its literal.
struct TimeRef(String);

impl<'de> Deserialize<'de> for TimeRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => Ok(TimeRef(s)),
            Value::Number(n) => Ok(TimeRef(n.to_string())),
            other => Err(de::Error::custom(format!("expected a name or number, found {other}"))),
        }
    }
}

/// A rational given as `"p/q"`, a decimal string, or a JSON number.
struct Exact(Rational);

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = match Value::deserialize(d)? {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            other => return Err(de::Error::custom(format!("expected a rational, found {other}"))),
        };
        exact(&text).map(Exact).map_err(de::Error::custom)
    }
}

fn exact(text: &str) -> Result<Rational, String> {
    let bad = |e: &dyn fmt::Display| format!("bad rational `{text}`: {e}");
    match text.split_once(['e', 'E']) {
        None => parse_rational(text).map_err(|e| bad(&e)),
        Some((mantissa, exp)) => {
            let m = parse_rational(mantissa).map_err(|e| bad(&e))?;
            let exp: i32 = exp.parse().map_err(|e| bad(&e))?;
            let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), exp.unsigned_abs() as usize));
            Ok(if exp >= 0 { m * scale } else { m / scale })
        }
    }
}

/// `p/q`, or the bare integer when `q = 1`.
pub fn rational_text(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn rational_value(q: &Rational) -> Value {
    if q.denom().is_one() && q.numer().bits() < 53 {
        json!(i64::try_from(q.numer()).unwrap_or_default())
    } else {
        Value::String(rational_text(q))
    }
}

/// The JSON form of a description. Zero masses are left out of `dist`.
pub fn description_to_json(d: &ModelDescription) -> Value {
    let extents = |list: &[(String, Vec<ExtentRef>)]| {
        let mut map = Map::new();
        for (sym, exts) in list {
            let rows: Vec<Value> = exts.iter().map(|e| json!([e.world, e.start, e.end])).collect();
            map.insert(sym.clone(), Value::Array(rows));
        }
        Value::Object(map)
    };
    let mut times = Map::new();
    for (s, v) in &d.times {
        times.insert(s.clone(), rational_value(v));
    }
    let r = match &d.accessibility {
        AccessibilityDescription::Derived => json!({"mode": "derived"}),
        AccessibilityDescription::Explicit(classes) => {
            let mut map = Map::new();
            for (t, partition) in classes {
                map.insert(t.clone(), json!(partition));
            }
            json!({"mode": "explicit", "classes": map})
        }
    };
    let mut prob = Map::new();
    for (t, entries) in &d.prob {
        let rows: Vec<Value> = entries
            .iter()
            .map(|e| {
                let mut dist = Map::new();
                for (w, q) in e.dist.iter().filter(|(_, q)| !q.is_zero()) {
                    dist.insert(w.clone(), Value::String(rational_text(q)));
                }
                json!({"class": e.class, "dist": dist})
            })
            .collect();
        prob.insert(t.clone(), Value::Array(rows));
    }
    json!({
        "times": times,
        "worlds": d.worlds,
        "facts": extents(&d.facts),
        "events": extents(&d.events),
        "R": r,
        "prob": prob,
    })
}

pub fn write_model(d: &ModelDescription) -> String {
    serde_json::to_string_pretty(&description_to_json(d)).expect("JSON values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use chronoprob_core::model::build_model;
    use chronoprob_core::rational::ratio;

    const SMALL: &str = r#"{
        "times": {"t0": 0, "t1": "1"},
        "worlds": ["a", "b"],
        "events": {"flip": [["a", "t0", "t1"]]},
        "prob": {
            "t0": [{"class": ["a", "b"], "dist": {"a": "7/20", "b": 0.65}}],
            "t1": [{"class": ["a"], "dist": {"a": 1}}, {"class": ["b"], "dist": {"b": "1"}}]
        }
    }"#;

    #[test]
    fn reads_exact_masses() {
        let d = parse_model(SMALL).unwrap();
        assert_eq!(d.worlds, ["a", "b"]);
        assert_eq!(d.accessibility, AccessibilityDescription::Derived);
        assert_eq!(d.prob[0].1[0].dist, vec![("a".to_owned(), ratio(7, 20)), ("b".to_owned(), ratio(13, 20))]);
        build_model(&d).unwrap();
    }

    #[test]
    fn round_trips_through_json() {
        let d = parse_model(SMALL).unwrap();
        let again = parse_model(&write_model(&d)).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_model(r#"{"times": {"t0": 0}, "prob": {}}"#).unwrap_err();
        assert!(e.message.contains("worlds"), "{e}");
        let e = parse_model("{\n  \"times\": {\"t0\": 0},\n  \"worlds\": [\"a\", \"a\"]}").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("duplicate world `a`"));
        let e = parse_model(r#"{"times": {"t0": "1/0"}, "worlds": ["a"], "prob": {}}"#).unwrap_err();
        assert!(e.message.contains("bad rational"), "{e}");
        let e = parse_model(r#"{"times": {"t0": 0, "t0": 1}, "worlds": ["a"], "prob": {}}"#).unwrap_err();
        assert!(e.message.contains("duplicate key"), "{e}");
        let e = parse_model("").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
    }

    #[test]
    fn exponents_are_exact() {
        assert_eq!(exact("25e-2").unwrap(), ratio(1, 4));
        assert_eq!(exact("1.5E1").unwrap(), ratio(15, 1));
        assert!(exact("x").is_err());
    }
}
