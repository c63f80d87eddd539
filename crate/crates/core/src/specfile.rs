//! JSON files of local specifications and events.
//!
//! A spec file is a JSON array of specifications:
//! `{"p": 7, "level": 1, "images": [[1]], "frob": [0]}` or `{"infinity": [0]}`.
//! An event file may also contain condition entries such as
//! `{"p": 5, "unit": "ramified"}` or `{"p": 3, "unit": "unramified", "frob": [0]}` or
//! `{"p": 13, "splitting": {"e": 1, "fRes": 2, "numPrimes": 2}}`.

use serde::Deserialize;
use serde_json::Value;

use crate::characters::{LocalSpec, LocalSpecJson, Place, SplittingType};
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::stats::{Event, PlaceCondition, UnitCondition};

fn reduce(g: &FiniteAbelianGroup, v: &[u64], what: &str) -> Result<Vec<u64>> {
    if v.len() != g.rank() {
        return Err(Error::Parse(format!("{what}: expected {} coordinates, got {}", g.rank(), v.len())));
    }
    Ok(v.iter().zip(g.factors()).map(|(x, n)| x % n).collect())
}

fn reduce_spec_json(g: &FiniteAbelianGroup, j: &LocalSpecJson) -> Result<LocalSpecJson> {
    Ok(match j {
        LocalSpecJson::Infinity { infinity } => LocalSpecJson::Infinity { infinity: reduce(g, infinity, "infinity")? },
        LocalSpecJson::Finite { p, level, images, frob } => LocalSpecJson::Finite {
            p: *p,
            level: *level,
            images: images.iter().map(|x| reduce(g, x, "images")).collect::<Result<_>>()?,
            frob: reduce(g, frob, "frob")?,
        },
    })
}

fn top_array(text: &str) -> Result<Vec<Value>> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    match v {
        Value::Array(a) => Ok(a),
        _ => Err(Error::Parse("expected a JSON array of entries".into())),
    }
}

fn parse_spec_entry(g: &FiniteAbelianGroup, i: usize, v: &Value) -> Result<LocalSpec> {
    let j: LocalSpecJson =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("entry {i}: {e}: {v}")))?;
    LocalSpec::from_json(g, &reduce_spec_json(g, &j)?).map_err(|e| Error::Parse(format!("entry {i}: {e}")))
}

fn check_distinct(places: impl Iterator<Item = Place>) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for p in places {
        if !seen.insert(p) {
            return Err(Error::Parse(format!("duplicate place {p}")));
        }
    }
    Ok(())
}

/// Parses a list of local specifications (places distinct, coordinates reduced).
pub fn parse_specs(g: &FiniteAbelianGroup, text: &str) -> Result<Vec<LocalSpec>> {
    let specs = top_array(text)?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_spec_entry(g, i, v))
        .collect::<Result<Vec<_>>>()?;
    check_distinct(specs.iter().map(|s| s.place))?;
    Ok(specs)
}

pub fn parse_spec_file(g: &FiniteAbelianGroup, path: &std::path::Path) -> Result<Vec<LocalSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_specs(g, &text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn specs_to_json(specs: &[LocalSpec]) -> String {
    let js: Vec<LocalSpecJson> = specs.iter().map(|s| s.to_json()).collect();
    serde_json::to_string(&js).expect("specs serialize")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ConditionJson {
    p: Option<u64>,
    #[serde(default)]
    infinity: bool,
    unit: Option<String>,
    frob: Option<Vec<u64>>,
    splitting: Option<SplittingType>,
}

fn parse_condition(g: &FiniteAbelianGroup, i: usize, v: &Value) -> Result<PlaceCondition> {
    let c: ConditionJson =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("entry {i}: {e}: {v}")))?;
    let place = match (c.p, c.infinity) {
        (Some(p), false) if crate::arith::is_prime(p) => Place::Finite(p),
        (Some(p), false) => return Err(Error::Parse(format!("entry {i}: {p} is not prime"))),
        (None, true) => Place::Infinity,
        _ => return Err(Error::Parse(format!("entry {i}: give exactly one of `p` and `infinity: true`"))),
    };
    let unit = match c.unit.as_deref() {
        None | Some("any") => UnitCondition::Any,
        Some("ramified") => UnitCondition::Ramified,
        Some("unramified") => UnitCondition::Unramified,
        Some(o) => return Err(Error::Parse(format!("entry {i}: field `unit`: unknown value {o:?}"))),
    };
    let frob = c.frob.map(|f| reduce(g, &f, "frob").map(GroupElement)).transpose()?;
    Ok(PlaceCondition { place, unit, frob, splitting: c.splitting })
}

/// Parses an event: a conjunction of full specifications and condition entries.
pub fn parse_event(g: &FiniteAbelianGroup, text: &str) -> Result<Event> {
    let mut conds = Vec::new();
    for (i, v) in top_array(text)?.iter().enumerate() {
        let is_spec = v.get("level").is_some() || v.get("images").is_some() || v.get("infinity").is_some_and(|x| x.is_array());
        conds.push(if is_spec {
            PlaceCondition::from_spec(&parse_spec_entry(g, i, v)?)
        } else {
            parse_condition(g, i, v)?
        });
    }
    check_distinct(conds.iter().map(|c| c.place))?;
    Event::new(conds)
}

pub fn parse_event_file(g: &FiniteAbelianGroup, path: &std::path::Path) -> Result<Event> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_event(g, &text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
