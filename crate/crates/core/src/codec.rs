//! JSON documents for configurations, blocks, systems, pseudo-orbits and
//! point sets. Keys come out sorted, so equal values print identically.
//!
//! A configuration is an object with one key naming its kind:
//! `{"constant": 1}`, `{"automaton": {"start", "output", "transitions"}}`,
//! `{"override": {"base", "depth", "entries": [[word, symbol], ...]}}`,
//! `{"shift": {"base", "by"}}` or `{"readout": {"points", "sites"}}`.
//! On input `{"block": {"depth", "entries", "base"?}}` is also accepted.

use serde::ser::Serializer;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::orbits::{PseudoOrbit, TailRule};
use crate::patterns::{Alphabet, Block, Configuration, Node, SiteTree, Sym, WordAutomaton};
use crate::shifts::ShiftSystem;
use crate::words::{Letter, ReducedWord, Signature};

fn parse_err(what: &str) -> Error {
    Error::Parse(format!("malformed {what}"))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| parse_err(what))
}

fn as_sym(v: &Value, what: &str) -> Result<Sym> {
    v.as_u64()
        .and_then(|n| Sym::try_from(n).ok())
        .ok_or_else(|| parse_err(what))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(what))
}

fn field<'a>(v: &'a Value, key: &str, what: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("{what} is missing {key:?}")))
}

fn word(sig: Signature, v: &Value) -> Result<ReducedWord> {
    let s = v.as_str().ok_or_else(|| parse_err("word"))?;
    sig.parse_word(s)
}

/// Accepts `"group:2"` or `{"kind": "group", "rank": 2}`.
pub fn signature_from_json(v: &Value) -> Result<Signature> {
    match v {
        Value::String(s) => s.parse(),
        _ => serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string())),
    }
}

pub fn config_to_json(x: &Configuration) -> Value {
    let sig = x.signature();
    match x.node() {
        Node::Constant(s) => json!({ "constant": s }),
        Node::Automaton(a) => {
            let transitions: Vec<Value> = (0..a.states())
                .map(|s| {
                    let row: Map<String, Value> = sig
                        .letters()
                        .into_iter()
                        .map(|l| (l.to_string(), json!(a.next(s, l))))
                        .collect();
                    Value::Object(row)
                })
                .collect();
            json!({ "automaton": { "start": a.start(), "output": a.output(), "transitions": transitions } })
        }
        Node::Override { base, depth, entries } => {
            let ball = sig.ball(*depth).expect("override ball was built before");
            let set: Vec<Value> = ball
                .iter()
                .zip(entries)
                .filter_map(|(u, s)| s.map(|s| json!([u, s])))
                .collect();
            json!({ "override": { "base": config_to_json(base), "depth": depth, "entries": set } })
        }
        Node::Shifted { base, by } => json!({ "shift": { "base": config_to_json(base), "by": by } }),
        Node::Readout(tree) => json!({ "readout": tree_to_json(tree) }),
    }
}

fn tree_to_json(tree: &SiteTree) -> Value {
    let mut m = Map::new();
    m.insert(
        "points".into(),
        Value::Array(tree.points().iter().map(config_to_json).collect()),
    );
    m.insert(
        "sites".into(),
        Value::Array(tree.sites().map(|(u, i)| json!([u, i])).collect()),
    );
    if let Some(table) = tree.continuation() {
        m.insert("continuation".into(), json!(table));
    }
    Value::Object(m)
}

fn tree_from_json(sig: Signature, v: &Value) -> Result<SiteTree> {
    let points = as_array(field(v, "points", "readout")?, "readout points")?
        .iter()
        .map(|p| config_from_json(sig, p))
        .collect::<Result<Vec<_>>>()?;
    let sites = as_array(field(v, "sites", "readout")?, "readout sites")?
        .iter()
        .map(|s| match s.as_array().map(Vec::as_slice) {
            Some([u, i]) => Ok((word(sig, u)?, as_usize(i, "site index")?)),
            _ => Err(parse_err("site")),
        })
        .collect::<Result<Vec<_>>>()?;
    let tree = SiteTree::new(points, sites)?;
    match v.get("continuation") {
        Some(t) => {
            let table: Vec<Vec<Option<usize>>> =
                serde_json::from_value(t.clone()).map_err(|e| Error::Parse(e.to_string()))?;
            tree.with_continuation(table)
        }
        None => Ok(tree),
    }
}

pub fn config_from_json(sig: Signature, v: &Value) -> Result<Configuration> {
    if v.is_u64() {
        return Ok(Configuration::constant(sig, as_sym(v, "constant")?));
    }
    let obj = v.as_object().ok_or_else(|| parse_err("configuration"))?;
    if obj.len() != 1 {
        return Err(Error::Parse("a configuration object has exactly one key".into()));
    }
    let (kind, body) = obj.iter().next().expect("one key");
    match kind.as_str() {
        "constant" => Ok(Configuration::constant(sig, as_sym(body, "constant")?)),
        "automaton" => {
            let start = as_usize(field(body, "start", "automaton")?, "start")?;
            let output = as_array(field(body, "output", "automaton")?, "output")?
                .iter()
                .map(|s| as_sym(s, "output"))
                .collect::<Result<Vec<_>>>()?;
            let rows = as_array(field(body, "transitions", "automaton")?, "transitions")?
                .iter()
                .map(|row| {
                    let row = row.as_object().ok_or_else(|| parse_err("transition row"))?;
                    row.iter()
                        .map(|(l, q)| {
                            let mut cs = l.chars();
                            let letter = match (cs.next(), cs.next()) {
                                (Some(c), None) => Letter::from_char(c),
                                _ => None,
                            }
                            .ok_or_else(|| parse_err("transition letter"))?;
                            Ok((letter, as_usize(q, "transition target")?))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Configuration::automaton(
                sig,
                WordAutomaton::new(sig, start, rows, output)?,
            ))
        }
        "override" => {
            let base = config_from_json(sig, field(body, "base", "override")?)?;
            let depth = as_usize(field(body, "depth", "override")?, "depth")?;
            let words = as_array(field(body, "entries", "override")?, "entries")?
                .iter()
                .map(|e| match e.as_array().map(Vec::as_slice) {
                    Some([u, s]) => Ok((word(sig, u)?, as_sym(s, "symbol")?)),
                    _ => Err(parse_err("override entry")),
                })
                .collect::<Result<Vec<_>>>()?;
            Configuration::overriding_words(base, depth, &words)
        }
        "shift" => {
            let base = config_from_json(sig, field(body, "base", "shift")?)?;
            Ok(base.shift(&word(sig, field(body, "by", "shift")?)?))
        }
        "readout" => Configuration::readout(sig, tree_from_json(sig, body)?),
        "block" => {
            let block = block_from_json(sig, body)?;
            let base = match body.get("base") {
                Some(b) => config_from_json(sig, b)?,
                None => Configuration::constant(sig, 0),
            };
            Configuration::with_block(base, &block)
        }
        other => Err(Error::Parse(format!("unknown configuration kind {other:?}"))),
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        config_to_json(self).serialize(s)
    }
}

pub fn block_to_json(b: &Block) -> Value {
    json!({ "depth": b.depth(), "entries": b.entries() })
}

pub fn block_from_json(sig: Signature, v: &Value) -> Result<Block> {
    let depth = as_usize(field(v, "depth", "block")?, "depth")?;
    let entries = as_array(field(v, "entries", "block")?, "entries")?
        .iter()
        .map(|s| as_sym(s, "entry"))
        .collect::<Result<Vec<_>>>()?;
    Block::new(sig, depth, entries)
}

impl Serialize for Block {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        block_to_json(self).serialize(s)
    }
}

pub fn system_to_json(sys: &ShiftSystem) -> Value {
    json!({
        "signature": sys.signature(),
        "alphabet": sys.alphabet(),
        "step": sys.step(),
        "forbidden": sys.forbidden().iter().map(|b| b.entries()).collect::<Vec<_>>(),
    })
}

/// Forbidden blocks are given as entry lists in ball order, either all of
/// depth `step` or as `{"depth", "entries"}` objects of any depth up to it.
pub fn system_from_json(v: &Value) -> Result<ShiftSystem> {
    let sig = signature_from_json(field(v, "signature", "system")?)?;
    let alphabet = match field(v, "alphabet", "system")? {
        Value::Number(n) => Alphabet::numeric(n.as_u64().ok_or_else(|| parse_err("alphabet size"))? as usize),
        a => Alphabet::new(serde_json::from_value(a.clone()).map_err(|e| Error::Parse(e.to_string()))?)?,
    };
    let forbidden = as_array(field(v, "forbidden", "system")?, "forbidden")?;
    let step = match v.get("step") {
        Some(s) => Some(as_usize(s, "step")?),
        None => None,
    };
    let blocks = forbidden
        .iter()
        .map(|b| match b {
            Value::Array(entries) => {
                let depth = step.ok_or_else(|| Error::Parse("bare forbidden entries need a step".into()))?;
                let entries = entries.iter().map(|s| as_sym(s, "entry")).collect::<Result<Vec<_>>>()?;
                Block::new(sig, depth, entries)
            }
            _ => block_from_json(sig, b),
        })
        .collect::<Result<Vec<_>>>()?;
    match step {
        Some(step) => ShiftSystem::with_step(sig, alphabet, blocks, step),
        None => ShiftSystem::new(sig, alphabet, blocks),
    }
}

pub fn orbit_to_json(orbit: &PseudoOrbit) -> Value {
    let mut m = match tree_to_json(orbit.tree()) {
        Value::Object(m) => m,
        _ => unreachable!("tree documents are objects"),
    };
    m.insert("signature".into(), json!(orbit.signature()));
    m.insert("radius".into(), json!(orbit.radius()));
    m.insert("tail".into(), json!(orbit.tail()));
    Value::Object(m)
}

pub fn serialize_orbit<S: Serializer>(orbit: &PseudoOrbit, s: S) -> std::result::Result<S::Ok, S::Error> {
    orbit_to_json(orbit).serialize(s)
}

/// Accepts the `points`/`sites` form, an `assignment` of `[word, config]`
/// pairs, or a `ball` of configurations in ball order with its `radius`.
pub fn orbit_from_json(v: &Value, sig: Option<Signature>) -> Result<PseudoOrbit> {
    let sig = match v.get("signature") {
        Some(s) => signature_from_json(s)?,
        None => sig.ok_or_else(|| Error::Parse("pseudo-orbit needs a signature".into()))?,
    };
    let tail: TailRule = match v.get("tail") {
        Some(t) => serde_json::from_value(t.clone()).map_err(|e| Error::Parse(e.to_string()))?,
        None => TailRule::ShiftExtend,
    };
    if let Some(ball) = v.get("ball") {
        let radius = as_usize(field(v, "radius", "pseudo-orbit")?, "radius")?;
        let points = as_array(ball, "ball")?
            .iter()
            .map(|p| config_from_json(sig, p))
            .collect::<Result<Vec<_>>>()?;
        return PseudoOrbit::on_ball(sig, radius, points, tail);
    }
    if let Some(assignment) = v.get("assignment") {
        let mut points: Vec<Configuration> = Vec::new();
        let mut sites = Vec::new();
        for pair in as_array(assignment, "assignment")? {
            match pair.as_array().map(Vec::as_slice) {
                Some([u, c]) => {
                    let c = config_from_json(sig, c)?;
                    let id = match points.iter().position(|p| *p == c) {
                        Some(i) => i,
                        None => {
                            points.push(c);
                            points.len() - 1
                        }
                    };
                    sites.push((word(sig, u)?, id));
                }
                _ => return Err(parse_err("assignment entry")),
            }
        }
        return PseudoOrbit::from_sites(sig, points, sites, tail);
    }
    let tree = tree_from_json(sig, v)?;
    let sites = tree.sites().map(|(u, i)| (u.clone(), i)).collect();
    let orbit = PseudoOrbit::from_sites(sig, tree.points().to_vec(), sites, tail)?;
    match tree.continuation() {
        Some(t) => orbit.with_continuation(t.to_vec()),
        None => Ok(orbit),
    }
}

pub fn points_to_json(sig: Signature, points: &[Configuration]) -> Value {
    json!({ "signature": sig, "points": points })
}

/// Accepts `{"signature", "points"}` or a bare array with `sig` given.
pub fn points_from_json(v: &Value, sig: Option<Signature>) -> Result<(Signature, Vec<Configuration>)> {
    let (sig, list) = match v {
        Value::Array(list) => (
            sig.ok_or_else(|| Error::Parse("a bare point list needs a signature".into()))?,
            list,
        ),
        _ => (
            match v.get("signature") {
                Some(s) => signature_from_json(s)?,
                None => sig.ok_or_else(|| Error::Parse("point set needs a signature".into()))?,
            },
            as_array(field(v, "points", "point set")?, "points")?,
        ),
    };
    let points = list
        .iter()
        .map(|p| config_from_json(sig, p))
        .collect::<Result<Vec<_>>>()?;
    Ok((sig, points))
}
