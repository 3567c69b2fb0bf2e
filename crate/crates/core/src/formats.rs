//! JSON file formats. Every document carries a `format` tag; rationals are
//! canonical `"p/q"` strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boolfn::Cube;
use crate::digraph::{GraphKind, GraphMeta, Payload, PlainDigraph, Role, TwoTypeDigraph, Vertex};
use crate::gadget::{PartitionWitness, WitnessSource};
use crate::rational::{self, Rational};
use crate::timecost::{Activity, DeadlineInstance, MenuEntry, Realization};
use crate::unique_games::{Labeling, UgEdge, UniqueGamesInstance};
use crate::{Error, Result};

pub const GRAPH_FORMAT: &str = "hforge-graph-v1";
pub const UG_FORMAT: &str = "hforge-ug-v1";
pub const DEADLINE_FORMAT: &str = "hforge-deadline-v1";
pub const WITNESS_FORMAT: &str = "hforge-witness-v1";
pub const REALIZATION_FORMAT: &str = "hforge-realization-v1";

fn check_format(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Format(format!("expected format {expected}, found {found:?}")));
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("document serializes");
    s.push('\n');
    s
}

/// Either kind of graph document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphDoc {
    Plain(PlainDigraph),
    TwoType(TwoTypeDigraph),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawArcs {
    Index(Vec<(usize, usize)>),
    Id(Vec<(String, String)>),
}

#[derive(Serialize, Deserialize)]
struct RawVertex {
    id: String,
    role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<String>,
    #[serde(default, rename = "S", skip_serializing_if = "Option::is_none")]
    s: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ws: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slots: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    format: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vertices: Vec<RawVertex>,
    arcs: RawArcs,
}

fn raw_vertex(cube: Option<&Cube>, v: &Vertex) -> RawVertex {
    let fmt = |x: usize| cube.map(|c| c.format(x)).unwrap_or_else(|| x.to_string());
    let mut raw = RawVertex {
        id: v.id.clone(),
        role: v.role,
        layer: v.layer,
        x: None,
        s: None,
        v: None,
        ws: None,
        slots: None,
        w: None,
    };
    match &v.payload {
        Payload::None => {}
        Payload::Bit { x, w } => {
            raw.x = Some(fmt(*x));
            raw.w = w.clone();
        }
        Payload::Test { x, seq, v, ws, slots } => {
            raw.x = Some(fmt(*x));
            raw.s = Some(seq.clone());
            raw.v = v.clone();
            if !ws.is_empty() {
                raw.ws = Some(ws.clone());
                raw.slots = Some(slots.clone());
            }
        }
    }
    raw
}

pub fn plain_to_json(g: &PlainDigraph) -> String {
    pretty(&RawGraph {
        format: GRAPH_FORMAT.into(),
        kind: "plain".into(),
        n: Some(g.n()),
        k: None,
        r: None,
        s_len: None,
        layers: None,
        t: None,
        provenance: None,
        vertices: Vec::new(),
        arcs: RawArcs::Index(g.arcs().to_vec()),
    })
}

pub fn two_type_to_json(g: &TwoTypeDigraph) -> String {
    let m = g.meta();
    let cube = Cube::new(m.k, m.r).ok();
    pretty(&RawGraph {
        format: GRAPH_FORMAT.into(),
        kind: m.kind.as_str().into(),
        n: None,
        k: Some(m.k),
        r: Some(m.r),
        s_len: Some(m.s_len),
        layers: m.layers,
        t: m.t,
        provenance: m.provenance.clone(),
        vertices: g.vertices().iter().map(|v| raw_vertex(cube.as_ref(), v)).collect(),
        arcs: RawArcs::Id(g.arc_ids()),
    })
}

pub fn graph_to_json(g: &GraphDoc) -> String {
    match g {
        GraphDoc::Plain(p) => plain_to_json(p),
        GraphDoc::TwoType(t) => two_type_to_json(t),
    }
}

fn parse_kind(s: &str) -> Result<GraphKind> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| Error::Format(format!("unknown graph kind {s:?}")))
}

pub fn graph_from_json(text: &str) -> Result<GraphDoc> {
    let raw: RawGraph = serde_json::from_str(text)?;
    check_format(&raw.format, GRAPH_FORMAT)?;
    let missing = |f: &str| Error::Format(format!("graph document lacks {f}"));
    if raw.kind == "plain" {
        let n = raw.n.ok_or_else(|| missing("n"))?;
        let arcs = match raw.arcs {
            RawArcs::Index(a) => a,
            RawArcs::Id(_) => return Err(Error::Format("plain graphs use index arcs".into())),
        };
        return Ok(GraphDoc::Plain(PlainDigraph::new(n, arcs)?));
    }
    let meta = GraphMeta {
        kind: parse_kind(&raw.kind)?,
        k: raw.k.ok_or_else(|| missing("k"))?,
        r: raw.r.ok_or_else(|| missing("R"))?,
        s_len: raw.s_len.ok_or_else(|| missing("s_len"))?,
        layers: raw.layers,
        t: raw.t,
        provenance: raw.provenance,
    };
    let cube = Cube::new(meta.k, meta.r).ok();
    let point = |s: &str| -> Result<usize> {
        match &cube {
            Some(c) => c.parse(s),
            None => s.parse().map_err(|_| Error::Format(format!("bad point {s:?}"))),
        }
    };
    let mut vertices = Vec::with_capacity(raw.vertices.len());
    for rv in raw.vertices {
        let payload = match (rv.role, rv.x) {
            (_, None) => Payload::None,
            (Role::Bit, Some(x)) => Payload::Bit { x: point(&x)?, w: rv.w },
            (Role::Test, Some(x)) => {
                let ws = rv.ws.unwrap_or_default();
                let slots = rv.slots.unwrap_or_default();
                if ws.len() != slots.len() {
                    return Err(Error::Format(format!("{}: ws and slots differ in length", rv.id)));
                }
                Payload::Test { x: point(&x)?, seq: rv.s.unwrap_or_default(), v: rv.v, ws, slots }
            }
        };
        vertices.push(Vertex { id: rv.id, role: rv.role, layer: rv.layer, payload });
    }
    let arcs = match raw.arcs {
        RawArcs::Id(a) => a,
        RawArcs::Index(a) if a.is_empty() => Vec::new(),
        RawArcs::Index(_) => return Err(Error::Format("two-type graphs use id arcs".into())),
    };
    Ok(GraphDoc::TwoType(TwoTypeDigraph::from_id_arcs(meta, vertices, &arcs)?))
}

pub fn plain_from_json(text: &str) -> Result<PlainDigraph> {
    match graph_from_json(text)? {
        GraphDoc::Plain(g) => Ok(g),
        GraphDoc::TwoType(_) => Err(Error::Format("expected a plain graph".into())),
    }
}

pub fn two_type_from_json(text: &str) -> Result<TwoTypeDigraph> {
    match graph_from_json(text)? {
        GraphDoc::TwoType(g) => Ok(g),
        GraphDoc::Plain(_) => Err(Error::Format("expected a two-type graph".into())),
    }
}

#[derive(Serialize, Deserialize)]
struct RawEdge {
    v: String,
    w: String,
    perm: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawUg {
    format: String,
    #[serde(rename = "R")]
    r: usize,
    #[serde(rename = "V")]
    v: Vec<String>,
    #[serde(rename = "W")]
    w: Vec<String>,
    edges: Vec<RawEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted: Option<Labeling>,
}

pub fn ug_to_json(inst: &UniqueGamesInstance, planted: Option<&Labeling>) -> String {
    pretty(&RawUg {
        format: UG_FORMAT.into(),
        r: inst.r(),
        v: inst.v_ids().to_vec(),
        w: inst.w_ids().to_vec(),
        edges: inst
            .edges()
            .iter()
            .map(|e| RawEdge { v: inst.v_ids()[e.v].clone(), w: inst.w_ids()[e.w].clone(), perm: e.perm.clone() })
            .collect(),
        planted: planted.cloned(),
    })
}

pub fn ug_from_json(text: &str) -> Result<(UniqueGamesInstance, Option<Labeling>)> {
    let raw: RawUg = serde_json::from_str(text)?;
    check_format(&raw.format, UG_FORMAT)?;
    let find = |list: &[String], id: &str| {
        list.iter().position(|s| s == id).ok_or_else(|| Error::Format(format!("edge endpoint {id} is not declared")))
    };
    let edges = raw
        .edges
        .iter()
        .map(|e| Ok(UgEdge { v: find(&raw.v, &e.v)?, w: find(&raw.w, &e.w)?, perm: e.perm.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let inst = UniqueGamesInstance::new(raw.r, raw.v, raw.w, edges)?;
    Ok((inst, raw.planted))
}

pub fn labeling_to_json(rho: &Labeling) -> String {
    pretty(rho)
}

/// Accepts a bare `{id: label}` map or a Unique Games document with a
/// planted labeling.
pub fn labeling_from_json(text: &str) -> Result<Labeling> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("format").is_some() {
        let (_, planted) = ug_from_json(text)?;
        return planted.ok_or_else(|| Error::Format("document has no planted labeling".into()));
    }
    Ok(serde_json::from_value(value)?)
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    #[serde(with = "rational::serde_pq")]
    duration: Rational,
    #[serde(with = "rational::serde_pq")]
    cost: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawActivity {
    id: String,
    menu: Vec<RawEntry>,
}

#[derive(Serialize, Deserialize)]
struct RawDeadline {
    format: String,
    activities: Vec<RawActivity>,
    precedence: Vec<(usize, usize)>,
    #[serde(with = "rational::serde_pq")]
    deadline: Rational,
}

pub fn deadline_to_json(inst: &DeadlineInstance) -> String {
    pretty(&RawDeadline {
        format: DEADLINE_FORMAT.into(),
        activities: inst
            .activities()
            .iter()
            .map(|a| RawActivity {
                id: a.id.clone(),
                menu: a.menu.iter().map(|e| RawEntry { duration: e.duration.clone(), cost: e.cost.clone() }).collect(),
            })
            .collect(),
        precedence: inst.precedence().to_vec(),
        deadline: inst.deadline().clone(),
    })
}

pub fn deadline_from_json(text: &str) -> Result<DeadlineInstance> {
    let raw: RawDeadline = serde_json::from_str(text)?;
    check_format(&raw.format, DEADLINE_FORMAT)?;
    let activities = raw
        .activities
        .into_iter()
        .map(|a| Activity { id: a.id, menu: a.menu.into_iter().map(|e| MenuEntry::new(e.duration, e.cost)).collect() })
        .collect();
    DeadlineInstance::new(activities, raw.precedence, raw.deadline)
}

#[derive(Serialize, Deserialize)]
struct RawRealization {
    format: String,
    choice: BTreeMap<String, usize>,
}

pub fn realization_to_json(inst: &DeadlineInstance, x: &Realization) -> String {
    pretty(&RawRealization {
        format: REALIZATION_FORMAT.into(),
        choice: inst.activities().iter().map(|a| a.id.clone()).zip(x.choice.iter().copied()).collect(),
    })
}

pub fn realization_from_json(inst: &DeadlineInstance, text: &str) -> Result<Realization> {
    let raw: RawRealization = serde_json::from_str(text)?;
    check_format(&raw.format, REALIZATION_FORMAT)?;
    if raw.choice.len() != inst.activities().len() {
        return Err(Error::Format(format!(
            "realization names {} activities, instance has {}",
            raw.choice.len(),
            inst.activities().len()
        )));
    }
    let choice = inst
        .activities()
        .iter()
        .map(|a| raw.choice.get(&a.id).copied().ok_or_else(|| Error::Format(format!("no choice for {}", a.id))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Realization { choice })
}

#[derive(Serialize, Deserialize)]
struct RawWitness {
    format: String,
    kind: GraphKind,
    params: GraphMeta,
    prime: Vec<String>,
    classes: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labeling: Option<String>,
}

pub fn witness_to_json(w: &PartitionWitness) -> String {
    let (s, labeling) = match &w.source {
        WitnessSource::Dictator(s) => (Some(*s), None),
        WitnessSource::Labeling(h) => (None, Some(h.clone())),
    };
    pretty(&RawWitness {
        format: WITNESS_FORMAT.into(),
        kind: w.kind,
        params: w.meta.clone(),
        prime: w.prime.iter().cloned().collect(),
        classes: w.classes.iter().map(|c| c.iter().cloned().collect()).collect(),
        s,
        labeling,
    })
}

pub fn witness_from_json(text: &str) -> Result<PartitionWitness> {
    let raw: RawWitness = serde_json::from_str(text)?;
    check_format(&raw.format, WITNESS_FORMAT)?;
    let source = match (raw.s, raw.labeling) {
        (Some(s), None) => WitnessSource::Dictator(s),
        (None, Some(h)) => WitnessSource::Labeling(h),
        _ => return Err(Error::Format("witness needs exactly one of s and labeling".into())),
    };
    Ok(PartitionWitness {
        kind: raw.kind,
        meta: raw.params,
        prime: raw.prime.into_iter().collect(),
        classes: raw.classes.into_iter().map(|c| c.into_iter().collect()).collect(),
        source,
    })
}
