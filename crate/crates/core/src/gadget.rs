//! Dictatorship gadgets for Feedback Vertex Set and DAG Vertex Deletion.
//!
//! Both gadgets have a bit vertex per point of `[k]^R` and a test vertex per
//! pair `(x, S)`; a test receives arcs from the bits of `C_{x,S}` and sends
//! arcs to the bits of `C⊕_{x,S}`. The DVD gadget repeats this over layers
//! so that every arc moves forward and the graph is acyclic.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boolfn::{self, checked_pow, sequences, Cube, EfronStein, Subcube, TableFunction};
use crate::digraph::{strip_layer, GraphKind, GraphMeta, Payload, Role, Topo, TwoTypeDigraph, Vertex};
use crate::rational::{self, Rational};
use crate::{Error, Result, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetParams {
    pub k: usize,
    pub r: usize,
    pub s_len: usize,
    /// Number of test layers; present only for the DVD gadget.
    pub layers: Option<usize>,
    pub budget: u64,
}

impl GadgetParams {
    pub fn fvs(k: usize, r: usize, s_len: usize) -> Self {
        Self { k, r, s_len, layers: None, budget: DEFAULT_BUDGET }
    }

    pub fn dvd(k: usize, r: usize, s_len: usize, layers: usize) -> Self {
        Self { k, r, s_len, layers: Some(layers), budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    fn validate(&self) -> Result<Cube> {
        if self.k < 2 || self.r < 2 || self.s_len < 1 {
            return Err(Error::ParamError(format!(
                "need k >= 2, R >= 2, s_len >= 1 (got k={}, R={}, s_len={})",
                self.k, self.r, self.s_len
            )));
        }
        if matches!(self.layers, Some(l) if l < 2) {
            return Err(Error::ParamError("the DVD gadget needs at least 2 layers".into()));
        }
        let tests = checked_pow(self.k, self.r)
            .and_then(|p| p.checked_mul(checked_pow(self.r, self.s_len)?))
            .and_then(|p| p.checked_mul(self.layers.unwrap_or(1) as u128))
            .unwrap_or(u128::MAX);
        Error::check_budget(tests, self.budget)?;
        Cube::with_budget(self.k, self.r, self.budget)
    }

    fn meta(&self, kind: GraphKind) -> GraphMeta {
        GraphMeta { kind, k: self.k, r: self.r, s_len: self.s_len, layers: self.layers, t: None, provenance: None }
    }
}

pub(crate) fn layer_prefix(layer: Option<usize>) -> String {
    layer.map(|l| format!(":{l}")).unwrap_or_default()
}

pub(crate) fn seq_string(seq: &[usize]) -> String {
    seq.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

fn bit_vertex(cube: &Cube, layer: Option<usize>, x: usize) -> Vertex {
    Vertex {
        id: format!("b{}:{}", layer_prefix(layer), cube.format(x)),
        role: Role::Bit,
        layer,
        payload: Payload::Bit { x, w: None },
    }
}

fn test_vertex(cube: &Cube, layer: Option<usize>, x: usize, seq: &[usize]) -> Vertex {
    Vertex {
        id: format!("t{}:{}:{}", layer_prefix(layer), cube.format(x), seq_string(seq)),
        role: Role::Test,
        layer,
        payload: Payload::Test { x, seq: seq.to_vec(), v: None, ws: Vec::new(), slots: Vec::new() },
    }
}

pub fn build_fvs_gadget(p: &GadgetParams) -> Result<TwoTypeDigraph> {
    if p.layers.is_some() {
        return Err(Error::ParamError("the FVS gadget takes no layer count".into()));
    }
    let cube = p.validate()?;
    let mut vertices: Vec<Vertex> = (0..cube.size()).map(|x| bit_vertex(&cube, None, x)).collect();
    let mut arcs = Vec::new();
    for x in 0..cube.size() {
        for seq in sequences(p.r, p.s_len) {
            let t = vertices.len();
            let c = Subcube::new(x, seq.clone());
            for z in boolfn::subcube_points(&cube, &c) {
                arcs.push((z, t));
            }
            for z in boolfn::subcube_points(&cube, &c.shifted()) {
                arcs.push((t, z));
            }
            vertices.push(test_vertex(&cube, None, x, &seq));
        }
    }
    TwoTypeDigraph::new(p.meta(GraphKind::FvsGadget), vertices, arcs)
}

pub fn build_dvd_gadget(p: &GadgetParams) -> Result<TwoTypeDigraph> {
    let layers = p.layers.ok_or_else(|| Error::ParamError("the DVD gadget needs a layer count".into()))?;
    let cube = p.validate()?;
    let size = cube.size();
    let mut vertices: Vec<Vertex> = Vec::new();
    for l in 0..=layers {
        vertices.extend((0..size).map(|x| bit_vertex(&cube, Some(l), x)));
    }
    let bit = |l: usize, z: usize| l * size + z;
    let mut arcs = Vec::new();
    for lt in 0..layers {
        for x in 0..size {
            for seq in sequences(p.r, p.s_len) {
                let t = vertices.len();
                let c = Subcube::new(x, seq.clone());
                for z in boolfn::subcube_points(&cube, &c) {
                    arcs.extend((0..=lt).map(|l| (bit(l, z), t)));
                }
                for z in boolfn::subcube_points(&cube, &c.shifted()) {
                    arcs.extend((lt + 1..=layers).map(|l| (t, bit(l, z))));
                }
                vertices.push(test_vertex(&cube, Some(lt), x, &seq));
            }
        }
    }
    TwoTypeDigraph::new(p.meta(GraphKind::DvdGadget), vertices, arcs)
}

/// Where a partition came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessSource {
    Dictator(usize),
    /// Hash of the labeling used by a Unique Games partition.
    Labeling(String),
}

/// `T'` plus the classes `T_0 .. T_{k-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionWitness {
    pub kind: GraphKind,
    pub meta: GraphMeta,
    pub prime: BTreeSet<String>,
    pub classes: Vec<BTreeSet<String>>,
    pub source: WitnessSource,
}

impl PartitionWitness {
    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(BTreeSet::len).collect()
    }
}

/// `T_j = {t_{x,S} : s ∉ S, x_s = j}`, `T' = {t_{x,S} : s ∈ S}`; for the
/// layered gadget the same rule is applied in every layer.
pub fn dictator_partition(g: &TwoTypeDigraph, s: usize) -> Result<PartitionWitness> {
    if !matches!(g.kind(), GraphKind::FvsGadget | GraphKind::DvdGadget) {
        return Err(Error::InconsistentInput(format!("{} is not a dictatorship gadget", g.kind().as_str())));
    }
    let meta = g.meta().clone();
    if s >= meta.r {
        return Err(Error::IndexOutOfRange { index: s, limit: meta.r });
    }
    let cube = Cube::new(meta.k, meta.r)?;
    let mut prime = BTreeSet::new();
    let mut classes = vec![BTreeSet::new(); meta.k];
    for v in g.vertices() {
        if let Payload::Test { x, seq, .. } = &v.payload {
            if seq.contains(&s) {
                prime.insert(v.id.clone());
            } else {
                classes[cube.digit(*x, s)].insert(v.id.clone());
            }
        }
    }
    Ok(PartitionWitness { kind: g.kind(), meta, prime, classes, source: WitnessSource::Dictator(s) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletenessMode {
    /// Remaining graph must be acyclic.
    Fvs,
    /// Remaining graph must have no path through `k` test vertices.
    Dvd { k: usize },
}

impl CompletenessMode {
    pub fn for_graph(g: &TwoTypeDigraph) -> Self {
        if g.kind().is_layered() {
            CompletenessMode::Dvd { k: g.k() }
        } else {
            CompletenessMode::Fvs
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    pub ok: bool,
    pub detail: String,
    pub class: usize,
    pub deleted: usize,
    pub remaining_tests: usize,
    /// Arcs of the collapsed remainder.
    pub collapsed_arcs: usize,
    pub longest_test_path: Option<usize>,
    pub cycle: Option<Vec<String>>,
}

/// Checks that the witness partitions the test vertices into `T'` and `k`
/// equal classes.
pub fn check_witness(g: &TwoTypeDigraph, w: &PartitionWitness) -> Result<()> {
    let bad = |m: String| Err(Error::InconsistentWitness(m));
    if w.kind != g.kind() {
        return bad(format!("witness is for {}, graph is {}", w.kind.as_str(), g.kind().as_str()));
    }
    if w.classes.len() != g.k() {
        return bad(format!("expected {} classes, got {}", g.k(), w.classes.len()));
    }
    let sizes = w.class_sizes();
    if sizes.windows(2).any(|p| p[0] != p[1]) {
        return bad(format!("class sizes differ: {sizes:?}"));
    }
    let mut seen = BTreeSet::new();
    for id in w.prime.iter().chain(w.classes.iter().flatten()) {
        match g.index_of(id) {
            Some(i) if g.vertex(i).role == Role::Test => {}
            _ => return bad(format!("{id} is not a test vertex of the graph")),
        }
        if !seen.insert(id) {
            return bad(format!("{id} appears twice"));
        }
    }
    if seen.len() != g.test_count() {
        return bad(format!("witness covers {} of {} test vertices", seen.len(), g.test_count()));
    }
    Ok(())
}

/// Deletes `T' ∪ T_j` and checks the remainder.
pub fn verify_completeness(
    g: &TwoTypeDigraph,
    w: &PartitionWitness,
    j: usize,
    mode: CompletenessMode,
) -> Result<CompletenessReport> {
    check_witness(g, w)?;
    if j >= w.classes.len() {
        return Err(Error::InconsistentWitness(format!("class {j} does not exist")));
    }
    let del: BTreeSet<String> = w.prime.union(&w.classes[j]).cloned().collect();
    let rest = g.delete_vertices(&del)?;
    let collapsed = rest.collapse_bit_vertices();
    let mut report = CompletenessReport {
        ok: false,
        detail: String::new(),
        class: j,
        deleted: del.len(),
        remaining_tests: collapsed.tests.len(),
        collapsed_arcs: collapsed.graph.arc_count(),
        longest_test_path: None,
        cycle: None,
    };
    match mode {
        CompletenessMode::Fvs => match rest.topological_sort() {
            Topo::Order(_) => {
                report.ok = true;
                report.detail = format!(
                    "acyclic after deleting {} test vertices; collapsed remainder has {} arcs",
                    report.deleted, report.collapsed_arcs
                );
            }
            Topo::Cycle(c) => {
                report.detail = "cycle survives the deletion".into();
                report.cycle = Some(rest.ids(&c));
            }
        },
        CompletenessMode::Dvd { k } => {
            let (len, path) = rest.longest_test_path()?;
            report.longest_test_path = Some(len);
            report.ok = len < k;
            report.detail = if report.ok {
                format!("longest surviving path has {len} test vertices (< {k})")
            } else {
                format!("path with {len} test vertices survives: {path:?}")
            };
        }
    }
    Ok(report)
}

/// Output of [`decode_topological_split`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDecoding {
    /// Indicator of the last half of the bit vertices in topological order.
    pub f_a: TableFunction,
    pub degree: usize,
    pub influences: Vec<Rational>,
    pub top: (usize, Rational),
    pub survivors: usize,
    /// Fraction of survivors with `f_A ≡ 0` on `C_{x,S}`.
    pub zero_on_subcube: Rational,
    /// Fraction of survivors with `f_A ≡ 1` on `C⊕_{x,S}`.
    pub one_on_shifted: Rational,
    /// Fraction of survivors satisfying at least one of the two.
    pub forced: Rational,
}

/// Topological-split decoder for the FVS gadget. `degree` defaults to `R`.
pub fn decode_topological_split(
    g: &TwoTypeDigraph,
    survivors: &BTreeSet<String>,
    degree: Option<usize>,
) -> Result<SplitDecoding> {
    if g.kind() != GraphKind::FvsGadget {
        return Err(Error::InconsistentInput("the split decoder expects an FVS gadget".into()));
    }
    let meta = g.meta();
    let cube = Cube::new(meta.k, meta.r)?;
    let keep = g.test_set(survivors)?;
    let del: BTreeSet<usize> = g.test_indices().into_iter().filter(|t| !keep.contains(t)).collect();
    let rest = g.delete_indices(&del);
    let order = match rest.topological_sort() {
        Topo::Order(o) => o,
        Topo::Cycle(c) => return Err(Error::CyclicSurvivor(rest.ids(&c))),
    };
    let bits: Vec<usize> = order.iter().copied().filter(|&v| rest.vertex(v).role == Role::Bit).collect();
    let ones = bits.len().div_ceil(2);
    let mut in_a = vec![false; cube.size()];
    for &b in &bits[bits.len() - ones..] {
        if let Payload::Bit { x, .. } = rest.vertex(b).payload {
            in_a[x] = true;
        }
    }
    let f_a = TableFunction::indicator(cube, |x| in_a[x]);
    let d = degree.unwrap_or(meta.r);
    let influences = EfronStein::new(&f_a)?.degree_influences(d);
    let top =
        influences
            .iter()
            .enumerate()
            .fold((0, rational::zero()), |best, (i, v)| if *v > best.1 { (i, v.clone()) } else { best });

    let (mut zero, mut one, mut either) = (0u128, 0u128, 0u128);
    for &t in &keep {
        let Payload::Test { x, seq, .. } = &g.vertex(t).payload else { continue };
        let c = Subcube::new(*x, seq.clone());
        let z = boolfn::subcube_points(&cube, &c).iter().all(|&p| !in_a[p]);
        let o = boolfn::subcube_points(&cube, &c.shifted()).iter().all(|&p| in_a[p]);
        zero += z as u128;
        one += o as u128;
        either += (z || o) as u128;
    }
    let n = keep.len() as u128;
    let fraction = |c: u128| if n == 0 { rational::one() } else { boolfn::frac(c, n) };
    Ok(SplitDecoding {
        f_a,
        degree: d,
        influences,
        top,
        survivors: keep.len(),
        zero_on_subcube: fraction(zero),
        one_on_shifted: fraction(one),
        forced: fraction(either),
    })
}

/// Color per bit vertex id, `1 ..= C_max`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LayerColoring {
    pub colors: BTreeMap<String, u32>,
}

/// `χ(w, ℓ)`: the largest color `c` with `Pr_x[χ(b^ℓ_{w,x}) >= c] >= 1 - δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerColor {
    pub w: Option<String>,
    pub layer: usize,
    pub color: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringReport {
    pub colors_used: u32,
    pub unsatisfied: BTreeSet<String>,
    /// Satisfied fraction of the test vertices of each test layer.
    pub layer_satisfied: Vec<Rational>,
    pub layer_colors: Vec<LayerColor>,
}

fn require_layered(g: &TwoTypeDigraph) -> Result<usize> {
    match (g.kind().is_layered(), g.meta().layers) {
        (true, Some(l)) => Ok(l),
        _ => Err(Error::InconsistentInput("a layered graph is required".into())),
    }
}

/// Size condition on the number of layers: `δL >= |T|^{1-δ}` for the
/// gadget and `δ²L >= |T|^{1-δ}` for the reduced graph, with `|T|` the
/// test count of one layer. Reported only; no construction depends on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerAdvisory {
    pub layers: usize,
    pub tests_per_layer: usize,
    /// `δL` or `δ²L`.
    pub lhs: Rational,
    pub holds: bool,
}

/// Decides the size condition exactly: with `δ = p/q`,
/// `lhs >= |T|^{1-δ}` iff `lhs^q >= |T|^{q-p}`.
pub fn layer_advisory(g: &TwoTypeDigraph, delta: &Rational) -> Result<LayerAdvisory> {
    let layers = require_layered(g)?;
    if *delta <= rational::zero() || *delta >= rational::one() {
        return Err(Error::ParamError("delta must lie strictly between 0 and 1".into()));
    }
    let power = if g.kind() == GraphKind::UgDvd { 2 } else { 1 };
    let lhs = delta.pow(power) * rational::int(layers as i64);
    let tests_per_layer = g.test_count() / layers;
    let q = delta.denom().to_u32().ok_or_else(|| Error::ParamError("delta denominator too large".into()))?;
    let p = delta.numer().to_u32().expect("0 < delta < 1");
    let holds = lhs.pow(q as i32) >= rational::int(tests_per_layer as i64).pow((q - p) as i32);
    Ok(LayerAdvisory { layers, tests_per_layer, lhs, holds })
}

/// Deletion to coloring: every bit vertex gets `1 +` the largest number of
/// test vertices on a surviving path ending at it. Every surviving test is
/// satisfied by the result.
pub fn coloring_from_deletion(
    g: &TwoTypeDigraph,
    del: &BTreeSet<String>,
    delta: &Rational,
) -> Result<(LayerColoring, ColoringReport)> {
    require_layered(g)?;
    let del = g.test_set(del).map_err(|e| Error::InconsistentInput(e.to_string()))?;
    let alive: Vec<bool> = (0..g.vertices().len()).map(|v| !del.contains(&v)).collect();
    let order = g
        .structure()
        .topological_sort_alive(Some(&alive))
        .order()
        .ok_or_else(|| Error::InconsistentInput("layered graph has a cycle".into()))?;
    let mut depth = vec![0u32; g.vertices().len()];
    for &v in &order {
        let top = g.structure().predecessors(v).iter().filter(|&&p| alive[p]).map(|&p| depth[p]).max().unwrap_or(0);
        depth[v] = top + u32::from(g.vertex(v).role == Role::Test);
    }
    let colors = g.bit_indices().into_iter().map(|b| (g.id(b).to_string(), depth[b] + 1)).collect();
    let chi = LayerColoring { colors };
    let report = evaluate_coloring(g, &chi, delta)?;
    Ok((chi, report))
}

/// Coloring to deletion: deletes exactly the unsatisfied test vertices.
pub fn deletion_from_coloring(
    g: &TwoTypeDigraph,
    chi: &LayerColoring,
    delta: &Rational,
) -> Result<(BTreeSet<String>, ColoringReport)> {
    let report = evaluate_coloring(g, chi, delta)?;
    Ok((report.unsatisfied.clone(), report))
}

/// Validates `chi` (total on bits, positive, monotone across layers) and
/// reports which tests it satisfies. A test is satisfied when every
/// predecessor has a smaller color than every successor.
pub fn evaluate_coloring(g: &TwoTypeDigraph, chi: &LayerColoring, delta: &Rational) -> Result<ColoringReport> {
    let layers = require_layered(g)?;
    let bad = |m: String| Error::InconsistentInput(m);
    let mut color = vec![0u32; g.vertices().len()];
    for (id, &c) in &chi.colors {
        let i = g.index_of(id).ok_or_else(|| bad(format!("{id} is not a vertex")))?;
        if g.vertex(i).role != Role::Bit {
            return Err(bad(format!("{id} is not a bit vertex")));
        }
        if c == 0 {
            return Err(bad(format!("{id} has color 0; colors start at 1")));
        }
        color[i] = c;
    }
    // Monotone across layers: copies of the same (w, x) never decrease.
    let mut copies: BTreeMap<String, Vec<(usize, u32)>> = BTreeMap::new();
    for b in g.bit_indices() {
        if color[b] == 0 {
            return Err(bad(format!("{} has no color", g.id(b))));
        }
        let layer = g.vertex(b).layer.unwrap_or(0);
        copies.entry(strip_layer(g.id(b))).or_default().push((layer, color[b]));
    }
    for (key, mut list) in copies {
        list.sort();
        if list.windows(2).any(|p| p[0].1 > p[1].1) {
            return Err(bad(format!("coloring of {key} decreases across layers")));
        }
    }

    let mut unsatisfied = BTreeSet::new();
    let mut per_layer = vec![(0u128, 0u128); layers];
    for t in g.test_indices() {
        let s = g.structure();
        let max_in = s.predecessors(t).iter().map(|&p| color[p]).max();
        let min_out = s.successors(t).iter().map(|&q| color[q]).min();
        let ok = match (max_in, min_out) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        };
        let l = g.vertex(t).layer.unwrap_or(0);
        per_layer[l].1 += 1;
        if ok {
            per_layer[l].0 += 1;
        } else {
            unsatisfied.insert(g.id(t).to_string());
        }
    }
    let layer_satisfied =
        per_layer.iter().map(|&(s, n)| if n == 0 { rational::one() } else { boolfn::frac(s, n) }).collect();
    Ok(ColoringReport {
        colors_used: color.iter().copied().max().unwrap_or(0),
        unsatisfied,
        layer_satisfied,
        layer_colors: layer_colors(g, &color, delta),
    })
}

fn layer_colors(g: &TwoTypeDigraph, color: &[u32], delta: &Rational) -> Vec<LayerColor> {
    let mut groups: BTreeMap<(Option<String>, usize), Vec<u32>> = BTreeMap::new();
    for b in g.bit_indices() {
        let w = match &g.vertex(b).payload {
            Payload::Bit { w, .. } => w.clone(),
            _ => None,
        };
        groups.entry((w, g.vertex(b).layer.unwrap_or(0))).or_default().push(color[b]);
    }
    let need = rational::one() - delta;
    groups
        .into_iter()
        .map(|((w, layer), colors)| {
            let n = colors.len() as u128;
            let max = colors.iter().copied().max().unwrap_or(1);
            let color = (1..=max)
                .rev()
                .find(|&c| boolfn::frac(colors.iter().filter(|&&x| x >= c).count() as u128, n) >= need)
                .unwrap_or(1);
            LayerColor { w, layer, color }
        })
        .collect()
}

/// Deletes a uniformly random `⌊|T|/2⌋` test vertices `trials` times and
/// counts how often a cycle survives.
pub fn random_deletion_probe(g: &TwoTypeDigraph, trials: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests = g.test_indices();
    let mut cyclic = 0;
    for _ in 0..trials {
        tests.shuffle(&mut rng);
        let mut alive = vec![true; g.vertices().len()];
        for &t in &tests[..tests.len() / 2] {
            alive[t] = false;
        }
        if !g.structure().topological_sort_alive(Some(&alive)).is_acyclic() {
            cyclic += 1;
        }
    }
    cyclic
}
