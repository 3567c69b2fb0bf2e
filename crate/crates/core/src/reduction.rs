//! Reductions from Unique Games to FVS and DVD: every `w ∈ W` becomes a
//! copy of `[k]^R`, and every `(x, S, v, w_1..w_2t)` a test vertex wired to
//! the permuted subcubes `C_{x,S,v,w_j}` and their shifts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::boolfn::{checked_pow, frac, permuted_subcube_points, sequences, Cube, EfronStein, TableFunction};
use crate::digraph::{GraphKind, GraphMeta, Payload, Role, Topo, TwoTypeDigraph, Vertex};
use crate::gadget::{
    coloring_from_deletion, layer_prefix, seq_string, verify_completeness, CompletenessMode, CompletenessReport,
    PartitionWitness, WitnessSource,
};
use crate::rational::{self, Rational};
use crate::unique_games::{Labeling, UniqueGamesInstance};
use crate::{Error, Result, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionParams {
    pub k: usize,
    pub s_len: usize,
    /// Each test vertex reads `2t` neighbors of its `v`.
    pub t: usize,
    pub layers: Option<usize>,
    pub budget: u64,
}

impl ReductionParams {
    pub fn fvs(k: usize, s_len: usize, t: usize) -> Self {
        Self { k, s_len, t, layers: None, budget: DEFAULT_BUDGET }
    }

    pub fn dvd(k: usize, s_len: usize, t: usize, layers: usize) -> Self {
        Self { k, s_len, t, layers: Some(layers), budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderParams {
    pub d: usize,
    pub eta: Rational,
    pub trials: usize,
    pub seed: u64,
}

impl DecoderParams {
    fn validate(&self) -> Result<()> {
        if self.d < 1 || self.eta <= rational::zero() || self.eta > rational::one() || self.trials < 1 {
            return Err(Error::ParamError("decoder needs d >= 1, 0 < eta <= 1 and trials >= 1".into()));
        }
        Ok(())
    }
}

fn build(inst: &UniqueGamesInstance, p: &ReductionParams) -> Result<TwoTypeDigraph> {
    if p.k < 2 || p.s_len < 1 {
        return Err(Error::ParamError(format!("need k >= 2 and s_len >= 1 (got k={}, s_len={})", p.k, p.s_len)));
    }
    if p.t < 1 {
        return Err(Error::ParamError("t must be at least 1: the tuple needs 2t >= 2 neighbor slots".into()));
    }
    if matches!(p.layers, Some(l) if l < 2) {
        return Err(Error::ParamError("the layered reduction needs at least 2 layers".into()));
    }
    let r = inst.r();
    let deg = inst.v_degree();
    let slots = 2 * p.t;
    let layers = p.layers.unwrap_or(1);
    let tests = [
        Some(inst.v_ids().len() as u128),
        checked_pow(deg, slots),
        checked_pow(p.k, r),
        checked_pow(r, p.s_len),
        Some(layers as u128),
    ]
    .into_iter()
    .try_fold(1u128, |acc, f| acc.checked_mul(f?))
    .unwrap_or(u128::MAX);
    Error::check_budget(tests, p.budget)?;
    let cube = Cube::with_budget(p.k, r, p.budget)?;
    let size = cube.size();
    let nw = inst.w_ids().len();
    let bit_layers: Vec<Option<usize>> = match p.layers {
        Some(l) => (0..=l).map(Some).collect(),
        None => vec![None],
    };

    let mut vertices = Vec::new();
    for &layer in &bit_layers {
        for name in inst.w_ids() {
            for x in 0..size {
                vertices.push(Vertex {
                    id: format!("b{}:{}:w={name}", layer_prefix(layer), cube.format(x)),
                    role: Role::Bit,
                    layer,
                    payload: Payload::Bit { x, w: Some(name.clone()) },
                });
            }
        }
    }
    let bit = |l: usize, w: usize, z: usize| (l * nw + w) * size + z;

    let mut arcs = Vec::new();
    let test_layers: Vec<Option<usize>> = match p.layers {
        Some(l) => (0..l).map(Some).collect(),
        None => vec![None],
    };
    for &layer in &test_layers {
        for (v, v_name) in inst.v_ids().iter().enumerate() {
            let incident = inst.v_edges(v);
            for tuple in sequences(deg, slots) {
                let edges: Vec<usize> = tuple.iter().map(|&a| incident[a]).collect();
                let ws: Vec<String> = edges.iter().map(|&e| inst.slot_name(e)).collect();
                for x in 0..size {
                    for seq in sequences(r, p.s_len) {
                        let t = vertices.len();
                        for &e in &edges {
                            let edge = &inst.edges()[e];
                            for z in permuted_subcube_points(&cube, x, &seq, &edge.perm, false) {
                                match layer {
                                    None => arcs.push((bit(0, edge.w, z), t)),
                                    Some(lt) => arcs.extend((0..=lt).map(|l| (bit(l, edge.w, z), t))),
                                }
                            }
                            for z in permuted_subcube_points(&cube, x, &seq, &edge.perm, true) {
                                match layer {
                                    None => arcs.push((t, bit(0, edge.w, z))),
                                    Some(lt) => arcs.extend((lt + 1..=layers).map(|l| (t, bit(l, edge.w, z)))),
                                }
                            }
                        }
                        vertices.push(Vertex {
                            id: format!(
                                "t{}:{}:{}:v={v_name}:ws={}",
                                layer_prefix(layer),
                                cube.format(x),
                                seq_string(&seq),
                                ws.join(",")
                            ),
                            role: Role::Test,
                            layer,
                            payload: Payload::Test {
                                x,
                                seq: seq.clone(),
                                v: Some(v_name.clone()),
                                ws: ws.clone(),
                                slots: edges.clone(),
                            },
                        });
                    }
                }
            }
        }
    }
    let meta = GraphMeta {
        kind: if p.layers.is_some() { GraphKind::UgDvd } else { GraphKind::UgFvs },
        k: p.k,
        r,
        s_len: p.s_len,
        layers: p.layers,
        t: Some(p.t),
        provenance: Some(inst.content_hash()),
    };
    TwoTypeDigraph::new(meta, vertices, arcs)
}

pub fn ug_to_fvs(inst: &UniqueGamesInstance, p: &ReductionParams) -> Result<TwoTypeDigraph> {
    if p.layers.is_some() {
        return Err(Error::ParamError("ug_to_fvs takes no layer count".into()));
    }
    build(inst, p)
}

pub fn ug_to_dvd(inst: &UniqueGamesInstance, p: &ReductionParams) -> Result<TwoTypeDigraph> {
    if p.layers.is_none() {
        return Err(Error::ParamError("ug_to_dvd needs a layer count".into()));
    }
    build(inst, p)
}

fn check_provenance(inst: &UniqueGamesInstance, g: &TwoTypeDigraph) -> Result<()> {
    if !matches!(g.kind(), GraphKind::UgFvs | GraphKind::UgDvd) {
        return Err(Error::InconsistentInput(format!("{} is not a reduced graph", g.kind().as_str())));
    }
    if g.meta().provenance.as_deref() != Some(inst.content_hash().as_str()) {
        return Err(Error::ForeignInstance("graph was not built from this Unique Games instance".into()));
    }
    Ok(())
}

fn labeling_hash(rho: &Labeling) -> String {
    let text = serde_json::to_string(rho).expect("labeling serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingPartitionReport {
    pub ok: bool,
    pub val: Rational,
    pub tests: usize,
    pub good: usize,
    pub good_fraction: Rational,
    pub class_fraction: Rational,
    /// `1 - ((R-1)/R)^s_len`: chance that `ρ(v) ∈ S`.
    pub eps_subcube: Rational,
    /// `1 - val(ρ)`.
    pub zeta: Rational,
    /// `(1 - eps_subcube - 2tζ) / k`, the union bound on `|T_j|/|T|`.
    pub union_bound: Rational,
    /// `(1 - 2·eps_subcube) / k`; it follows from the union bound when
    /// `2tζ <= eps_subcube`.
    pub small_zeta_bound: Rational,
    pub small_zeta: bool,
    pub checks: Vec<CompletenessReport>,
}

/// `T_j` = good tests with `x_{ρ(v)} = j`; a test is good when `ρ(v) ∉ S`
/// and `ρ` satisfies every slot edge.
pub fn partition_from_labeling(
    inst: &UniqueGamesInstance,
    g: &TwoTypeDigraph,
    rho: &Labeling,
) -> Result<(PartitionWitness, LabelingPartitionReport)> {
    check_provenance(inst, g)?;
    let (lv, lw) = inst.resolve(rho)?;
    let meta = g.meta().clone();
    let cube = Cube::new(meta.k, meta.r)?;
    let v_index: HashMap<&str, usize> = inst.v_ids().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut prime = BTreeSet::new();
    let mut classes = vec![BTreeSet::new(); meta.k];
    for vert in g.vertices() {
        let Payload::Test { x, seq, v: Some(v), slots, .. } = &vert.payload else { continue };
        let v = v_index[v.as_str()];
        let label = lv[v];
        let good = !seq.contains(&label) && slots.iter().all(|&e| inst.satisfies(e, &lv, &lw));
        if good {
            classes[cube.digit(*x, label)].insert(vert.id.clone());
        } else {
            prime.insert(vert.id.clone());
        }
    }
    let witness = PartitionWitness {
        kind: g.kind(),
        meta: meta.clone(),
        prime,
        classes,
        source: WitnessSource::Labeling(labeling_hash(rho)),
    };
    let mode = CompletenessMode::for_graph(g);
    let checks = (0..meta.k).map(|j| verify_completeness(g, &witness, j, mode)).collect::<Result<Vec<_>>>()?;

    let tests = g.test_count();
    let good = tests - witness.prime.len();
    let val = crate::unique_games::evaluate_labeling(inst, rho)?;
    let k = rational::int(meta.k as i64);
    let r = meta.r as u128;
    let miss = frac((r - 1).pow(meta.s_len as u32), r.pow(meta.s_len as u32));
    let eps = rational::one() - miss;
    let zeta = rational::one() - &val;
    let two_t_zeta = rational::int(2 * meta.t.unwrap_or(1) as i64) * &zeta;
    let report = LabelingPartitionReport {
        ok: checks.iter().all(|c| c.ok),
        val,
        tests,
        good,
        good_fraction: frac(good as u128, tests as u128),
        class_fraction: frac(witness.classes[0].len() as u128, tests as u128),
        union_bound: (rational::one() - &eps - &two_t_zeta) / &k,
        small_zeta_bound: (rational::one() - rational::int(2) * &eps) / &k,
        small_zeta: two_t_zeta <= eps,
        eps_subcube: eps,
        zeta,
        checks,
    };
    Ok((witness, report))
}

/// Outcome of the randomized labeling step shared by both decoders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingDraw {
    pub labeling: Labeling,
    pub val: Rational,
    /// Trial that produced the best labeling (0-based).
    pub trial: usize,
    /// Whether the best labeling came from the plurality completion of the
    /// sampled `W` labels rather than random neighbors.
    pub plurality: bool,
}

/// Draws `ρ(w)` uniformly from `lists[w]` (label 0 when empty) and `ρ(v)`
/// through a uniformly random incident edge, `trials` times. Each draw is
/// also completed by plurality on `V`; the best labeling overall is kept.
pub fn randomized_labeling(inst: &UniqueGamesInstance, lists: &[Vec<usize>], trials: usize, seed: u64) -> LabelingDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = inst.edges().len() as u128;
    let count = |lv: &[usize], lw: &[usize]| (0..inst.edges().len()).filter(|&e| inst.satisfies(e, lv, lw)).count();
    let mut best: Option<(usize, Vec<usize>, Vec<usize>, usize, bool)> = None;
    for trial in 0..trials {
        let lw: Vec<usize> =
            lists.iter().map(|l| if l.is_empty() { 0 } else { l[rng.gen_range(0..l.len())] }).collect();
        let lv: Vec<usize> = (0..inst.v_ids().len())
            .map(|v| {
                let inc = inst.v_edges(v);
                let e = &inst.edges()[inc[rng.gen_range(0..inc.len())]];
                e.perm[lw[e.w]]
            })
            .collect();
        let plural = inst.plurality_completion(&lw);
        for (cand, is_plural) in [(lv, false), (plural, true)] {
            let c = count(&cand, &lw);
            if best.as_ref().is_none_or(|b| c > b.0) {
                best = Some((c, cand, lw.clone(), trial, is_plural));
            }
        }
    }
    let (c, lv, lw, trial, plurality) = best.expect("at least one trial");
    LabelingDraw { labeling: inst.labeling(&lv, &lw), val: frac(c as u128, m), trial, plurality }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedLabeling {
    pub draw: LabelingDraw,
    /// `L[w]` per `w` name.
    pub lists: BTreeMap<String, Vec<usize>>,
    /// `w` whose list came out empty (label 0 was used).
    pub empty_lists: Vec<String>,
    /// `|L[w]| · η <= d` for every `w`.
    pub list_bound_holds: bool,
    pub survivors: usize,
    /// Fraction of survivors with at least `t` slots whose in-set is
    /// constant 0 or at least `t` slots whose out-set is constant 1.
    pub forced_fraction: Rational,
    /// Smallest such slot count over survivors.
    pub min_forced_slots: Option<usize>,
}

fn influence_lists(fs: &[TableFunction], dp: &DecoderParams) -> Result<Vec<Vec<usize>>> {
    fs.iter()
        .map(|f| {
            let es = EfronStein::new(f)?;
            Ok(es.degree_influences(dp.d).iter().enumerate().filter(|(_, v)| **v >= dp.eta).map(|(i, _)| i).collect())
        })
        .collect()
}

fn list_bound(lists: &[Vec<usize>], dp: &DecoderParams) -> bool {
    lists.iter().all(|l| rational::int(l.len() as i64) * &dp.eta <= rational::int(dp.d as i64))
}

/// Soundness decoder for the FVS reduction: `f_w` is 0 on the first half
/// of `w`'s bits in topological order and 1 on the rest.
pub fn decode_labeling(
    inst: &UniqueGamesInstance,
    g: &TwoTypeDigraph,
    survivors: &BTreeSet<String>,
    dp: &DecoderParams,
) -> Result<DecodedLabeling> {
    check_provenance(inst, g)?;
    if g.kind() != GraphKind::UgFvs {
        return Err(Error::InconsistentInput("decode_labeling expects an unlayered reduced graph".into()));
    }
    dp.validate()?;
    let meta = g.meta();
    let cube = Cube::new(meta.k, meta.r)?;
    let keep = g.test_set(survivors)?;
    let del: BTreeSet<usize> = g.test_indices().into_iter().filter(|t| !keep.contains(t)).collect();
    let rest = g.delete_indices(&del);
    let order = match rest.topological_sort() {
        Topo::Order(o) => o,
        Topo::Cycle(c) => return Err(Error::CyclicSurvivor(rest.ids(&c))),
    };
    let w_index: HashMap<&str, usize> = inst.w_ids().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let nw = inst.w_ids().len();
    let mut per_w: Vec<Vec<usize>> = vec![Vec::new(); nw];
    let mut position = vec![0usize; rest.vertices().len()];
    for (pos, &u) in order.iter().enumerate() {
        position[u] = pos;
        if let Payload::Bit { x, w: Some(w) } = &rest.vertex(u).payload {
            per_w[w_index[w.as_str()]].push(*x);
        }
    }
    let mut ones = vec![vec![false; cube.size()]; nw];
    for (w, xs) in per_w.iter().enumerate() {
        for &x in &xs[xs.len() / 2..] {
            ones[w][x] = true;
        }
    }
    let fs: Vec<TableFunction> = ones.iter().map(|o| TableFunction::indicator(cube, |x| o[x])).collect();
    let lists = influence_lists(&fs, dp)?;

    let t = meta.t.unwrap_or(1);
    let mut forced = 0u128;
    let mut min_forced: Option<usize> = None;
    for &u in &keep {
        let Payload::Test { x, seq, slots, .. } = &g.vertex(u).payload else { continue };
        let (mut zero_in, mut one_out) = (0, 0);
        for &e in slots {
            let edge = &inst.edges()[e];
            let f = &ones[edge.w];
            zero_in += permuted_subcube_points(&cube, *x, seq, &edge.perm, false).iter().all(|&z| !f[z]) as usize;
            one_out += permuted_subcube_points(&cube, *x, seq, &edge.perm, true).iter().all(|&z| f[z]) as usize;
        }
        let m = zero_in.max(one_out);
        forced += (m >= t) as u128;
        min_forced = Some(min_forced.map_or(m, |c: usize| c.min(m)));
    }
    let n = keep.len() as u128;
    let draw = randomized_labeling(inst, &lists, dp.trials, dp.seed);
    Ok(DecodedLabeling {
        list_bound_holds: list_bound(&lists, dp),
        empty_lists: (0..nw).filter(|&w| lists[w].is_empty()).map(|w| inst.w_ids()[w].clone()).collect(),
        lists: inst.w_ids().iter().cloned().zip(lists).collect(),
        draw,
        survivors: keep.len(),
        forced_fraction: if n == 0 { rational::one() } else { frac(forced, n) },
        min_forced_slots: min_forced,
    })
}

/// Per `(w, ℓ)` data of the layered decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerEntry {
    pub w: String,
    pub layer: usize,
    /// `χ(w, ℓ)` and `χ(w, ℓ+1)`.
    pub color: u32,
    pub next_color: u32,
    /// `E[f^ℓ_w]` where `f^ℓ_w(x) = 0` iff `χ(b^{ℓ+1}_{w,x}) > χ(w, ℓ)`.
    pub mean: Rational,
    pub list: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DvdDiagnostics {
    pub colors_used: u32,
    pub unsatisfied: usize,
    pub layer_satisfied: Vec<Rational>,
    pub entries: Vec<LayerEntry>,
    /// Fraction of `(w, ℓ)` with `χ(w, ℓ+1) > χ(w, ℓ)`.
    pub increase_fraction: Rational,
    pub list_bound_holds: bool,
    /// Best labeling over all test layers.
    pub draw: LabelingDraw,
    pub best_layer: usize,
}

/// Layered decoder: colors the bits from the deletion, derives `χ(w, ℓ)`,
/// `f^ℓ_w` and `L^ℓ[w]`, and runs the randomized labeling on every layer.
pub fn dvd_layer_diagnostics(
    inst: &UniqueGamesInstance,
    g: &TwoTypeDigraph,
    del: &BTreeSet<String>,
    delta: &Rational,
    dp: &DecoderParams,
) -> Result<DvdDiagnostics> {
    check_provenance(inst, g)?;
    if g.kind() != GraphKind::UgDvd {
        return Err(Error::InconsistentInput("dvd_layer_diagnostics expects a layered reduced graph".into()));
    }
    dp.validate()?;
    let layers = g.meta().layers.unwrap_or(0);
    let cube = Cube::new(g.meta().k, g.meta().r)?;
    let (chi, report) = coloring_from_deletion(g, del, delta)?;
    let color_of: HashMap<(String, usize), u32> =
        report.layer_colors.iter().map(|lc| ((lc.w.clone().unwrap_or_default(), lc.layer), lc.color)).collect();

    let mut entries = Vec::new();
    let mut increases = 0u128;
    let mut best: Option<(LabelingDraw, usize)> = None;
    let mut bound = true;
    for layer in 0..layers {
        let mut fs = Vec::new();
        for w in inst.w_ids() {
            let c = color_of[&(w.clone(), layer)];
            let next = color_of[&(w.clone(), layer + 1)];
            increases += (next > c) as u128;
            let f = TableFunction::indicator(cube, |x| {
                let id = format!("b:{}:{}:w={w}", layer + 1, cube.format(x));
                chi.colors[&id] <= c
            });
            entries.push(LayerEntry {
                w: w.clone(),
                layer,
                color: c,
                next_color: next,
                mean: f.mean(),
                list: Vec::new(),
            });
            fs.push(f);
        }
        let lists = influence_lists(&fs, dp)?;
        bound &= list_bound(&lists, dp);
        let base = entries.len() - lists.len();
        for (i, l) in lists.iter().enumerate() {
            entries[base + i].list = l.clone();
        }
        let draw = randomized_labeling(inst, &lists, dp.trials, dp.seed.wrapping_add(layer as u64));
        if best.as_ref().is_none_or(|b| draw.val > b.0.val) {
            best = Some((draw, layer));
        }
    }
    let (draw, best_layer) = best.ok_or_else(|| Error::InconsistentInput("graph has no test layer".into()))?;
    Ok(DvdDiagnostics {
        colors_used: report.colors_used,
        unsatisfied: report.unsatisfied.len(),
        layer_satisfied: report.layer_satisfied,
        increase_fraction: frac(increases, (layers * inst.w_ids().len()) as u128),
        list_bound_holds: bound,
        entries,
        draw,
        best_layer,
    })
}
