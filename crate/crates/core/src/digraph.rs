//! Directed graphs shared by the gadgets, reductions and solvers.
//!
//! [`PlainDigraph`] is an index graph. [`TwoTypeDigraph`] tags every vertex
//! as a bit vertex (never deletable) or a test vertex and keeps its vertices
//! sorted by canonical id, so "smallest index" and "smallest id" coincide and
//! every tie-break below is reproducible.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Outcome of a topological sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topo {
    Order(Vec<usize>),
    /// Consecutive vertices are joined by arcs, and so are the last and the
    /// first. Rotated so the smallest vertex comes first.
    Cycle(Vec<usize>),
}

impl Topo {
    pub fn order(self) -> Option<Vec<usize>> {
        match self {
            Topo::Order(o) => Some(o),
            Topo::Cycle(_) => None,
        }
    }

    pub fn is_acyclic(&self) -> bool {
        matches!(self, Topo::Order(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainDigraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

/// Induced subgraph together with the original index of every kept vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Induced {
    pub graph: PlainDigraph,
    pub kept: Vec<usize>,
}

impl PlainDigraph {
    /// Duplicate arcs are merged; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut arcs: Vec<(usize, usize)> = arcs.into_iter().collect();
        for &(a, b) in &arcs {
            let bad = if a >= n { a } else { b };
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange { index: bad, limit: n });
            }
            if a == b {
                return Err(Error::ParamError(format!("self-loop on vertex {a}")));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        Ok(Self::from_sorted(n, arcs))
    }

    fn from_sorted(n: usize, arcs: Vec<(usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for &(a, b) in &arcs {
            out[a].push(b);
            inn[b].push(a);
        }
        for list in &mut inn {
            list.sort_unstable();
        }
        Self { n, arcs, out, inn }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    /// Kahn's method; among available vertices the smallest index goes first.
    pub fn topological_sort(&self) -> Topo {
        self.topological_sort_alive(None)
    }

    /// Topological sort of the subgraph induced by `alive` (all vertices when
    /// `None`). Returned indices refer to this graph.
    pub fn topological_sort_alive(&self, alive: Option<&[bool]>) -> Topo {
        let live = |v: usize| alive.is_none_or(|a| a[v]);
        let mut indeg = vec![0usize; self.n];
        let mut total = 0;
        for v in 0..self.n {
            if !live(v) {
                continue;
            }
            total += 1;
            indeg[v] = self.inn[v].iter().filter(|&&p| live(p)).count();
        }
        let mut heap: BinaryHeap<Reverse<usize>> =
            (0..self.n).filter(|&v| live(v) && indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(total);
        while let Some(Reverse(v)) = heap.pop() {
            order.push(v);
            for &s in &self.out[v] {
                if live(s) {
                    indeg[s] -= 1;
                    if indeg[s] == 0 {
                        heap.push(Reverse(s));
                    }
                }
            }
        }
        if order.len() == total {
            return Topo::Order(order);
        }
        // Every unprocessed vertex still has an unprocessed predecessor, so
        // walking backwards must revisit a vertex.
        let stuck: Vec<bool> = (0..self.n).map(|v| live(v) && indeg[v] > 0).collect();
        let start = stuck.iter().position(|&s| s).expect("unprocessed vertex");
        let mut seen_at = HashMap::new();
        let mut walk = Vec::new();
        let mut cur = start;
        loop {
            if let Some(&pos) = seen_at.get(&cur) {
                let mut cycle: Vec<usize> = walk[pos..].to_vec();
                cycle.reverse();
                let min_pos = cycle.iter().enumerate().min_by_key(|&(_, v)| *v).map(|(i, _)| i).unwrap_or(0);
                cycle.rotate_left(min_pos);
                return Topo::Cycle(cycle);
            }
            seen_at.insert(cur, walk.len());
            walk.push(cur);
            cur = *self.inn[cur].iter().find(|&&p| stuck[p]).expect("stuck vertex has a stuck predecessor");
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_sort().is_acyclic()
    }

    /// Maximum number of vertices on a directed path, counting every vertex.
    pub fn longest_path_vertices(&self) -> Result<(usize, Vec<usize>)> {
        self.longest_weighted_path(None, None)
    }

    /// Longest path where only vertices with `counted[v]` contribute to the
    /// count, restricted to `alive` vertices.
    ///
    /// The witness ends at the smallest vertex attaining the maximum; each
    /// step back takes the smallest maximizing predecessor. Uncounted
    /// vertices at either end of the witness are trimmed.
    pub fn longest_weighted_path(
        &self,
        counted: Option<&[bool]>,
        alive: Option<&[bool]>,
    ) -> Result<(usize, Vec<usize>)> {
        let order = match self.topological_sort_alive(alive) {
            Topo::Order(o) => o,
            Topo::Cycle(c) => return Err(Error::CyclicInput(c.iter().map(|v| v.to_string()).collect())),
        };
        let live = |v: usize| alive.is_none_or(|a| a[v]);
        let weight = |v: usize| usize::from(counted.is_none_or(|c| c[v]));
        let mut best = vec![0usize; self.n];
        let mut back = vec![usize::MAX; self.n];
        for &v in &order {
            let mut top = 0;
            for &p in &self.inn[v] {
                if live(p) && best[p] > top {
                    top = best[p];
                    back[v] = p;
                }
            }
            best[v] = top + weight(v);
        }
        let Some(&end) = order.iter().min_by_key(|&&v| (Reverse(best[v]), v)) else {
            return Ok((0, Vec::new()));
        };
        let count = best[end];
        if count == 0 {
            return Ok((0, Vec::new()));
        }
        let mut path = vec![end];
        let mut cur = end;
        while back[cur] != usize::MAX {
            cur = back[cur];
            path.push(cur);
        }
        path.reverse();
        while path.first().is_some_and(|&v| weight(v) == 0) {
            path.remove(0);
        }
        while path.last().is_some_and(|&v| weight(v) == 0) {
            path.pop();
        }
        Ok((count, path))
    }

    pub fn delete_vertices(&self, del: &BTreeSet<usize>) -> Result<Induced> {
        if let Some(&bad) = del.iter().find(|&&v| v >= self.n) {
            return Err(Error::IndexOutOfRange { index: bad, limit: self.n });
        }
        let kept: Vec<usize> = (0..self.n).filter(|v| !del.contains(v)).collect();
        let mut new_index = vec![usize::MAX; self.n];
        for (i, &v) in kept.iter().enumerate() {
            new_index[v] = i;
        }
        let arcs = self
            .arcs
            .iter()
            .filter(|(a, b)| new_index[*a] != usize::MAX && new_index[*b] != usize::MAX)
            .map(|&(a, b)| (new_index[a], new_index[b]))
            .collect();
        Ok(Induced { graph: Self::from_sorted(kept.len(), arcs), kept })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for v in 0..self.n {
            let _ = writeln!(s, "  \"{v}\";");
        }
        for &(a, b) in &self.arcs {
            let _ = writeln!(s, "  \"{a}\" -> \"{b}\";");
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Bit,
    Test,
}

/// Structured key of a vertex. Points are indices into `[k]^R`
/// (little-endian base k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    None,
    Bit {
        x: usize,
        w: Option<String>,
    },
    Test {
        x: usize,
        seq: Vec<usize>,
        v: Option<String>,
        ws: Vec<String>,
        /// Unique Games edge index behind every neighbor slot.
        slots: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub role: Role,
    pub layer: Option<usize>,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    FvsGadget,
    DvdGadget,
    UgFvs,
    UgDvd,
    Generic,
}

impl GraphKind {
    pub fn is_layered(self) -> bool {
        matches!(self, GraphKind::DvdGadget | GraphKind::UgDvd)
    }

    pub fn is_gadget_like(self) -> bool {
        !matches!(self, GraphKind::Generic)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::FvsGadget => "fvs-gadget",
            GraphKind::DvdGadget => "dvd-gadget",
            GraphKind::UgFvs => "ug-fvs",
            GraphKind::UgDvd => "ug-dvd",
            GraphKind::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub kind: GraphKind,
    pub k: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub s_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// Hash of the Unique Games instance a reduced graph was built from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTypeDigraph {
    meta: GraphMeta,
    vertices: Vec<Vertex>,
    graph: PlainDigraph,
    index: HashMap<String, usize>,
}

/// Result of [`TwoTypeDigraph::collapse_bit_vertices`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collapsed {
    pub graph: PlainDigraph,
    /// Collapsed index -> index of the test vertex in the two-type graph.
    pub tests: Vec<usize>,
}

impl TwoTypeDigraph {
    /// `arcs` index into `vertices` as given; vertices are re-sorted by id.
    pub fn new(meta: GraphMeta, vertices: Vec<Vertex>, arcs: Vec<(usize, usize)>) -> Result<Self> {
        let mut perm: Vec<usize> = (0..vertices.len()).collect();
        perm.sort_by(|&a, &b| vertices[a].id.cmp(&vertices[b].id));
        let mut new_index = vec![0; vertices.len()];
        for (new, &old) in perm.iter().enumerate() {
            new_index[old] = new;
        }
        let mut slots: Vec<Option<Vertex>> = vertices.into_iter().map(Some).collect();
        let sorted: Vec<Vertex> = perm.iter().map(|&old| slots[old].take().unwrap()).collect();
        for pair in sorted.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InconsistentInput(format!("duplicate vertex id {}", pair[0].id)));
            }
        }
        let n = sorted.len();
        let mut remapped = Vec::with_capacity(arcs.len());
        for (a, b) in arcs {
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange { index: a.max(b), limit: n });
            }
            remapped.push((new_index[a], new_index[b]));
        }
        let graph = PlainDigraph::new(n, remapped)?;
        let index = sorted.iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect();
        let g = Self { meta, vertices: sorted, graph, index };
        g.check_invariants()?;
        Ok(g)
    }

    /// Builds from arcs given as id pairs.
    pub fn from_id_arcs(meta: GraphMeta, vertices: Vec<Vertex>, arcs: &[(String, String)]) -> Result<Self> {
        let pos: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let lookup = |id: &String| pos.get(id.as_str()).copied().ok_or_else(|| Error::UnknownVertex(id.clone()));
        let idx = arcs.iter().map(|(a, b)| Ok((lookup(a)?, lookup(b)?))).collect::<Result<Vec<_>>>()?;
        Self::new(meta, vertices, idx)
    }

    fn check_invariants(&self) -> Result<()> {
        if !self.meta.kind.is_gadget_like() {
            return Ok(());
        }
        for &(a, b) in self.graph.arcs() {
            let (va, vb) = (&self.vertices[a], &self.vertices[b]);
            if va.role == vb.role {
                return Err(Error::InconsistentInput(format!(
                    "arc {} -> {} joins two vertices of the same role",
                    va.id, vb.id
                )));
            }
            if self.meta.kind.is_layered() {
                let (la, lb) = match (va.layer, vb.layer) {
                    (Some(la), Some(lb)) => (la, lb),
                    _ => {
                        return Err(Error::InconsistentInput(format!(
                            "layered graph has unlayered vertex on arc {} -> {}",
                            va.id, vb.id
                        )))
                    }
                };
                let ok = match va.role {
                    Role::Bit => la <= lb,
                    Role::Test => lb > la,
                };
                if !ok {
                    return Err(Error::InconsistentInput(format!(
                        "arc {} -> {} violates the layer order",
                        va.id, vb.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn kind(&self) -> GraphKind {
        self.meta.kind
    }

    pub fn k(&self) -> usize {
        self.meta.k
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn structure(&self) -> &PlainDigraph {
        &self.graph
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.vertices[i].id
    }

    pub fn ids(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.vertices[i].id.clone()).collect()
    }

    pub fn arc_ids(&self) -> Vec<(String, String)> {
        self.graph.arcs().iter().map(|&(a, b)| (self.vertices[a].id.clone(), self.vertices[b].id.clone())).collect()
    }

    pub fn test_indices(&self) -> Vec<usize> {
        self.role_indices(Role::Test)
    }

    pub fn bit_indices(&self) -> Vec<usize> {
        self.role_indices(Role::Bit)
    }

    fn role_indices(&self, role: Role) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.vertices[i].role == role).collect()
    }

    pub fn test_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.role == Role::Test).count()
    }

    pub fn bit_count(&self) -> usize {
        self.vertices.len() - self.test_count()
    }

    pub fn topological_sort(&self) -> Topo {
        self.graph.topological_sort()
    }

    /// Maximum number of test vertices on a directed path.
    pub fn longest_test_path(&self) -> Result<(usize, Vec<String>)> {
        let counted: Vec<bool> = self.vertices.iter().map(|v| v.role == Role::Test).collect();
        match self.graph.longest_weighted_path(Some(&counted), None) {
            Ok((c, w)) => Ok((c, self.ids(&w))),
            Err(Error::CyclicInput(c)) => Err(Error::CyclicInput(
                c.iter().map(|s| self.vertices[s.parse::<usize>().unwrap()].id.clone()).collect(),
            )),
            Err(e) => Err(e),
        }
    }

    /// Resolves ids to indices, rejecting unknown ids and bit vertices.
    pub fn test_set<'a>(&self, ids: impl IntoIterator<Item = &'a String>) -> Result<BTreeSet<usize>> {
        let mut out = BTreeSet::new();
        for id in ids {
            let i = self.index_of(id).ok_or_else(|| Error::UnknownVertex(id.clone()))?;
            if self.vertices[i].role == Role::Bit {
                return Err(Error::BitDeletion(id.clone()));
            }
            out.insert(i);
        }
        Ok(out)
    }

    /// Induced subgraph without the given test vertices.
    pub fn delete_vertices(&self, del: &BTreeSet<String>) -> Result<TwoTypeDigraph> {
        let idx = self.test_set(del)?;
        Ok(self.delete_indices(&idx))
    }

    pub(crate) fn delete_indices(&self, del: &BTreeSet<usize>) -> TwoTypeDigraph {
        let induced = self.graph.delete_vertices(del).expect("indices in range");
        let vertices: Vec<Vertex> = induced.kept.iter().map(|&i| self.vertices[i].clone()).collect();
        let index = vertices.iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect();
        TwoTypeDigraph { meta: self.meta.clone(), vertices, graph: induced.graph, index }
    }

    /// Replaces every test-bit-test two-arc path by a direct test-test arc
    /// and drops the bit vertices.
    pub fn collapse_bit_vertices(&self) -> Collapsed {
        let tests = self.test_indices();
        let mut pos = vec![usize::MAX; self.vertices.len()];
        for (c, &t) in tests.iter().enumerate() {
            pos[t] = c;
        }
        let mut arcs = Vec::new();
        for (c, &t) in tests.iter().enumerate() {
            for &b in self.graph.successors(t) {
                if self.vertices[b].role != Role::Bit {
                    continue;
                }
                for &t2 in self.graph.successors(b) {
                    if pos[t2] != usize::MAX && t2 != t {
                        arcs.push((c, pos[t2]));
                    }
                }
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        // t -> b -> t would be a self-loop, which PlainDigraph cannot hold.
        // It only happens when S covers every coordinate; see
        // `self_loops_through_bits`.
        Collapsed { graph: PlainDigraph::from_sorted(tests.len(), arcs), tests }
    }

    /// Test vertices t with arcs t -> b -> t for some bit b.
    pub fn self_loops_through_bits(&self) -> Vec<String> {
        self.test_indices()
            .into_iter()
            .filter(|&t| self.graph.successors(t).iter().any(|&b| self.graph.has_arc(b, t)))
            .map(|t| self.vertices[t].id.clone())
            .collect()
    }

    /// Identifies the copies of every vertex across layers. The result is
    /// the unlayered graph the layered construction was built over.
    pub fn identify_layers(&self) -> Result<TwoTypeDigraph> {
        let kind = match self.meta.kind {
            GraphKind::DvdGadget => GraphKind::FvsGadget,
            GraphKind::UgDvd => GraphKind::UgFvs,
            other => return Err(Error::InconsistentInput(format!("{} graph is not layered", other.as_str()))),
        };
        let mut by_id: HashMap<String, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut map = vec![0usize; self.vertices.len()];
        for (i, v) in self.vertices.iter().enumerate() {
            let id = strip_layer(&v.id);
            let next = vertices.len();
            let slot = *by_id.entry(id.clone()).or_insert(next);
            if slot == next {
                vertices.push(Vertex { id, role: v.role, layer: None, payload: v.payload.clone() });
            }
            map[i] = slot;
        }
        let arcs = self.graph.arcs().iter().map(|&(a, b)| (map[a], map[b])).collect();
        let meta = GraphMeta { kind, layers: None, ..self.meta.clone() };
        TwoTypeDigraph::new(meta, vertices, arcs)
    }

    /// DOT rendering; bit vertices are boxes, test vertices ellipses.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for v in &self.vertices {
            let shape = match v.role {
                Role::Bit => "box",
                Role::Test => "ellipse",
            };
            let _ = writeln!(s, "  \"{}\" [shape={shape}];", v.id);
        }
        for &(a, b) in self.graph.arcs() {
            let _ = writeln!(s, "  \"{}\" -> \"{}\";", self.vertices[a].id, self.vertices[b].id);
        }
        s.push_str("}\n");
        s
    }
}

/// `b:3:0101` -> `b:0101`. Layered ids always carry the layer as the
/// second field.
pub(crate) fn strip_layer(id: &str) -> String {
    let mut parts: Vec<&str> = id.split(':').collect();
    if parts.len() > 2 {
        parts.remove(1);
    }
    parts.join(":")
}
