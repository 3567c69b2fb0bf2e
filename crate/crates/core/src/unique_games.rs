//! Unique Games instances on regular bipartite (multi)graphs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::boolfn::{checked_pow, frac};
use crate::{Error, Rational, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UgEdge {
    pub v: usize,
    pub w: usize,
    /// `perm[a]` is the label of `v` that label `a` of `w` maps to.
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniqueGamesInstance {
    r: usize,
    v_ids: Vec<String>,
    w_ids: Vec<String>,
    edges: Vec<UgEdge>,
    v_edges: Vec<Vec<usize>>,
    w_edges: Vec<Vec<usize>>,
}

/// Total map from `V ∪ W` to `[R]`.
pub type Labeling = BTreeMap<String, usize>;

fn valid_name(s: &str) -> bool {
    !s.is_empty() && !s.contains([':', ',', '#', '='])
}

impl UniqueGamesInstance {
    pub fn new(r: usize, v_ids: Vec<String>, w_ids: Vec<String>, edges: Vec<UgEdge>) -> Result<Self> {
        let bad = |m: String| Err(Error::InconsistentInput(m));
        if r == 0 {
            return bad("R must be positive".into());
        }
        if v_ids.is_empty() || w_ids.is_empty() || edges.is_empty() {
            return bad("V, W and the edge list must be non-empty".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for id in v_ids.iter().chain(&w_ids) {
            if !valid_name(id) {
                return bad(format!("vertex name {id:?} is empty or contains one of : , # ="));
            }
            if !names.insert(id) {
                return bad(format!("duplicate vertex name {id}"));
            }
        }
        let mut v_edges = vec![Vec::new(); v_ids.len()];
        let mut w_edges = vec![Vec::new(); w_ids.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.v >= v_ids.len() || e.w >= w_ids.len() {
                return bad(format!("edge {i} has an endpoint out of range"));
            }
            let mut seen = vec![false; r];
            if e.perm.len() != r || e.perm.iter().any(|&a| a >= r || std::mem::replace(&mut seen[a], true)) {
                return bad(format!("edge {i} does not carry a permutation of [{r}]"));
            }
            v_edges[e.v].push(i);
            w_edges[e.w].push(i);
        }
        let regular = |lists: &[Vec<usize>]| lists.iter().all(|l| l.len() == lists[0].len());
        if !regular(&v_edges) || !regular(&w_edges) {
            return bad("the constraint graph is not regular".into());
        }
        Ok(Self { r, v_ids, w_ids, edges, v_edges, w_edges })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn v_ids(&self) -> &[String] {
        &self.v_ids
    }

    pub fn w_ids(&self) -> &[String] {
        &self.w_ids
    }

    pub fn edges(&self) -> &[UgEdge] {
        &self.edges
    }

    /// Edge indices at `v`, in input order.
    pub fn v_edges(&self, v: usize) -> &[usize] {
        &self.v_edges[v]
    }

    pub fn w_edges(&self, w: usize) -> &[usize] {
        &self.w_edges[w]
    }

    pub fn v_degree(&self) -> usize {
        self.v_edges[0].len()
    }

    pub fn w_degree(&self) -> usize {
        self.w_edges[0].len()
    }

    /// Name used for edge `e` inside vertex ids: the `w` name, suffixed by
    /// `#n` when `e` is the n-th (n >= 1) parallel edge between its ends.
    pub fn slot_name(&self, e: usize) -> String {
        let edge = &self.edges[e];
        let n = self.v_edges[edge.v].iter().take_while(|&&f| f != e).filter(|&&f| self.edges[f].w == edge.w).count();
        if n == 0 {
            self.w_ids[edge.w].clone()
        } else {
            format!("{}#{n}", self.w_ids[edge.w])
        }
    }

    /// Per-vertex label arrays from a total labeling.
    pub fn resolve(&self, rho: &Labeling) -> Result<(Vec<usize>, Vec<usize>)> {
        let get = |id: &String| -> Result<usize> {
            match rho.get(id) {
                Some(&a) if a < self.r => Ok(a),
                Some(&a) => Err(Error::PartialLabeling(format!("{id} has label {a} outside [{}]", self.r))),
                None => Err(Error::PartialLabeling(format!("{id} is unlabeled"))),
            }
        };
        let v = self.v_ids.iter().map(get).collect::<Result<_>>()?;
        let w = self.w_ids.iter().map(get).collect::<Result<_>>()?;
        Ok((v, w))
    }

    pub fn labeling(&self, v: &[usize], w: &[usize]) -> Labeling {
        self.v_ids
            .iter()
            .cloned()
            .zip(v.iter().copied())
            .chain(self.w_ids.iter().cloned().zip(w.iter().copied()))
            .collect()
    }

    pub fn satisfies(&self, e: usize, lv: &[usize], lw: &[usize]) -> bool {
        let edge = &self.edges[e];
        edge.perm[lw[edge.w]] == lv[edge.v]
    }

    fn satisfied_count(&self, lv: &[usize], lw: &[usize]) -> usize {
        (0..self.edges.len()).filter(|&e| self.satisfies(e, lv, lw)).count()
    }

    /// Labels of `V` maximizing the satisfied edges for fixed labels of `W`:
    /// plurality of `π_{v,w}(ρ(w))`, ties to the smallest label.
    pub fn plurality_completion(&self, lw: &[usize]) -> Vec<usize> {
        (0..self.v_ids.len())
            .map(|v| {
                let mut votes = vec![0usize; self.r];
                for &e in &self.v_edges[v] {
                    votes[self.edges[e].perm[lw[self.edges[e].w]]] += 1;
                }
                let best = *votes.iter().max().unwrap();
                votes.iter().position(|&c| c == best).unwrap()
            })
            .collect()
    }

    /// Lowercase hex SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let text = crate::formats::ug_to_json(self, None);
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn evaluate_labeling(inst: &UniqueGamesInstance, rho: &Labeling) -> Result<Rational> {
    let (lv, lw) = inst.resolve(rho)?;
    Ok(frac(inst.satisfied_count(&lv, &lw) as u128, inst.edges.len() as u128))
}

/// Exact optimum by enumerating labels of `W` (first `w` varying fastest)
/// and completing `V` by plurality. The first optimum found wins.
pub fn brute_force_opt(inst: &UniqueGamesInstance, budget: u64) -> Result<(Rational, Labeling)> {
    let count = checked_pow(inst.r, inst.w_ids.len()).unwrap_or(u128::MAX);
    Error::check_budget(count, budget)?;
    let mut lw = vec![0usize; inst.w_ids.len()];
    let mut best: Option<(usize, Vec<usize>, Vec<usize>)> = None;
    loop {
        let lv = inst.plurality_completion(&lw);
        let sat = inst.satisfied_count(&lv, &lw);
        if best.as_ref().is_none_or(|b| sat > b.0) {
            best = Some((sat, lv, lw.clone()));
        }
        if !advance(&mut lw, inst.r) {
            break;
        }
    }
    let (sat, lv, lw) = best.unwrap();
    Ok((frac(sat as u128, inst.edges.len() as u128), inst.labeling(&lv, &lw)))
}

/// Odometer step over `[base]^n`; false once it wraps.
pub(crate) fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Satisfiable,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub nv: usize,
    pub nw: usize,
    /// Degree of every `v`.
    pub deg: usize,
    pub r: usize,
}

/// Seeded generator. The graph is circulant: `v_i` is joined to
/// `w_{(i·deg + a) mod |W|}` for `a < deg`, then `W` is shuffled. This is
/// simple whenever `deg <= |W|` and a multigraph otherwise.
pub fn generate(kind: GenKind, p: GenParams, seed: u64) -> Result<(UniqueGamesInstance, Option<Labeling>)> {
    let infeasible = Error::InfeasibleDegrees { nv: p.nv, nw: p.nw, deg: p.deg };
    if p.nv == 0 || p.nw == 0 || p.deg == 0 || !(p.nv * p.deg).is_multiple_of(p.nw) {
        return Err(infeasible);
    }
    if p.r == 0 {
        return Err(Error::ParamError("R must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut relabel: Vec<usize> = (0..p.nw).collect();
    relabel.shuffle(&mut rng);
    let planted: Option<(Vec<usize>, Vec<usize>)> = match kind {
        GenKind::Satisfiable => Some((
            (0..p.nv).map(|_| rng.gen_range(0..p.r)).collect(),
            (0..p.nw).map(|_| rng.gen_range(0..p.r)).collect(),
        )),
        GenKind::Random => None,
    };
    let mut edges = Vec::with_capacity(p.nv * p.deg);
    for v in 0..p.nv {
        for a in 0..p.deg {
            let w = relabel[(v * p.deg + a) % p.nw];
            let mut perm: Vec<usize> = (0..p.r).collect();
            perm.shuffle(&mut rng);
            if let Some((lv, lw)) = &planted {
                let pos = perm.iter().position(|&b| b == lv[v]).unwrap();
                perm.swap(pos, lw[w]);
            }
            edges.push(UgEdge { v, w, perm });
        }
    }
    let v_ids = (0..p.nv).map(|i| format!("v{i}")).collect();
    let w_ids = (0..p.nw).map(|i| format!("w{i}")).collect();
    let inst = UniqueGamesInstance::new(p.r, v_ids, w_ids, edges)?;
    let planted = planted.map(|(lv, lw)| inst.labeling(&lv, &lw));
    Ok((inst, planted))
}
