//! Independent reference implementations used to cross-check the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hforge_core::boolfn::TableFunction;
use hforge_core::digraph::{Role, TwoTypeDigraph};
use hforge_core::rational::{self, Rational};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Recursive three-color DFS cycle test.
pub fn dfs_has_cycle(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in arcs {
        adj[a].push(b);
    }
    fn visit(v: usize, adj: &[Vec<usize>], state: &mut [u8]) -> bool {
        state[v] = 1;
        for &w in &adj[v] {
            if state[w] == 1 || (state[w] == 0 && visit(w, adj, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    let mut state = vec![0u8; n];
    (0..n).any(|v| state[v] == 0 && visit(v, &adj, &mut state))
}

/// Longest path weight by memoized DFS, where a vertex weighs 1 when
/// `counted[v]`. Assumes the graph is acyclic.
pub fn dfs_longest(n: usize, arcs: &[(usize, usize)], counted: &[bool]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in arcs {
        adj[a].push(b);
    }
    fn best(v: usize, adj: &[Vec<usize>], counted: &[bool], memo: &mut [Option<usize>]) -> usize {
        if let Some(b) = memo[v] {
            return b;
        }
        let tail = adj[v].iter().map(|&w| best(w, adj, counted, memo)).max().unwrap_or(0);
        let b = tail + counted[v] as usize;
        memo[v] = Some(b);
        b
    }
    let mut memo = vec![None; n];
    (0..n).map(|v| best(v, &adj, counted, &mut memo)).max().unwrap_or(0)
}

/// Index arcs of the induced subgraph on `keep`, renumbered, plus the role
/// mask of the kept vertices.
pub fn induced(g: &TwoTypeDigraph, deleted: &BTreeSet<String>) -> (usize, Vec<(usize, usize)>, Vec<bool>) {
    let keep: Vec<usize> = (0..g.vertices().len()).filter(|&i| !deleted.contains(g.id(i))).collect();
    let mut pos = vec![usize::MAX; g.vertices().len()];
    for (p, &i) in keep.iter().enumerate() {
        pos[i] = p;
    }
    let arcs = g
        .structure()
        .arcs()
        .iter()
        .filter(|&&(a, b)| pos[a] != usize::MAX && pos[b] != usize::MAX)
        .map(|&(a, b)| (pos[a], pos[b]))
        .collect();
    let tests = keep.iter().map(|&i| g.vertex(i).role == Role::Test).collect();
    (keep.len(), arcs, tests)
}

/// Test-to-test arcs through a bit vertex, computed from the raw arc list.
pub fn test_bit_test_pairs(g: &TwoTypeDigraph) -> BTreeSet<(String, String)> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut inc: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in g.structure().arcs() {
        if g.vertex(a).role == Role::Test {
            out.entry(b).or_default().push(a);
        } else {
            inc.entry(a).or_default().push(b);
        }
    }
    let mut pairs = BTreeSet::new();
    for (bit, sources) in &out {
        for &s in sources {
            for &t in inc.get(bit).into_iter().flatten() {
                pairs.insert((g.id(s).to_string(), g.id(t).to_string()));
            }
        }
    }
    pairs
}

/// `Infl_i(f) = E_x[Var_{x_i}[f]]` by direct enumeration of the fibers.
pub fn naive_influence(f: &TableFunction, i: usize) -> Rational {
    let k = f.k();
    let n = f.values().len();
    let stride = k.pow(i as u32);
    let mut total = rational::zero();
    let kk = rational::int(k as i64);
    for x in (0..n).filter(|x| (x / stride).is_multiple_of(k)) {
        let fiber: Vec<&Rational> = (0..k).map(|a| f.value(x + a * stride)).collect();
        let mean: Rational = fiber.iter().copied().sum::<Rational>() / &kk;
        let var: Rational = fiber.iter().map(|v| (*v - &mean) * (*v - &mean)).sum::<Rational>() / &kk;
        total += var;
    }
    total / rational::int((n / k) as i64)
}

/// Walsh–Fourier route for k = 2: `Infl^d_i = Σ_{T ∋ i, |T| <= d} f̂(T)²`.
pub fn fourier_degree_influence(f: &TableFunction, i: usize, d: usize) -> Rational {
    assert_eq!(f.k(), 2);
    let n = f.values().len();
    let r = f.r();
    let mut total = rational::zero();
    for t in 0..(1usize << r) {
        if t >> i & 1 == 0 || t.count_ones() as usize > d {
            continue;
        }
        let coef: Rational = (0..n)
            .map(|x| {
                let sign = if (x & t).count_ones() % 2 == 0 { 1 } else { -1 };
                f.value(x) * rational::int(sign)
            })
            .sum::<Rational>()
            / rational::int(n as i64);
        total += &coef * &coef;
    }
    total
}

/// `E[f | x_T]` evaluated at every point, by averaging over the free
/// coordinates.
fn conditional(f: &TableFunction, keep: usize) -> Vec<Rational> {
    let k = f.k();
    let r = f.r();
    let n = f.values().len();
    let digits = |mut x: usize| {
        (0..r)
            .map(|_| {
                let d = x % k;
                x /= k;
                d
            })
            .collect::<Vec<_>>()
    };
    let mut sums: BTreeMap<Vec<usize>, (Rational, usize)> = BTreeMap::new();
    for x in 0..n {
        let key: Vec<usize> =
            digits(x).iter().enumerate().map(|(j, &d)| if keep >> j & 1 == 1 { d } else { k }).collect();
        let e = sums.entry(key).or_insert((rational::zero(), 0));
        e.0 += f.value(x);
        e.1 += 1;
    }
    (0..n)
        .map(|x| {
            let key: Vec<usize> =
                digits(x).iter().enumerate().map(|(j, &d)| if keep >> j & 1 == 1 { d } else { k }).collect();
            let (s, c) = &sums[&key];
            s / rational::int(*c as i64)
        })
        .collect()
}

/// Efron–Stein components `f^{=S}` built pointwise by inclusion-exclusion
/// over conditional expectations; returns `‖f^{=S}‖²` for every mask.
pub fn naive_energies(f: &TableFunction) -> Vec<Rational> {
    let r = f.r();
    let n = f.values().len();
    let conds: Vec<Vec<Rational>> = (0..1usize << r).map(|m| conditional(f, m)).collect();
    (0..1usize << r)
        .map(|s| {
            let mut comp = vec![rational::zero(); n];
            let mut t = s;
            loop {
                let sign = if (s & !t).count_ones() % 2 == 0 { 1 } else { -1 };
                for x in 0..n {
                    comp[x] += &conds[t][x] * rational::int(sign);
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            comp.iter().map(|c| c * c).sum::<Rational>() / rational::int(n as i64)
        })
        .collect()
}

pub fn naive_degree_influence(energies: &[Rational], i: usize, d: usize) -> Rational {
    (0..energies.len()).filter(|&m| m >> i & 1 == 1 && m.count_ones() as usize <= d).map(|m| energies[m].clone()).sum()
}

/// Random DAG on `0..n` with arcs only from smaller to larger index.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                arcs.push((i, j));
            }
        }
    }
    arcs
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum vertex cover of the arcs read as undirected edges, by
/// exhaustive search over bitmasks.
pub fn min_vertex_cover(n: usize, arcs: &[(usize, usize)]) -> usize {
    (0u32..1 << n)
        .filter(|m| arcs.iter().all(|&(a, b)| m >> a & 1 == 1 || m >> b & 1 == 1))
        .map(|m| m.count_ones() as usize)
        .min()
        .unwrap()
}

/// Maximum number of vertices on a path that avoids `del`, by enumerating
/// every path explicitly.
pub fn longest_path_enum(n: usize, arcs: &[(usize, usize)], del: &BTreeSet<usize>) -> usize {
    fn walk(v: usize, arcs: &[(usize, usize)], del: &BTreeSet<usize>) -> usize {
        1 + arcs
            .iter()
            .filter(|&&(a, b)| a == v && !del.contains(&b))
            .map(|&(_, b)| walk(b, arcs, del))
            .max()
            .unwrap_or(0)
    }
    (0..n).filter(|v| !del.contains(v)).map(|v| walk(v, arcs, del)).max().unwrap_or(0)
}
