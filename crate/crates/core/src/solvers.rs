//! Exact FVS and DVD solvers for small graphs, and the disjoint-path
//! k-approximation for DVD.

use std::collections::BTreeSet;

use crate::digraph::PlainDigraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverBudget {
    pub max_subsets: u64,
    pub max_n: usize,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self { max_subsets: 1 << 22, max_n: 22 }
    }
}

impl SolverBudget {
    fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n || n >= 64 {
            return Err(Error::budget(1u128 << n.min(127), self.max_n as u64));
        }
        Error::check_budget(1u128 << n, self.max_subsets)
    }
}

/// Calls `visit` on every subset of `0..n`, smallest first and
/// lexicographically within a size, until it returns true.
fn first_subset(n: usize, mut visit: impl FnMut(&[usize]) -> bool) -> Option<Vec<usize>> {
    for size in 0..=n {
        let mut c: Vec<usize> = (0..size).collect();
        loop {
            if visit(&c) {
                return Some(c);
            }
            // Next combination in lexicographic order.
            let Some(i) = (0..size).rev().find(|&i| c[i] < n - size + i) else { break };
            c[i] += 1;
            for j in i + 1..size {
                c[j] = c[j - 1] + 1;
            }
        }
    }
    None
}

fn alive_without(n: usize, del: &[usize]) -> Vec<bool> {
    let mut alive = vec![true; n];
    for &v in del {
        alive[v] = false;
    }
    alive
}

/// Minimum feedback vertex set.
pub fn brute_force_fvs(g: &PlainDigraph, budget: SolverBudget) -> Result<BTreeSet<usize>> {
    budget.check(g.n())?;
    let n = g.n();
    let found = first_subset(n, |del| g.topological_sort_alive(Some(&alive_without(n, del))).is_acyclic());
    Ok(found.expect("deleting every vertex leaves an acyclic graph").into_iter().collect())
}

/// True when no path with `k` vertices survives the deletion.
pub fn kills_k_paths(g: &PlainDigraph, k: usize, del: &BTreeSet<usize>) -> Result<bool> {
    let alive: Vec<bool> = (0..g.n()).map(|v| !del.contains(&v)).collect();
    Ok(g.longest_weighted_path(None, Some(&alive))?.0 < k)
}

fn check_dvd_input(g: &PlainDigraph, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::ParamError("k must be at least 2".into()));
    }
    g.longest_path_vertices().map(|_| ())
}

/// Minimum set whose deletion leaves no path on `k` vertices.
pub fn brute_force_dvd(g: &PlainDigraph, k: usize, budget: SolverBudget) -> Result<BTreeSet<usize>> {
    check_dvd_input(g, k)?;
    budget.check(g.n())?;
    let n = g.n();
    let found = first_subset(n, |del| {
        let alive = alive_without(n, del);
        g.longest_weighted_path(None, Some(&alive)).map(|p| p.0 < k).unwrap_or(false)
    });
    Ok(found.expect("deleting every vertex kills every path").into_iter().collect())
}

/// Deletes the first `k` vertices of the longest surviving path until no
/// path on `k` vertices is left. The deleted paths are vertex-disjoint, so
/// the result is at most `k` times the optimum.
pub fn dvd_k_approx(g: &PlainDigraph, k: usize) -> Result<BTreeSet<usize>> {
    check_dvd_input(g, k)?;
    let mut alive = vec![true; g.n()];
    let mut del = BTreeSet::new();
    loop {
        let (len, path) = g.longest_weighted_path(None, Some(&alive))?;
        if len < k {
            return Ok(del);
        }
        for &v in &path[..k] {
            alive[v] = false;
            del.insert(v);
        }
    }
}
