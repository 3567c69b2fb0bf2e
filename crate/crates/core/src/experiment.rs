//! Batch experiments producing tabular, seed-deterministic reports.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boolfn::{make_dictator, subcube_zero_probability, Cube, ProbeMode, TableFunction};
use crate::digraph::PlainDigraph;
use crate::rational::{self, Rational};
use crate::solvers::{brute_force_dvd, SolverBudget};
use crate::timecost::{brute_force_deadline, default_gamma, dvd_to_deadline};
use crate::{Error, Result};

/// Report written by every experiment. `timing_ms` is the only field that
/// may differ between identical runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub timing_ms: u64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Copy without the timing field, for determinism checks.
    pub fn without_timing(&self) -> Self {
        Self { timing_ms: 0, ..self.clone() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn pq_and_decimal(r: &Rational) -> [String; 2] {
    [rational::to_pq(r), rational::to_decimal(r)]
}

/// Boolean functions accepted by `subcube-stats`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FnSpec {
    Dictator(usize),
    Majority,
    Random(u64),
}

impl FromStr for FnSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParamError(format!("unknown function {s:?}; use dictator:<i>, majority or random:<seed>"));
        match s.split_once(':') {
            None if s == "majority" => Ok(FnSpec::Majority),
            Some(("dictator", i)) => i.parse().map(FnSpec::Dictator).map_err(|_| bad()),
            Some(("random", seed)) => seed.parse().map(FnSpec::Random).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for FnSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FnSpec::Dictator(i) => write!(f, "dictator:{i}"),
            FnSpec::Majority => write!(f, "majority"),
            FnSpec::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl FnSpec {
    pub fn build(&self, k: usize, r: usize) -> Result<TableFunction> {
        let cube = Cube::new(k, r)?;
        match *self {
            FnSpec::Dictator(i) => make_dictator(k, r, i),
            FnSpec::Majority => Ok(TableFunction::majority(cube)),
            FnSpec::Random(seed) => Ok(TableFunction::random_indicator(cube, seed)),
        }
    }
}

/// Exact (or sampled) `Pr[f ≡ 0 on C_{x,S}]` for the dictator of
/// coordinate 0 and for `f`, next to the dictator's closed form.
pub fn subcube_stats(
    k: usize,
    r: usize,
    s_len: usize,
    f: FnSpec,
    mode: ProbeMode,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut specs = vec![FnSpec::Dictator(0)];
    if f != FnSpec::Dictator(0) {
        specs.push(f);
    }
    let rr = r as u128;
    let closed = crate::boolfn::frac((rr - 1).pow(s_len as u32), rr.pow(s_len as u32) * k as u128);
    let mut rows = Vec::new();
    for spec in specs {
        let table = spec.build(k, r)?;
        let stat = subcube_zero_probability(&table, s_len, 0, mode)?;
        let [pq, dec] = pq_and_decimal(&stat.value);
        let closed_form = match spec {
            FnSpec::Dictator(_) => rational::to_pq(&closed),
            _ => String::new(),
        };
        rows.push(vec![
            spec.to_string(),
            pq,
            dec,
            stat.hits.to_string(),
            stat.total.to_string(),
            stat.exact.to_string(),
            closed_form,
            rational::to_pq(&table.mean()),
        ]);
    }
    let mut params = BTreeMap::new();
    params.insert("k".into(), k.to_string());
    params.insert("R".into(), r.to_string());
    params.insert("s_len".into(), s_len.to_string());
    params.insert("fn".into(), f.to_string());
    params.insert(
        "mode".into(),
        match mode {
            ProbeMode::Exact => "exact".into(),
            ProbeMode::Sampled { trials, .. } => format!("sampled:{trials}"),
        },
    );
    Ok(ExperimentReport {
        command: "experiment subcube-stats".into(),
        params,
        seed,
        columns: ["function", "probability", "decimal", "hits", "total", "exact", "closed_form", "mean"]
            .map(String::from)
            .to_vec(),
        rows,
        timing_ms: start.elapsed().as_millis() as u64,
    })
}

/// Every DAG on `0..n` whose arcs all go from smaller to larger index, in
/// order of the arc bitmask over pairs `(i, j)`, `i < j`, sorted.
pub fn ordered_dags(n: usize) -> impl Iterator<Item = PlainDigraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        let arcs = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &p)| p);
        PlainDigraph::new(n, arcs).expect("ordered pairs are valid arcs")
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivCase {
    pub graph: PlainDigraph,
    pub dvd_opt: usize,
    pub deadline_opt: Rational,
    /// The optimal realization maps back to an optimal deletion set.
    pub roundtrip: BTreeSet<usize>,
}

/// Brute-force DVD optimum and brute-force Deadline optimum of the reduced
/// instance for one graph.
pub fn equivalence_case(g: &PlainDigraph, k: usize, gamma: &Rational, budget: u64) -> Result<EquivCase> {
    let sb = SolverBudget { max_subsets: budget, ..SolverBudget::default() };
    let dvd = brute_force_dvd(g, k, sb)?;
    let inst = dvd_to_deadline(g, k, gamma)?;
    let (cost, x) = brute_force_deadline(&inst, budget)?;
    let roundtrip = crate::timecost::deletion_from_realization(&inst, &x)?;
    Ok(EquivCase { graph: g.clone(), dvd_opt: dvd.len(), deadline_opt: cost, roundtrip })
}

/// Compares the two optima over all ordered DAGs with `1..=max_n` vertices.
pub fn dvd_deadline_equiv(max_n: usize, k: usize, gamma: Option<Rational>, budget: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    if max_n > 6 {
        return Err(Error::budget(1u128 << (max_n * (max_n - 1) / 2), 1 << 15));
    }
    let gamma = gamma.unwrap_or_else(|| default_gamma(k));
    let mut rows = Vec::new();
    let (mut all_graphs, mut all_equal) = (0u64, 0u64);
    for n in 1..=max_n {
        let (mut graphs, mut equal, mut max_opt) = (0u64, 0u64, 0usize);
        for g in ordered_dags(n) {
            let case = equivalence_case(&g, k, &gamma, budget)?;
            graphs += 1;
            equal += (rational::int(case.dvd_opt as i64) == case.deadline_opt) as u64;
            max_opt = max_opt.max(case.dvd_opt);
        }
        rows.push(vec![
            n.to_string(),
            graphs.to_string(),
            equal.to_string(),
            (graphs - equal).to_string(),
            max_opt.to_string(),
            (graphs == equal).to_string(),
        ]);
        all_graphs += graphs;
        all_equal += equal;
    }
    rows.push(vec![
        "all".into(),
        all_graphs.to_string(),
        all_equal.to_string(),
        (all_graphs - all_equal).to_string(),
        String::new(),
        (all_graphs == all_equal).to_string(),
    ]);
    let mut params = BTreeMap::new();
    params.insert("max_n".into(), max_n.to_string());
    params.insert("k".into(), k.to_string());
    params.insert("gamma".into(), rational::to_pq(&gamma));
    Ok(ExperimentReport {
        command: "experiment dvd-deadline-equiv".into(),
        params,
        seed: 0,
        columns: ["n", "graphs", "equal", "mismatched", "max_opt", "all_equal"].map(String::from).to_vec(),
        rows,
        timing_ms: start.elapsed().as_millis() as u64,
    })
}
