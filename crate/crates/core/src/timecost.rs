//! Deadline problem (discrete time-cost tradeoff) and the reduction from
//! DAG Vertex Deletion.

use std::collections::BTreeSet;

use crate::digraph::PlainDigraph;
use crate::rational::{self, ratio, Rational};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MenuEntry {
    pub duration: Rational,
    pub cost: Rational,
}

impl MenuEntry {
    pub fn new(duration: Rational, cost: Rational) -> Self {
        Self { duration, cost }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub id: String,
    pub menu: Vec<MenuEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlineInstance {
    activities: Vec<Activity>,
    precedence: Vec<(usize, usize)>,
    deadline: Rational,
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
}

impl DeadlineInstance {
    pub fn new(activities: Vec<Activity>, precedence: Vec<(usize, usize)>, deadline: Rational) -> Result<Self> {
        let bad = |m: String| Err(Error::InconsistentInput(m));
        let mut ids = BTreeSet::new();
        for a in &activities {
            if !ids.insert(a.id.as_str()) {
                return bad(format!("duplicate activity {}", a.id));
            }
            if a.menu.is_empty() {
                return bad(format!("activity {} has an empty menu", a.id));
            }
            for (i, e) in a.menu.iter().enumerate() {
                if !rational::is_nonnegative(&e.duration) || !rational::is_nonnegative(&e.cost) {
                    return bad(format!("activity {} has a negative menu entry", a.id));
                }
                let dominated =
                    a.menu.iter().enumerate().any(|(j, f)| j != i && f.duration <= e.duration && f.cost <= e.cost);
                if dominated {
                    return bad(format!("menu entry {i} of activity {} is dominated", a.id));
                }
            }
        }
        let graph = PlainDigraph::new(activities.len(), precedence.iter().copied())
            .map_err(|e| Error::InconsistentInput(format!("precedence: {e}")))?;
        let order = match graph.topological_sort().order() {
            Some(o) => o,
            None => return bad("precedence relation has a cycle".into()),
        };
        let preds = (0..activities.len()).map(|v| graph.predecessors(v).to_vec()).collect();
        Ok(Self { activities, precedence: graph.arcs().to_vec(), deadline, order, preds })
    }

    pub fn activities(&self) -> &[Activity] {
        &self.activities
    }

    pub fn precedence(&self) -> &[(usize, usize)] {
        &self.precedence
    }

    pub fn deadline(&self) -> &Rational {
        &self.deadline
    }

    pub fn with_deadline(&self, deadline: Rational) -> Self {
        Self { deadline, ..self.clone() }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.activities.iter().position(|a| a.id == id)
    }

    pub fn cost(&self, x: &Realization) -> Rational {
        x.choice.iter().enumerate().map(|(i, &c)| self.activities[i].menu[c].cost.clone()).sum()
    }

    fn check(&self, x: &Realization) -> Result<()> {
        if x.choice.len() != self.activities.len() {
            return Err(Error::InconsistentInput(format!(
                "realization covers {} of {} activities",
                x.choice.len(),
                self.activities.len()
            )));
        }
        for (i, &c) in x.choice.iter().enumerate() {
            if c >= self.activities[i].menu.len() {
                return Err(Error::IndexOutOfRange { index: c, limit: self.activities[i].menu.len() });
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, x: &Realization) -> Result<bool> {
        Ok(earliest_schedule(self, x)?.makespan <= self.deadline)
    }
}

/// One menu index per activity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Realization {
    pub choice: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub start: Vec<Rational>,
    pub makespan: Rational,
}

/// Starts every activity as early as the precedence constraints allow.
pub fn earliest_schedule(inst: &DeadlineInstance, x: &Realization) -> Result<Schedule> {
    inst.check(x)?;
    let dur = |i: usize| &inst.activities[i].menu[x.choice[i]].duration;
    let mut start = vec![rational::zero(); inst.activities.len()];
    let mut makespan = rational::zero();
    for &j in &inst.order {
        let s = inst.preds[j].iter().map(|&i| &start[i] + dur(i)).max().unwrap_or_else(rational::zero);
        let end = &s + dur(j);
        if end > makespan {
            makespan = end;
        }
        start[j] = s.max(rational::zero());
    }
    Ok(Schedule { start, makespan })
}

pub fn default_gamma(k: usize) -> Rational {
    ratio(1, 20 * (k as i64 - 1))
}

/// Activities `l_i, m_i, r_i` for every vertex `i` (indices `3i .. 3i+2`)
/// followed by `a_i_j` for every arc in sorted order. Deadline `n`.
pub fn dvd_to_deadline(g: &PlainDigraph, k: usize, gamma: &Rational) -> Result<DeadlineInstance> {
    if k < 2 {
        return Err(Error::ParamError("k must be at least 2".into()));
    }
    let slack = ratio(1, 10 * (k as i64 - 1));
    if *gamma <= rational::zero() || *gamma >= slack {
        return Err(Error::BadGamma(format!(
            "gamma {} must lie strictly between 0 and {}",
            rational::to_pq(gamma),
            rational::to_pq(&slack)
        )));
    }
    if let Some(&(i, j)) = g.arcs().iter().find(|&&(i, j)| i > j) {
        return Err(Error::NotTopologicallyOrdered(i, j));
    }
    let n = g.n() as i64;
    let fixed = |id: String, d: Rational| Activity { id, menu: vec![MenuEntry::new(d, rational::zero())] };
    let mut activities = Vec::new();
    let mut precedence = Vec::new();
    for i in 0..g.n() {
        let ii = i as i64;
        activities.push(fixed(format!("l_{i}"), rational::int(ii)));
        activities.push(Activity {
            id: format!("m_{i}"),
            menu: vec![
                MenuEntry::new(ratio(9, 10), rational::zero()),
                MenuEntry::new(rational::zero(), rational::one()),
            ],
        });
        activities.push(fixed(format!("r_{i}"), rational::int(n - 1 - ii) + gamma));
        precedence.push((3 * i, 3 * i + 1));
        precedence.push((3 * i + 1, 3 * i + 2));
    }
    for (e, &(i, j)) in g.arcs().iter().enumerate() {
        let d = rational::int(j as i64 - i as i64) - ratio(9, 10) + &slack;
        activities.push(fixed(format!("a_{i}_{j}"), d));
        let a = 3 * g.n() + e;
        precedence.push((3 * i + 1, a));
        precedence.push((a, 3 * j + 1));
    }
    DeadlineInstance::new(activities, precedence, rational::int(n))
}

/// Checks that `inst` is laid out exactly as `dvd_to_deadline` lays out a
/// graph on `n` vertices with the given arcs (when known).
fn check_layout(inst: &DeadlineInstance, n: usize, arcs: Option<&[(usize, usize)]>) -> Result<()> {
    let foreign = |m: String| Err(Error::ForeignInstance(m));
    let acts = &inst.activities;
    if acts.len() < 3 * n {
        return foreign("too few activities".into());
    }
    for i in 0..n {
        let names = [format!("l_{i}"), format!("m_{i}"), format!("r_{i}")];
        for (o, name) in names.iter().enumerate() {
            if acts[3 * i + o].id != *name {
                return foreign(format!("activity {} should be {name}", 3 * i + o));
            }
        }
        if acts[3 * i + 1].menu.len() != 2 {
            return foreign(format!("m_{i} does not have a two-entry menu"));
        }
    }
    let rest = &acts[3 * n..];
    if rest.iter().any(|a| !a.id.starts_with("a_")) {
        return foreign("unexpected activity after the vertex activities".into());
    }
    if let Some(arcs) = arcs {
        let ids: Vec<String> = arcs.iter().map(|(i, j)| format!("a_{i}_{j}")).collect();
        if rest.len() != ids.len() || rest.iter().zip(&ids).any(|(a, id)| a.id != *id) {
            return foreign("arc activities do not match the graph".into());
        }
    }
    Ok(())
}

fn vertex_count(inst: &DeadlineInstance) -> usize {
    inst.activities.iter().filter(|a| a.id.starts_with("m_")).count()
}

/// Pays for `m_i` exactly when `i` is deleted.
pub fn realization_from_deletion(
    inst: &DeadlineInstance,
    g: &PlainDigraph,
    del: &BTreeSet<usize>,
) -> Result<Realization> {
    check_layout(inst, g.n(), Some(g.arcs()))?;
    if let Some(&v) = del.iter().find(|&&v| v >= g.n()) {
        return Err(Error::IndexOutOfRange { index: v, limit: g.n() });
    }
    let mut choice = vec![0; inst.activities.len()];
    for &i in del {
        choice[3 * i + 1] = paid_entry(inst, i);
    }
    Ok(Realization { choice })
}

fn paid_entry(inst: &DeadlineInstance, i: usize) -> usize {
    let menu = &inst.activities[3 * i + 1].menu;
    if menu[0].cost > menu[1].cost {
        0
    } else {
        1
    }
}

/// The vertices whose `m_i` took the paid entry.
pub fn deletion_from_realization(inst: &DeadlineInstance, x: &Realization) -> Result<BTreeSet<usize>> {
    let n = vertex_count(inst);
    check_layout(inst, n, None)?;
    inst.check(x)?;
    Ok((0..n).filter(|&i| x.choice[3 * i + 1] == paid_entry(inst, i)).collect())
}

/// Cheapest feasible realization; ties go to the lexicographically
/// smallest choice vector.
pub fn brute_force_deadline(inst: &DeadlineInstance, budget: u64) -> Result<(Rational, Realization)> {
    let total =
        inst.activities.iter().try_fold(1u128, |acc, a| acc.checked_mul(a.menu.len() as u128)).unwrap_or(u128::MAX);
    Error::check_budget(total, budget)?;
    let free: Vec<usize> = (0..inst.activities.len()).filter(|&i| inst.activities[i].menu.len() > 1).collect();
    let radix: Vec<usize> = free.iter().map(|&i| inst.activities[i].menu.len()).collect();
    let mut digits = vec![0usize; free.len()];
    let mut best: Option<(Rational, Realization)> = None;
    loop {
        let mut choice = vec![0usize; inst.activities.len()];
        for (d, &i) in digits.iter().zip(&free) {
            choice[i] = *d;
        }
        let x = Realization { choice };
        if inst.is_feasible(&x)? {
            let c = inst.cost(&x);
            let better = match &best {
                None => true,
                Some((bc, bx)) => c < *bc || (c == *bc && x < *bx),
            };
            if better {
                best = Some((c, x));
            }
        }
        if !step(&mut digits, &radix) {
            break;
        }
    }
    best.ok_or(Error::Infeasible)
}

fn step(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radix) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}
