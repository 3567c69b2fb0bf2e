//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use hforge_core::boolfn::{
    degree_influence, influence, make_dictator, subcube_points, subcube_zero_probability, Cube, EfronStein, ProbeMode,
    Subcube, TableFunction,
};
use hforge_core::digraph::PlainDigraph;
use hforge_core::experiment::{dvd_deadline_equiv, ordered_dags, subcube_stats, FnSpec};
use hforge_core::formats;
use hforge_core::gadget::{
    build_dvd_gadget, build_fvs_gadget, decode_topological_split, dictator_partition, random_deletion_probe,
    verify_completeness, CompletenessMode, GadgetParams,
};
use hforge_core::rational::{self, int, Rational};
use hforge_core::reduction::{
    decode_labeling, partition_from_labeling, ug_to_dvd, ug_to_fvs, DecoderParams, ReductionParams,
};
use hforge_core::solvers::{brute_force_dvd, dvd_k_approx, kills_k_paths, SolverBudget};
use hforge_core::timecost::{brute_force_deadline, default_gamma, dvd_to_deadline, realization_from_deletion};
use hforge_core::unique_games::{generate, GenKind, GenParams};

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("took {t:?}, limit {limit:?}"))
}

fn c1_fvs_completeness() -> Outcome {
    let start = Instant::now();
    let g = build_fvs_gadget(&GadgetParams::fvs(2, 3, 1)).map_err(|e| e.to_string())?;
    for s in 0..3 {
        let w = dictator_partition(&g, s).map_err(|e| e.to_string())?;
        ensure(w.prime.len() == 8 && w.class_sizes() == vec![8, 8], || {
            format!("s={s}: sizes {} {:?}", w.prime.len(), w.class_sizes())
        })?;
        for j in 0..2 {
            let rep = verify_completeness(&g, &w, j, CompletenessMode::Fvs).map_err(|e| e.to_string())?;
            ensure(rep.ok && rep.collapsed_arcs == 0, || format!("s={s} j={j}: {}", rep.detail))?;
            let del: BTreeSet<String> = w.prime.union(&w.classes[j]).cloned().collect();
            let (n, arcs, _) = induced(&g, &del);
            ensure(!dfs_has_cycle(n, &arcs), || format!("s={s} j={j}: reference DFS finds a cycle"))?;
            let rest = g.delete_vertices(&del).unwrap();
            ensure(test_bit_test_pairs(&rest).is_empty(), || {
                format!("s={s} j={j}: reference finds a test-bit-test path")
            })?;
        }
    }
    within(start, Duration::from_secs(1))?;
    Ok("3 dictators x 2 classes: |T'|=8, |T_j|=8, collapsed remainder arcless".into())
}

fn c2_fvs_cycles() -> Outcome {
    let g = build_fvs_gadget(&GadgetParams::fvs(2, 3, 1)).map_err(|e| e.to_string())?;
    let cube = Cube::new(2, 3).unwrap();
    let collapsed = g.collapse_bit_vertices();
    let reference = test_bit_test_pairs(&g);
    let pos = |id: &str| collapsed.tests.iter().position(|&t| g.id(t) == id).unwrap();
    let mut pairs = 0;
    for x in 0..8 {
        for s in 0..3 {
            let a = format!("t:{}:{s}", cube.format(x));
            let b = format!("t:{}:{s}", cube.format(cube.shift(x)));
            let (pa, pb) = (pos(&a), pos(&b));
            ensure(collapsed.graph.has_arc(pa, pb) && collapsed.graph.has_arc(pb, pa), || {
                format!("{a} <-> {b} missing")
            })?;
            ensure(reference.contains(&(a.clone(), b.clone())) && reference.contains(&(b.clone(), a.clone())), || {
                format!("reference disagrees on {a} <-> {b}")
            })?;
            pairs += 1;
        }
    }
    Ok(format!("2-cycle t_(x,S) <-> t_(x+1,S) present for all {pairs} pairs"))
}

fn c3_dvd_completeness() -> Outcome {
    let start = Instant::now();
    let g = build_dvd_gadget(&GadgetParams::dvd(3, 2, 1, 3)).map_err(|e| e.to_string())?;
    let mut worst = 0;
    for s in 0..2 {
        let w = dictator_partition(&g, s).map_err(|e| e.to_string())?;
        for j in 0..3 {
            let rep = verify_completeness(&g, &w, j, CompletenessMode::Dvd { k: 3 }).map_err(|e| e.to_string())?;
            let len = rep.longest_test_path.unwrap_or(usize::MAX);
            ensure(rep.ok && len < 3, || format!("s={s} j={j}: {}", rep.detail))?;
            let del: BTreeSet<String> = w.prime.union(&w.classes[j]).cloned().collect();
            let (n, arcs, tests) = induced(&g, &del);
            let reference = dfs_longest(n, &arcs, &tests);
            ensure(reference == len, || format!("s={s} j={j}: reference longest path {reference}, library {len}"))?;
            worst = worst.max(len);
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("2 dictators x 3 classes: longest surviving test path {worst} < 3"))
}

fn corpus() -> Vec<TableFunction> {
    let mut out = Vec::new();
    for (k, r) in [(2, 4), (3, 3)] {
        let cube = Cube::new(k, r).unwrap();
        out.extend((0..100).map(|seed| TableFunction::random_indicator(cube, seed)));
    }
    out
}

fn c4_degree_sum() -> Outcome {
    let mut checked = 0;
    for f in corpus() {
        let es = EfronStein::new(&f).map_err(|e| e.to_string())?;
        for d in 1..=f.r() {
            let sum: Rational = es.degree_influences(d).into_iter().sum();
            ensure(sum <= int(d as i64), || format!("sum {} > {d}", rational::to_pq(&sum)))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (function, d) pairs: sum of degree-d influences <= d"))
}

fn c5_full_degree() -> Outcome {
    let mut checked = 0;
    for f in corpus() {
        for i in 0..f.r() {
            let a = degree_influence(&f, i, f.r()).map_err(|e| e.to_string())?;
            let b = influence(&f, i).map_err(|e| e.to_string())?;
            let c = naive_influence(&f, i);
            ensure(a == b && b == c, || {
                format!("coordinate {i}: {} vs {} vs {}", rational::to_pq(&a), rational::to_pq(&b), rational::to_pq(&c))
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} coordinates: degree-R influence equals influence"))
}

/// `Pr[f ≡ 0 on C_{x,S}]` by visiting every `(x, S)` pair.
fn enumerate_zero_probability(f: &TableFunction, s_len: usize) -> Rational {
    let cube = f.cube();
    let r = cube.r();
    let seqs = r.pow(s_len as u32);
    let mut hits = 0i64;
    for x in 0..cube.size() {
        for mut n in 0..seqs {
            let seq: Vec<usize> = (0..s_len)
                .map(|_| {
                    let d = n % r;
                    n /= r;
                    d
                })
                .collect();
            if subcube_points(&cube, &Subcube::new(x, seq)).iter().all(|&z| *f.value(z) == int(0)) {
                hits += 1;
            }
        }
    }
    frac(hits, (cube.size() * seqs) as i64)
}

fn c6_subcube_statistic() -> Outcome {
    let start = Instant::now();
    let dictator = make_dictator(2, 5, 0).map_err(|e| e.to_string())?;
    let exact = subcube_zero_probability(&dictator, 2, 0, ProbeMode::Exact).map_err(|e| e.to_string())?.value;
    let closed = frac(4 * 4, 5 * 5) / int(2);
    let enumerated = enumerate_zero_probability(&dictator, 2);
    ensure(exact == closed && enumerated == closed && closed == frac(8, 25), || {
        format!("dictator {} / enumeration {}", rational::to_pq(&exact), rational::to_pq(&enumerated))
    })?;
    let majority = TableFunction::majority(Cube::new(2, 5).unwrap());
    let maj = subcube_zero_probability(&majority, 2, 0, ProbeMode::Exact).map_err(|e| e.to_string())?.value;
    ensure(maj == enumerate_zero_probability(&majority, 2), || "majority enumeration disagrees".into())?;
    ensure(maj < exact, || format!("majority {} is not below 8/25", rational::to_pq(&maj)))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("dictator 8/25, majority {} ({})", rational::to_pq(&maj), rational::to_decimal(&maj)))
}

fn c7_split_decoder() -> Outcome {
    let g = build_fvs_gadget(&GadgetParams::fvs(2, 3, 1)).map_err(|e| e.to_string())?;
    for s in 0..3 {
        let w = dictator_partition(&g, s).map_err(|e| e.to_string())?;
        let dec = decode_topological_split(&g, &w.classes[1], None).map_err(|e| e.to_string())?;
        ensure(dec.top == (s, frac(1, 4)), || format!("s={s}: top ({}, {})", dec.top.0, rational::to_pq(&dec.top.1)))?;
        let expected = make_dictator(2, 3, s).unwrap().complement();
        ensure(dec.f_a == expected, || format!("s={s}: f_A is not 1 - x_s"))?;
    }
    Ok("top coordinate = s with degree-R influence 1/4 for s = 0, 1, 2".into())
}

fn ug_params() -> GenParams {
    GenParams { nv: 2, nw: 2, deg: 2, r: 2 }
}

fn c8_ug_completeness() -> Outcome {
    let start = Instant::now();
    for seed in 0..20 {
        let (inst, planted) = generate(GenKind::Satisfiable, ug_params(), seed).map_err(|e| e.to_string())?;
        let rho = planted.unwrap();
        let g = ug_to_fvs(&inst, &ReductionParams::fvs(2, 1, 1)).map_err(|e| e.to_string())?;
        let (w, rep) = partition_from_labeling(&inst, &g, &rho).map_err(|e| e.to_string())?;
        ensure(rep.ok, || format!("seed {seed}: FVS partition fails"))?;
        for j in 0..2 {
            let del: BTreeSet<String> = w.prime.union(&w.classes[j]).cloned().collect();
            let (n, arcs, _) = induced(&g, &del);
            ensure(!dfs_has_cycle(n, &arcs), || format!("seed {seed} j={j}: reference DFS finds a cycle"))?;
        }
        let h = ug_to_dvd(&inst, &ReductionParams::dvd(2, 1, 1, 2)).map_err(|e| e.to_string())?;
        let (wd, repd) = partition_from_labeling(&inst, &h, &rho).map_err(|e| e.to_string())?;
        ensure(repd.ok, || format!("seed {seed}: DVD partition fails"))?;
        for j in 0..2 {
            let del: BTreeSet<String> = wd.prime.union(&wd.classes[j]).cloned().collect();
            let (n, arcs, tests) = induced(&h, &del);
            let len = dfs_longest(n, &arcs, &tests);
            ensure(len < 2, || format!("seed {seed} j={j}: reference path with {len} tests"))?;
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok("20 seeds: FVS remainder acyclic and DVD remainder has no 2-test path, both classes".into())
}

fn c9_ug_decoder() -> Outcome {
    let dp = |seed| DecoderParams { d: 2, eta: frac(1, 4), trials: 8, seed };
    for seed in 0..20 {
        let (inst, planted) = generate(GenKind::Satisfiable, ug_params(), seed).map_err(|e| e.to_string())?;
        let g = ug_to_fvs(&inst, &ReductionParams::fvs(2, 1, 1)).map_err(|e| e.to_string())?;
        let (w, _) = partition_from_labeling(&inst, &g, planted.as_ref().unwrap()).map_err(|e| e.to_string())?;
        for j in 0..2 {
            let dec = decode_labeling(&inst, &g, &w.classes[j], &dp(seed)).map_err(|e| e.to_string())?;
            ensure(dec.draw.val == int(1), || {
                format!("seed {seed} class {j}: val {}", rational::to_pq(&dec.draw.val))
            })?;
            ensure(dec.list_bound_holds, || format!("seed {seed} class {j}: |L[w]| exceeds d/eta"))?;
            // d / eta = 8
            ensure(dec.lists.values().all(|l| l.len() <= 8), || {
                format!("seed {seed} class {j}: list bound recomputation fails")
            })?;
            let again = hforge_core::unique_games::evaluate_labeling(&inst, &dec.draw.labeling).unwrap();
            ensure(again == int(1), || {
                format!("seed {seed}: returned labeling re-evaluates to {}", rational::to_pq(&again))
            })?;
        }
    }
    Ok("20 seeds x 2 classes: decoded val = 1 and |L[w]| <= d/eta".into())
}

fn c10_deadline_equivalence() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for k in [2usize, 3] {
        let gamma = default_gamma(k);
        for g in ordered_dags(5) {
            let dvd = brute_force_dvd(&g, k, SolverBudget::default()).map_err(|e| e.to_string())?;
            let inst = dvd_to_deadline(&g, k, &gamma).map_err(|e| e.to_string())?;
            let (cost, _) = brute_force_deadline(&inst, 1 << 20).map_err(|e| e.to_string())?;
            ensure(cost == int(dvd.len() as i64), || {
                format!("k={k} arcs {:?}: deadline {} vs dvd {}", g.arcs(), rational::to_pq(&cost), dvd.len())
            })?;
            cases += 1;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{cases} cases: Deadline optimum = DVD optimum ({:?})", start.elapsed()))
}

fn c11_feasibility() -> Outcome {
    let k = 2;
    let mut checked = 0;
    for g in ordered_dags(4) {
        let inst = dvd_to_deadline(&g, k, &default_gamma(k)).map_err(|e| e.to_string())?;
        for mask in 0u32..16 {
            let del: BTreeSet<usize> = (0..4).filter(|v| mask >> v & 1 == 1).collect();
            let x = realization_from_deletion(&inst, &g, &del).map_err(|e| e.to_string())?;
            let feasible = inst.is_feasible(&x).map_err(|e| e.to_string())?;
            let kills = longest_path_enum(4, g.arcs(), &del) < k;
            ensure(feasible == kills, || {
                format!("arcs {:?} del {del:?}: feasible {feasible}, kills {kills}", g.arcs())
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (DAG, subset) pairs: feasible iff every 2-vertex path is hit"))
}

fn c12_k_approx() -> Outcome {
    let mut rng = rng(12);
    // Largest approx/opt ratio seen, as (approx, opt, k).
    let mut worst = (0usize, 1usize, 0usize);
    for i in 0..500 {
        let n = 2 + i % 13;
        let k = 2 + i % 3;
        let arcs = random_dag(&mut rng, n, 0.35);
        let g = PlainDigraph::new(n, arcs.iter().copied()).unwrap();
        let approx = dvd_k_approx(&g, k).map_err(|e| e.to_string())?;
        let opt = brute_force_dvd(&g, k, SolverBudget::default()).map_err(|e| e.to_string())?;
        ensure(longest_path_enum(n, &arcs, &approx) < k, || format!("instance {i}: approximation leaves a {k}-path"))?;
        ensure(kills_k_paths(&g, k, &opt).unwrap(), || format!("instance {i}: optimum is invalid"))?;
        ensure(approx.len() <= k * opt.len(), || format!("instance {i}: {} > {k} * {}", approx.len(), opt.len()))?;
        if !opt.is_empty() && approx.len() * worst.1 > worst.0 * opt.len() {
            worst = (approx.len(), opt.len(), k);
        }
    }
    Ok(format!(
        "500 DAGs (n <= 14, k in 2..=4): valid and within k * OPT; worst ratio {}/{} at k={}",
        worst.0, worst.1, worst.2
    ))
}

fn c13_determinism() -> Outcome {
    let mut checked = 0;
    let mut same = |a: String, b: String, what: &str| -> Result<(), String> {
        checked += 1;
        ensure(a == b, || format!("{what} differs between runs"))
    };
    for seed in [0u64, 7, 123] {
        for kind in [GenKind::Satisfiable, GenKind::Random] {
            let run = || {
                let (inst, planted) = generate(kind, GenParams { nv: 3, nw: 3, deg: 2, r: 3 }, seed).unwrap();
                formats::ug_to_json(&inst, planted.as_ref())
            };
            same(run(), run(), "unique games instance")?;
        }
        let cube = Cube::new(3, 3).unwrap();
        let f = || format!("{:?}", TableFunction::random_indicator(cube, seed).values());
        same(f(), f(), "random function")?;
        let probe = || {
            let rep =
                subcube_stats(2, 4, 2, FnSpec::Random(seed), ProbeMode::Sampled { seed, trials: 500 }, seed).unwrap();
            rep.without_timing().to_json()
        };
        same(probe(), probe(), "subcube-stats report")?;
        let g = build_fvs_gadget(&GadgetParams::fvs(2, 3, 1)).unwrap();
        same(
            random_deletion_probe(&g, 50, seed).to_string(),
            random_deletion_probe(&g, 50, seed).to_string(),
            "deletion probe",
        )?;
        let decode = || {
            let (inst, planted) = generate(GenKind::Satisfiable, ug_params(), seed).unwrap();
            let g = ug_to_fvs(&inst, &ReductionParams::fvs(2, 1, 1)).unwrap();
            let (w, _) = partition_from_labeling(&inst, &g, planted.as_ref().unwrap()).unwrap();
            let dec =
                decode_labeling(&inst, &g, &w.classes[0], &DecoderParams { d: 2, eta: frac(1, 4), trials: 5, seed })
                    .unwrap();
            format!("{:?} {}", dec.draw.labeling, formats::two_type_to_json(&g))
        };
        same(decode(), decode(), "decoded labeling and reduced graph")?;
    }
    let equiv = || dvd_deadline_equiv(3, 2, None, 1 << 20).unwrap().without_timing().to_json();
    same(equiv(), equiv(), "dvd-deadline-equiv report")?;
    let gadget = || formats::two_type_to_json(&build_dvd_gadget(&GadgetParams::dvd(2, 2, 1, 2)).unwrap());
    same(gadget(), gadget(), "dvd gadget")?;
    Ok(format!("{checked} re-runs byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("FVS gadget completeness", c1_fvs_completeness),
        ("FVS gadget 2-cycles", c2_fvs_cycles),
        ("DVD gadget completeness", c3_dvd_completeness),
        ("degree-d influence sum <= d", c4_degree_sum),
        ("degree-R influence = influence", c5_full_degree),
        ("dictator subcube statistic", c6_subcube_statistic),
        ("topological split decoder", c7_split_decoder),
        ("UG reduction completeness", c8_ug_completeness),
        ("UG decoder recovery", c9_ug_decoder),
        ("DVD/Deadline equivalence", c10_deadline_equivalence),
        ("feasibility correspondence", c11_feasibility),
        ("k-approximation guarantee", c12_k_approx),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{ms} ms]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
