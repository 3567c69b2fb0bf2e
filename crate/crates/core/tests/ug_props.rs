mod common;

use hforge_core::rational::{self, int, ratio};
use hforge_core::unique_games::{
    brute_force_opt, evaluate_labeling, generate, GenKind, GenParams, Labeling, UgEdge, UniqueGamesInstance,
};
use rand::Rng;

fn random_labeling(inst: &UniqueGamesInstance, rng: &mut impl Rng) -> Labeling {
    inst.v_ids().iter().chain(inst.w_ids()).map(|id| (id.clone(), rng.gen_range(0..inst.r()))).collect()
}

#[test]
fn planted_labelings_satisfy_everything() {
    for seed in 0..100 {
        let p = GenParams { nv: 3, nw: 2, deg: 2, r: 3 };
        let (inst, planted) = generate(GenKind::Satisfiable, p, seed).unwrap();
        assert_eq!(evaluate_labeling(&inst, planted.as_ref().unwrap()).unwrap(), int(1), "seed {seed}");
        assert_eq!(inst.w_degree(), 3);
    }
}

#[test]
fn brute_force_dominates_sampled_labelings() {
    let mut rng = common::rng(11);
    let (inst, _) = generate(GenKind::Random, GenParams { nv: 3, nw: 3, deg: 2, r: 3 }, 4).unwrap();
    let (opt, best) = brute_force_opt(&inst, 1 << 20).unwrap();
    assert_eq!(evaluate_labeling(&inst, &best).unwrap(), opt);
    for _ in 0..1000 {
        let rho = random_labeling(&inst, &mut rng);
        assert!(evaluate_labeling(&inst, &rho).unwrap() <= opt);
    }
}

/// Optimum over every labeling of `V ∪ W`.
fn exhaustive_opt(inst: &UniqueGamesInstance) -> hforge_core::Rational {
    let ids: Vec<String> = inst.v_ids().iter().chain(inst.w_ids()).cloned().collect();
    let r = inst.r();
    let total = r.pow(ids.len() as u32);
    (0..total)
        .map(|mut n| {
            let rho: Labeling = ids
                .iter()
                .map(|id| {
                    let a = n % r;
                    n /= r;
                    (id.clone(), a)
                })
                .collect();
            evaluate_labeling(inst, &rho).unwrap()
        })
        .max()
        .unwrap()
}

#[test]
fn random_instances_reach_one_over_r_and_match_exhaustive_search() {
    for seed in 0..30 {
        let r = 2 + (seed as usize) % 2;
        let (inst, _) = generate(GenKind::Random, GenParams { nv: 2, nw: 2, deg: 2, r }, seed).unwrap();
        let (opt, _) = brute_force_opt(&inst, 1 << 20).unwrap();
        assert!(opt >= ratio(1, r as i64), "seed {seed}: {}", rational::to_pq(&opt));
        assert_eq!(opt, exhaustive_opt(&inst), "seed {seed}");
    }
}

#[test]
fn identity_and_swap_on_two_neighbors() {
    // V = {v}, W = {w1, w2}; pi(v,w1) = id, pi(v,w2) = swap. Distinct labels
    // on w1 and w2 map to the same label of v, so both edges hold together.
    let inst = UniqueGamesInstance::new(
        2,
        vec!["v".into()],
        vec!["w1".into(), "w2".into()],
        vec![UgEdge { v: 0, w: 0, perm: vec![0, 1] }, UgEdge { v: 0, w: 1, perm: vec![1, 0] }],
    )
    .unwrap();
    let (opt, best) = brute_force_opt(&inst, 100).unwrap();
    assert_eq!(opt, exhaustive_opt(&inst));
    assert_eq!(opt, int(1));
    assert_ne!(best["w1"], best["w2"]);
    assert_eq!(evaluate_labeling(&inst, &best).unwrap(), int(1));
    // Same labels on both neighbors do conflict: value 1/2.
    let same: Labeling = [("v", 0), ("w1", 0), ("w2", 0)].iter().map(|&(k, a)| (k.to_string(), a)).collect();
    assert_eq!(evaluate_labeling(&inst, &same).unwrap(), ratio(1, 2));
}

#[test]
fn multigraph_generation_is_regular() {
    let (inst, planted) = generate(GenKind::Satisfiable, GenParams { nv: 2, nw: 1, deg: 3, r: 2 }, 9).unwrap();
    assert_eq!(inst.w_degree(), 6);
    assert_eq!(evaluate_labeling(&inst, planted.as_ref().unwrap()).unwrap(), int(1));
}

#[test]
fn budget_guard() {
    let (inst, _) = generate(GenKind::Random, GenParams { nv: 4, nw: 12, deg: 3, r: 4 }, 0).unwrap();
    assert!(matches!(brute_force_opt(&inst, 1000), Err(hforge_core::Error::BudgetExceeded { .. })));
}
