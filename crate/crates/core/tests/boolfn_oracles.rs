mod common;

use hforge_core::boolfn::{
    degree_influence, influence, subcube_points, subcube_zero_probability, Cube, EfronStein, ProbeMode, Subcube,
    TableFunction,
};
use hforge_core::rational::{self, int, Rational};
use proptest::prelude::*;

use common::{fourier_degree_influence, frac, naive_degree_influence, naive_energies, naive_influence};

fn boolean(k: usize, r: usize) -> impl Strategy<Value = TableFunction> {
    let n = k.pow(r as u32);
    prop::collection::vec(any::<bool>(), n)
        .prop_map(move |bits| TableFunction::indicator(Cube::new(k, r).unwrap(), |x| bits[x]))
}

fn rational_valued(k: usize, r: usize) -> impl Strategy<Value = TableFunction> {
    let n = k.pow(r as u32);
    prop::collection::vec((-5i64..=5, 1i64..=4), n)
        .prop_map(move |v| TableFunction::new(k, r, v.into_iter().map(|(p, q)| frac(p, q)).collect()).unwrap())
}

proptest! {
    #[test]
    fn binary_degree_influence_matches_fourier(f in boolean(2, 4), d in 1usize..=4) {
        let es = EfronStein::new(&f).unwrap();
        for i in 0..4 {
            prop_assert_eq!(es.degree_influence(i, d).unwrap(), fourier_degree_influence(&f, i, d));
        }
    }

    #[test]
    fn ternary_energies_match_inclusion_exclusion(f in rational_valued(3, 3)) {
        let es = EfronStein::new(&f).unwrap();
        let naive = naive_energies(&f);
        for (m, e) in naive.iter().enumerate() {
            prop_assert_eq!(es.energy(m), e);
        }
        for d in 0..=3 {
            for i in 0..3 {
                prop_assert_eq!(es.degree_influence(i, d).unwrap(), naive_degree_influence(&naive, i, d));
            }
        }
    }

    #[test]
    fn energies_sum_to_second_moment(f in rational_valued(3, 2)) {
        let es = EfronStein::new(&f).unwrap();
        let total: Rational = (0..4).map(|m| es.energy(m).clone()).sum();
        let second: Rational = f.values().iter().map(|v| v * v).sum::<Rational>() / int(9);
        prop_assert_eq!(total, second);
    }

    #[test]
    fn influence_routes_agree(f in rational_valued(3, 3)) {
        for i in 0..3 {
            let def = influence(&f, i).unwrap();
            prop_assert_eq!(&def, &naive_influence(&f, i));
            prop_assert_eq!(&def, &degree_influence(&f, i, 3).unwrap());
            prop_assert!(rational::is_nonnegative(&def));
        }
    }

    #[test]
    fn degree_influence_is_monotone_in_d(f in boolean(3, 3)) {
        let es = EfronStein::new(&f).unwrap();
        for i in 0..3 {
            for d in 1..3 {
                prop_assert!(es.degree_influence(i, d).unwrap() <= es.degree_influence(i, d + 1).unwrap());
            }
        }
    }

    #[test]
    fn exact_probe_matches_direct_enumeration(f in boolean(2, 4), s_len in 1usize..=3, target in 0u8..=1) {
        let stat = subcube_zero_probability(&f, s_len, target, ProbeMode::Exact).unwrap();
        let cube = f.cube();
        let want = int(target as i64);
        let seqs = 4usize.pow(s_len as u32);
        let mut hits = 0;
        for x in 0..cube.size() {
            for mut n in 0..seqs {
                let seq: Vec<usize> = (0..s_len).map(|_| { let d = n % 4; n /= 4; d }).collect();
                hits += subcube_points(&cube, &Subcube::new(x, seq)).iter().all(|&z| *f.value(z) == want) as i64;
            }
        }
        prop_assert_eq!(stat.value, frac(hits, (cube.size() * seqs) as i64));
    }
}

#[test]
fn dictator_closed_form_over_grid() {
    for (k, r, s_len) in [(2, 3, 1), (2, 5, 2), (3, 3, 2), (3, 4, 1), (4, 3, 3)] {
        for s in 0..r {
            // 0/1 dictator: 0 exactly when x_s = 0.
            let cube = Cube::new(k, r).unwrap();
            let g = TableFunction::indicator(cube, |x| cube.digit(x, s) != 0);
            let p = subcube_zero_probability(&g, s_len, 0, ProbeMode::Exact).unwrap().value;
            let miss = frac(((r - 1) as i64).pow(s_len as u32), (r as i64).pow(s_len as u32));
            assert_eq!(p, miss / int(k as i64), "k={k} R={r} s_len={s_len} s={s}");
        }
    }
}

#[test]
fn sampled_probe_is_close_to_exact() {
    let f = hforge_core::boolfn::make_dictator(2, 5, 1).unwrap();
    let exact = subcube_zero_probability(&f, 2, 0, ProbeMode::Exact).unwrap().value;
    let est = subcube_zero_probability(&f, 2, 0, ProbeMode::Sampled { seed: 5, trials: 20_000 }).unwrap().value;
    let gap = (rational::to_decimal(&exact).parse::<f64>().unwrap()
        - rational::to_decimal(&est).parse::<f64>().unwrap())
    .abs();
    assert!(gap < 0.02, "gap {gap}");
}
