//! Transfer-matrix results against path enumeration and the other
//! independent routes.

use num_traits::ToPrimitive;
use rand::Rng;

use smallball_core::chain::{make_independent_chain, make_two_state_chain, SignSystem, WeightSystem, WeightVariant};
use smallball_core::instances::{instance_rng, random_averaging_tuple, random_integer_instance};
use smallball_core::oracles::{brute_force_char_fn, brute_force_distribution, check_averaging_identities};
use smallball_core::prg::{build_mgg_expander, prg_smallball, PrgMode, PrgSpec, DEFAULT_WALK_BUDGET};
use smallball_core::transfer::{
    char_fn, exact_sum_distribution, exact_sum_distribution_rational, exact_sum_distribution_steps, find_prime,
    zp_fourier_average, DEFAULT_CELL_BUDGET,
};

const SEED: u64 = 20_240_601;

#[test]
fn char_fn_and_distribution_match_enumeration() {
    for i in 0..200 {
        let inst = random_integer_instance(&mut instance_rng(SEED, i), 4, 8, 6).unwrap();
        let w = WeightSystem::integers(&inst.weights).unwrap();
        let xi = instance_rng(SEED + 1, i).random::<f64>() * 2.0 - 1.0;
        let a = char_fn(&inst.chain, &inst.signs, &w, xi).unwrap();
        let b = brute_force_char_fn(&inst.chain, &inst.signs, &w, xi).unwrap();
        assert!((a.as_complex() - b.as_complex()).norm() <= 1e-10, "instance {i}: {a:?} vs {b:?}");
        assert!(a.modulus() <= 1.0 + 1e-12);

        let dp = exact_sum_distribution(&inst.chain, &inst.signs, &w, DEFAULT_CELL_BUDGET).unwrap();
        let bf = brute_force_distribution(&inst.chain, &inst.signs, &inst.weights).unwrap();
        let (lo, hi) = bf.span();
        for s in lo..=hi {
            assert!((dp.prob_at(s) - bf.prob_at(s)).abs() <= 1e-10, "instance {i}, sum {s}");
        }
    }
}

#[test]
fn rational_mode_agrees_with_floats() {
    for i in 0..20 {
        let inst = random_integer_instance(&mut instance_rng(SEED + 2, i), 3, 6, 4).unwrap();
        let w = WeightSystem::integers(&inst.weights).unwrap();
        let steps = smallball_core::transfer::integer_step_values(&inst.signs, &w).unwrap();
        let float = exact_sum_distribution_steps(&inst.chain, &steps, DEFAULT_CELL_BUDGET).unwrap();
        for (s, q) in exact_sum_distribution_rational(&inst.chain, &steps).unwrap() {
            assert!((float.prob_at(s) - q.to_f64().unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn independent_chain_modulus_is_cosine_product() {
    for i in 0..50 {
        let mut rng = instance_rng(SEED + 3, i);
        let n = rng.random_range(1..10);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5.0)).collect();
        let c = make_independent_chain(&[0.5, 0.5]).unwrap();
        let s = SignSystem::split_labeling(&c, n).unwrap();
        let w = WeightSystem::scalars(&v, WeightVariant::General).unwrap();
        let xi: f64 = rng.random();
        let expect: f64 = v.iter().map(|x| (2.0 * std::f64::consts::PI * xi * x).cos().abs()).product();
        assert!((char_fn(&c, &s, &w, xi).unwrap().modulus() - expect).abs() < 1e-12);
    }
}

#[test]
fn flip_invariant_chain_gives_symmetric_law() {
    for lam in [0.0, 0.3, 0.7, 1.0] {
        let c = make_two_state_chain(lam).unwrap();
        let s = SignSystem::split_labeling(&c, 9).unwrap();
        let w = WeightSystem::integers(&[1, 2, 3, 1, 1, 4, 2, 1, 5]).unwrap();
        let d = exact_sum_distribution(&c, &s, &w, DEFAULT_CELL_BUDGET).unwrap();
        for x in 0..=20 {
            assert!((d.prob_at(x) - d.prob_at(-x)).abs() < 1e-12);
        }
    }
}

#[test]
fn point_mass_below_residue_mass() {
    for i in 0..200 {
        let inst = random_integer_instance(&mut instance_rng(SEED + 4, i), 4, 8, 9).unwrap();
        let w = WeightSystem::integers(&inst.weights).unwrap();
        let p = find_prime(&w).unwrap();
        let d = exact_sum_distribution(&inst.chain, &inst.signs, &w, DEFAULT_CELL_BUDGET).unwrap();
        let (lo, hi) = d.span();
        for x0 in lo..=hi {
            assert!(d.prob_at(x0) <= d.residue_mass(x0, p));
        }
        let x0 = d.max_point().0;
        let z = zp_fourier_average(&inst.chain, &inst.signs, &w, p, x0).unwrap();
        assert!((z.residue_probability - d.residue_mass(x0, p)).abs() < 1e-10);
    }
}

#[test]
fn prg_matches_walk_chain() {
    for k in [2u32, 4] {
        let g = build_mgg_expander(k).unwrap();
        let chain = g.as_markov_chain().unwrap();
        for blocks in 1..=4usize {
            let n = blocks * k as usize;
            let spec = PrgSpec::new(g.clone(), n).unwrap();
            let weights: Vec<f64> = (0..n).map(|i| (1 + i % 3) as f64).collect();
            let steps: Vec<Vec<i64>> = spec
                .block_values(&weights)
                .unwrap()
                .into_iter()
                .map(|row| row.into_iter().map(|x| x.round() as i64).collect())
                .collect();
            let dist = exact_sum_distribution_steps(&chain, &steps, DEFAULT_CELL_BUDGET).unwrap();
            for (x0, r) in [(0.0, 0.0), (0.0, 1.0), (2.0, 1.5), (-3.0, 0.0)] {
                let p = prg_smallball(&spec, &weights, 0, x0, r, PrgMode::Exact { budget: DEFAULT_WALK_BUDGET }).unwrap();
                assert!((p.value() - dist.window(x0, r)).abs() <= 1e-10, "k={k} n={n} x0={x0} r={r}");
            }
        }
    }
}

#[test]
fn averaging_facts_on_random_tuples() {
    for i in 0..1000 {
        let t = random_averaging_tuple(&mut instance_rng(SEED + 5, i), 8, 5).unwrap();
        let rep = check_averaging_identities(&t.mu, &t.u, &t.rs, &t.ts, &t.us).unwrap();
        assert!(rep.holds(1e-10), "tuple {i}: {rep:?}");
    }
}
