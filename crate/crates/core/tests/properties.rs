use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use smallball_core::bounds::{binomial_negative_moment, theorem_bound, TheoremConstants, TheoremKind, TheoremParams};
use smallball_core::chain::{
    make_independent_chain, make_two_state_chain, spectral_lambda, symmetrized_asymmetry, MarkovChain,
};
use smallball_core::instances::{instance_rng, random_distribution, random_reversible_chain};
use smallball_core::linalg::left_fixed_space;
use smallball_core::oracles::{switching_stats, MuNormContext};
use smallball_core::Error;

#[test]
fn independent_chains_have_zero_lambda() {
    for i in 0..100 {
        let mut rng = instance_rng(41, i);
        let n = rng.random_range(1..=8);
        let mu = random_distribution(&mut rng, n);
        let c = make_independent_chain(&mu).unwrap();
        assert!(spectral_lambda(&c).unwrap() < 1e-12);
    }
}

#[test]
fn two_state_grid_recovers_lambda() {
    for i in 0..50 {
        let x = i as f64 / 49.0;
        let c = make_two_state_chain(x).unwrap();
        assert!((spectral_lambda(&c).unwrap() - x).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn reversibility_checks_agree() {
    for i in 0..1000u64 {
        let mut rng = instance_rng(42, i);
        let n = rng.random_range(2..=5);
        let a = if i % 2 == 0 {
            random_reversible_chain(&mut rng, n).unwrap().transition().clone()
        } else {
            let mut m = DMatrix::from_fn(n, n, |_, _| 0.05 + rng.random::<f64>());
            for r in 0..n {
                let s = m.row(r).sum();
                m.row_mut(r).iter_mut().for_each(|x| *x /= s);
            }
            m
        };
        let (_, mu) = left_fixed_space(&a, 1e-8).unwrap();
        let mu = mu.unwrap();
        let total: f64 = mu.iter().sum();
        let mu: Vec<f64> = mu.iter().map(|x| x / total).collect();
        let symmetric = symmetrized_asymmetry(&a, &mu).unwrap() <= 1e-9;
        let accepted = match MarkovChain::from_matrix(a, None) {
            Ok(_) => true,
            Err(Error::NotReversible { .. }) => false,
            Err(e) => panic!("unexpected {e:?}"),
        };
        assert_eq!(symmetric, accepted, "chain {i}");
        // Every two-state chain is reversible.
        assert_eq!(accepted, i % 2 == 0 || n == 2);
    }
}

#[test]
fn negative_moment_grid() {
    for n in 1..=50u64 {
        for d in 1..=3u32 {
            for j in 1..=10 {
                let m = binomial_negative_moment(n, j as f64 / 10.0, d).unwrap();
                assert!(m.exact <= m.bound * (1.0 + 1e-12), "n={n} d={d} p={j}");
            }
        }
    }
}

#[test]
fn switching_domination_grid() {
    for n in 1..=13 {
        for j in 0..=10 {
            let r = switching_stats(n, j as f64 / 10.0, &vec![true; n], 4).unwrap();
            assert!(r.dominated(1e-12) && r.chain_holds(1e-12), "n={n} lambda={}", j as f64 / 10.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lambda_in_unit_interval(seed in any::<u64>(), n in 1usize..7) {
        let c = random_reversible_chain(&mut instance_rng(seed, 0), n).unwrap();
        let lam = spectral_lambda(&c).unwrap();
        prop_assert!((0.0..=1.0).contains(&lam));
    }

    #[test]
    fn norm_chain(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = instance_rng(seed, 1);
        let mu = random_distribution(&mut rng, n);
        let v: Vec<num_complex::Complex<f64>> =
            (0..n).map(|_| num_complex::Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() * 3.0)).collect();
        let ctx = MuNormContext::new(&mu).unwrap();
        prop_assert!(ctx.l1(&v) <= ctx.l2(&v) * (1.0 + 1e-12));
        prop_assert!(ctx.l2(&v) <= ctx.linf(&v) * (1.0 + 1e-12));
    }

    #[test]
    fn bound_increases_with_lambda(n in 1usize..200, lam in 0.0f64..0.98, step in 0.001f64..0.02) {
        let c = TheoremConstants::unit();
        for kind in [TheoremKind::ScalarHalfUnit, TheoremKind::DistinctInt, TheoremKind::HighDim] {
            let lo = theorem_bound(kind, &TheoremParams { n, d: 1, lambda: lam, radius: 1.0 }, &c).unwrap();
            let hi = theorem_bound(kind, &TheoremParams { n, d: 1, lambda: lam + step, radius: 1.0 }, &c).unwrap();
            prop_assert!(hi > lo);
        }
    }
}
