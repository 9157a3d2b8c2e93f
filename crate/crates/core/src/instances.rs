//! Seeded random instance generators shared by property checks, the fitting
//! families and the acceptance suite. Instance `i` of a family drawn with
//! seed `s` is always built from `counter_rng(s, INSTANCES, i)`, so a failing
//! instance can be rebuilt from its `(seed, index)` pair alone.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{averaging_operator, spectral_lambda, MarkovChain, SignSystem};
use crate::error::{Error, Result};
use crate::rng::{counter_rng, streams};

/// Bumped whenever a generator changes the instances it produces.
pub const GENERATOR_VERSION: u32 = 1;

/// Largest `lambda` `balanced_chain_with_lambda` can hit.
pub const MAX_TARGET_LAMBDA: f64 = 0.9;

pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    counter_rng(seed, streams::INSTANCES, index)
}

/// Strictly positive probability vector; no entry falls below `0.05 / n`.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random reversible chain on `n` states: a symmetric positive edge-weight
/// matrix normalized by rows. Stationary mass is proportional to row sums.
pub fn random_reversible_chain<R: Rng>(rng: &mut R, n: usize) -> Result<MarkovChain> {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = 0.02 + rng.random::<f64>();
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let rows: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let total: f64 = rows.iter().sum();
    let mu: Vec<f64> = rows.iter().map(|r| r / total).collect();
    let mut a = w;
    for (i, &r) in rows.iter().enumerate() {
        a.row_mut(i).iter_mut().for_each(|x| *x /= r);
    }
    MarkovChain::from_matrix(a, Some(&mu))
}

/// Random `+-1` function on `n` states.
pub fn random_signs<R: Rng>(rng: &mut R, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// A reversible chain on `n_states >= 2` states together with a sign
/// function `f` that has `E_mu[f] = 0`, tuned so that `lambda` equals
/// `target` up to eigensolver rounding.
///
/// States are split into a `+1` group and a `-1` group, each carrying
/// stationary mass `1/2`. A Metropolis-Hastings chain for that `mu` is made
/// lazy until its `lambda` is at least `MAX_TARGET_LAMBDA` and then blended
/// with `E_mu`; the blend scales every nontrivial eigenvalue linearly.
pub fn balanced_chain_with_lambda<R: Rng>(rng: &mut R, n_states: usize, target: f64) -> Result<(MarkovChain, Vec<i8>)> {
    if n_states < 2 {
        return Err(Error::OutOfRange { what: "state count", value: n_states as f64 });
    }
    if !(0.0..=MAX_TARGET_LAMBDA).contains(&target) {
        return Err(Error::OutOfRange { what: "target lambda", value: target });
    }
    let plus = rng.random_range(1..n_states);
    let mut f: Vec<i8> = (0..n_states).map(|i| if i < plus { 1 } else { -1 }).collect();
    // Shuffle the group labels so the +1 states are not always first.
    for i in (1..n_states).rev() {
        let j = rng.random_range(0..=i);
        f.swap(i, j);
    }
    let raw: Vec<f64> = (0..n_states).map(|_| 0.2 + rng.random::<f64>()).collect();
    let group_total = |s: i8| -> f64 { raw.iter().zip(&f).filter(|(_, &g)| g == s).map(|(x, _)| x).sum() };
    let (tp, tm) = (group_total(1), group_total(-1));
    let mu: Vec<f64> = raw.iter().zip(&f).map(|(&x, &g)| 0.5 * x / if g == 1 { tp } else { tm }).collect();

    // Metropolis-Hastings with a random symmetric proposal.
    let mut q = DMatrix::<f64>::zeros(n_states, n_states);
    for i in 0..n_states {
        for j in (i + 1)..n_states {
            let x = 0.1 + rng.random::<f64>();
            q[(i, j)] = x;
            q[(j, i)] = x;
        }
    }
    let qmax = (0..n_states).map(|i| q.row(i).sum()).fold(0.0, f64::max);
    q /= qmax;
    let mut b = DMatrix::<f64>::zeros(n_states, n_states);
    for i in 0..n_states {
        let mut off = 0.0;
        for j in 0..n_states {
            if i != j {
                let x = q[(i, j)] * (mu[j] / mu[i]).min(1.0);
                b[(i, j)] = x;
                off += x;
            }
        }
        b[(i, i)] = 1.0 - off;
    }
    let e = averaging_operator(&mu);
    let identity = DMatrix::<f64>::identity(n_states, n_states);
    let mut laziness = 1.0;
    let mut base;
    loop {
        base = &identity * (1.0 - laziness) + &b * laziness;
        let lam = spectral_lambda(&MarkovChain::from_matrix(base.clone(), Some(&mu))?)?;
        if lam >= MAX_TARGET_LAMBDA {
            let t = target / lam;
            let blended = &e * (1.0 - t) + &base * t;
            let chain = MarkovChain::from_matrix(blended, Some(&mu))?;
            return Ok((chain, f));
        }
        laziness *= 0.5;
    }
}

/// Balanced chain whose `lambda` is drawn uniformly from
/// `[center - halfwidth, center + halfwidth]` clipped to the feasible range.
pub fn balanced_chain_in_bucket<R: Rng>(
    rng: &mut R,
    n_states: usize,
    center: f64,
    halfwidth: f64,
) -> Result<(MarkovChain, Vec<i8>)> {
    let lo = (center - halfwidth).max(0.0);
    let hi = (center + halfwidth).min(MAX_TARGET_LAMBDA);
    let target = lo + (hi - lo) * rng.random::<f64>();
    balanced_chain_with_lambda(rng, n_states, target)
}

/// Chain, per-step signs and integer weights for oracle comparisons.
#[derive(Debug, Clone)]
pub struct IntegerInstance {
    pub chain: MarkovChain,
    pub signs: SignSystem,
    pub weights: Vec<i64>,
}

/// `N` in `1..=max_states`, `n` in `1..=max_steps`, weights in
/// `1..=max_weight`, independently random sign functions per step.
pub fn random_integer_instance<R: Rng>(
    rng: &mut R,
    max_states: usize,
    max_steps: usize,
    max_weight: i64,
) -> Result<IntegerInstance> {
    let n_states = rng.random_range(1..=max_states);
    let n = rng.random_range(1..=max_steps);
    let chain = random_reversible_chain(rng, n_states)?;
    let functions = (0..n).map(|_| random_signs(rng, n_states)).collect();
    let signs = SignSystem::new(&chain, functions)?;
    let weights = (0..n).map(|_| rng.random_range(1..=max_weight)).collect();
    Ok(IntegerInstance { chain, signs, weights })
}

/// Matrices `T_1..T_k`, vectors `u_1..u_{k+1}` and the `lambda` used to
/// form `T_j + (1 - lambda) E_mu`.
#[derive(Debug, Clone)]
pub struct HolderInstance {
    pub mu: Vec<f64>,
    pub lam: f64,
    pub t: Vec<DMatrix<Complex<f64>>>,
    pub u: Vec<Vec<Complex<f64>>>,
}

impl HolderInstance {
    pub fn k(&self) -> usize {
        self.t.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mu.len();
        if self.u.len() != self.t.len() + 1 {
            return Err(Error::DimensionMismatch { what: "vector count", expected: self.t.len() + 1, found: self.u.len() });
        }
        if !(0.0..=1.0).contains(&self.lam) {
            return Err(Error::OutOfRange { what: "lambda", value: self.lam });
        }
        for m in &self.t {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { what: "matrix size", expected: n, found: m.nrows() });
            }
        }
        for (j, u) in self.u.iter().enumerate() {
            if u.len() != n {
                return Err(Error::DimensionMismatch { what: "vector length", expected: n, found: u.len() });
            }
            if let Some(z) = u.iter().zip(&self.mu).find(|(z, &m)| m > 0.0 && z.norm() > 1.0 + 1e-12) {
                return Err(Error::PreconditionViolated(alloc::format!(
                    "u_{} has an entry of modulus {} > 1",
                    j + 1,
                    z.0.norm()
                )));
            }
        }
        Ok(())
    }
}

pub fn unimodular<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex<f64>> {
    (0..n).map(|_| Complex::from_polar(1.0, 2.0 * PI * rng.random::<f64>())).collect()
}

/// `N` in `2..=max_states`, `k` in `1..=max_k`; a random reversible chain
/// gives `lambda` and `T_j = A - (1 - lambda) E_mu` for every `j`, and each
/// `u_j` is a random unimodular vector.
pub fn random_holder_instance<R: Rng>(rng: &mut R, max_states: usize, max_k: usize) -> Result<HolderInstance> {
    let n_states = rng.random_range(2..=max_states);
    let k = rng.random_range(1..=max_k);
    let chain = random_reversible_chain(rng, n_states)?;
    let lam = spectral_lambda(&chain)?;
    let e = chain.averaging_operator();
    let t = (chain.transition() - e * (1.0 - lam)).map(|x| Complex::new(x, 0.0));
    let u = (0..=k).map(|_| unimodular(rng, n_states)).collect();
    Ok(HolderInstance { mu: chain.stationary().to_vec(), lam, t: vec![t; k], u })
}

/// Inputs for the three averaging facts: a distribution, a vector with
/// entries of modulus at most 1, matrices `R_1..R_k`, matrices `T_1..T_k`
/// and unimodular `u_1..u_{k+1}`.
#[derive(Debug, Clone)]
pub struct AveragingTuple {
    pub mu: Vec<f64>,
    pub u: Vec<Complex<f64>>,
    pub rs: Vec<DMatrix<Complex<f64>>>,
    pub ts: Vec<DMatrix<Complex<f64>>>,
    pub us: Vec<Vec<Complex<f64>>>,
}

pub fn random_averaging_tuple<R: Rng>(rng: &mut R, max_states: usize, max_k: usize) -> Result<AveragingTuple> {
    let n = rng.random_range(2..=max_states);
    let k = rng.random_range(1..=max_k);
    let mu = random_reversible_chain(rng, n)?.stationary().to_vec();
    let cmat = |rng: &mut R, scale: f64| {
        DMatrix::from_fn(n, n, |_, _| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale)
    };
    let rs = (0..k).map(|_| cmat(rng, 2.0)).collect();
    let ts = (0..k).map(|_| cmat(rng, 1.0)).collect();
    let u = (0..n).map(|_| Complex::from_polar(rng.random::<f64>(), 2.0 * PI * rng.random::<f64>())).collect();
    let us = (0..=k).map(|_| unimodular(rng, n)).collect();
    Ok(AveragingTuple { mu, u, rs, ts, us })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_chain_hits_target() {
        for (i, target) in [0.0, 0.2, 0.5, 0.8, 0.9].into_iter().enumerate() {
            let mut rng = instance_rng(9, i as u64);
            let (chain, f) = balanced_chain_with_lambda(&mut rng, 2 + i % 3, target).unwrap();
            assert!((spectral_lambda(&chain).unwrap() - target).abs() < 1e-9);
            let mean: f64 = chain.stationary().iter().zip(&f).map(|(m, &s)| m * s as f64).sum();
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn generators_are_replayable() {
        let a = random_integer_instance(&mut instance_rng(3, 17), 4, 8, 5).unwrap();
        let b = random_integer_instance(&mut instance_rng(3, 17), 4, 8, 5).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.chain, b.chain);
    }

    #[test]
    fn holder_instances_validate() {
        for i in 0..20 {
            random_holder_instance(&mut instance_rng(1, i), 6, 6).unwrap().validate().unwrap();
        }
    }
}
