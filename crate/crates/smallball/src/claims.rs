//! Batch evaluation of the supporting inequalities on seeded random
//! instances, reported as `{claim id -> {instances, max_violation, pass}}`.

use smallball_core::bounds::binomial_negative_moment;
use smallball_core::instances::{instance_rng, random_averaging_tuple, random_distribution, random_holder_instance, unimodular};
use smallball_core::oracles::{
    check_averaging_identities, holder_lhs_rhs, minimal_unit_masks, switching_stats, t_set, t_set_by_cases,
    MuNormContext, MAX_SWITCHING_N,
};
use smallball_core::Result;

use crate::formats::{ClaimReport, ClaimResult};

pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const HOLDER_INSTANCES: u64 = 500;
pub const AVERAGING_INSTANCES: u64 = 1000;
pub const NORM_INSTANCES: u64 = 1000;
pub const HOLDER_TOL: f64 = 1e-9;
pub const AVERAGING_TOL: f64 = 1e-10;
pub const SWITCHING_TOL: f64 = 1e-12;

pub const DECOMPOSITION: &str = "decomposition_l1";
pub const DECOMPOSITION_EXPECTATION: &str = "decomposition_expectation";
pub const AVERAGING_IDENTITY: &str = "averaging_identity";
pub const AVERAGING_PRODUCT: &str = "averaging_product";
pub const OPERATOR_NORM_PRODUCT: &str = "operator_norm_product";
pub const SWITCHING_DOMINATION: &str = "switching_domination";
pub const SWITCHING_MOMENTS: &str = "switching_moment_chain";
pub const NEGATIVE_MOMENT: &str = "binomial_negative_moment";
pub const NORM_CHAIN: &str = "norm_chain";
pub const T_SET: &str = "t_set_descriptions";

/// Per-claim seed offsets keep the instance streams of different claims
/// disjoint.
fn claim_seed(seed: u64, claim: u64) -> u64 {
    seed ^ (claim << 56)
}

#[derive(Debug, Default)]
struct Tally {
    instances: u64,
    max_violation: f64,
    pass: bool,
}

impl Tally {
    fn new() -> Self {
        Self { instances: 0, max_violation: f64::NEG_INFINITY, pass: true }
    }

    fn record(&mut self, violation: f64, tol: f64) {
        self.instances += 1;
        self.max_violation = self.max_violation.max(violation);
        if violation > tol {
            self.pass = false;
        }
    }

    fn finish(self) -> ClaimResult {
        let max_violation = if self.instances == 0 { 0.0 } else { self.max_violation };
        ClaimResult { instances: self.instances, max_violation, pass: self.pass }
    }
}

/// Largest `k` whose `2^k` enumeration fits in `budget`, capped at `cap`.
fn log2_cap(budget: u64, cap: usize) -> usize {
    (63 - budget.max(1).leading_zeros() as usize).min(cap)
}

pub fn decomposition(seed: u64, budget: u64) -> Result<(ClaimResult, ClaimResult)> {
    let max_k = log2_cap(budget, 6).max(1);
    let (mut l1, mut mean) = (Tally::new(), Tally::new());
    for i in 0..HOLDER_INSTANCES {
        let inst = random_holder_instance(&mut instance_rng(claim_seed(seed, 1), i), 6, max_k)?;
        let r = holder_lhs_rhs(&inst)?;
        l1.record(r.violation(), HOLDER_TOL);
        mean.record(r.mean_violation(), HOLDER_TOL);
    }
    Ok((l1.finish(), mean.finish()))
}

pub fn averaging(seed: u64) -> Result<[ClaimResult; 3]> {
    let (mut id, mut prod, mut unit) = (Tally::new(), Tally::new(), Tally::new());
    for i in 0..AVERAGING_INSTANCES {
        let t = random_averaging_tuple(&mut instance_rng(claim_seed(seed, 2), i), 8, 5)?;
        let r = check_averaging_identities(&t.mu, &t.u, &t.rs, &t.ts, &t.us)?;
        id.record(r.identity_error, AVERAGING_TOL);
        prod.record(r.product_of_averages.lhs - r.product_of_averages.rhs, AVERAGING_TOL);
        unit.record(r.unit_vectors.lhs - r.unit_vectors.rhs, AVERAGING_TOL);
    }
    Ok([id.finish(), prod.finish(), unit.finish()])
}

/// Exhaustive over `n <= max_n`, `lambda in {0, .1, ..., 1}`, the full mask
/// and every minimal mask.
pub fn switching(budget: u64, divisor: usize) -> Result<(ClaimResult, ClaimResult)> {
    let max_n = (log2_cap(budget, MAX_SWITCHING_N - 1) + 1).min(MAX_SWITCHING_N);
    let (mut dom, mut chain) = (Tally::new(), Tally::new());
    for n in 1..=max_n {
        let mut masks = minimal_unit_masks(n);
        masks.push(vec![true; n]);
        for j in 0..=10 {
            let lam = j as f64 / 10.0;
            for mask in &masks {
                let r = switching_stats(n, lam, mask, divisor)?;
                dom.record(-r.min_margin, SWITCHING_TOL);
                let excess = [
                    r.mean_inv_sqrt_r - r.mean_inv_sqrt_rprime,
                    r.mean_inv_sqrt_rprime - r.jensen,
                    r.moment_bound.map_or(f64::NEG_INFINITY, |b| r.jensen - b),
                ]
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
                chain.record(excess, SWITCHING_TOL);
            }
        }
    }
    Ok((dom.finish(), chain.finish()))
}

/// `n <= 50`, `d <= 3`, `p in {0.1, ..., 1.0}`; violation is
/// `exact / bound - 1`.
pub fn negative_moment() -> Result<ClaimResult> {
    let mut t = Tally::new();
    for n in 1..=50u64 {
        for d in 1..=3u32 {
            for j in 1..=10 {
                let m = binomial_negative_moment(n, j as f64 / 10.0, d)?;
                t.record(m.exact / m.bound - 1.0, 1e-12);
            }
        }
    }
    Ok(t.finish())
}

pub fn norm_chain(seed: u64) -> Result<ClaimResult> {
    let mut t = Tally::new();
    for i in 0..NORM_INSTANCES {
        let mut rng = instance_rng(claim_seed(seed, 3), i);
        let n = 1 + (i as usize % 9);
        let mu = random_distribution(&mut rng, n);
        let scale = 1.0 + i as f64 / 100.0;
        let v: Vec<_> = unimodular(&mut rng, n).into_iter().zip(random_distribution(&mut rng, n)).map(|(z, r)| z * r * scale).collect();
        let ctx = MuNormContext::new(&mu)?;
        let (a, b, c) = (ctx.l1(&v), ctx.l2(&v), ctx.linf(&v));
        t.record((a - b).max(b - c), 1e-12 * c.max(1.0));
    }
    Ok(t.finish())
}

pub fn t_set_agreement(max_k: usize) -> ClaimResult {
    let mut t = Tally::new();
    for k in 1..=max_k {
        for bits in 0u32..(1 << k) {
            let s: Vec<bool> = (0..k).map(|j| (bits >> j) & 1 == 1).collect();
            t.record(if t_set(&s) == t_set_by_cases(&s) { 0.0 } else { 1.0 }, 0.0);
        }
    }
    t.finish()
}

/// Every claim, keyed by id.
pub fn verify_claims(seed: u64, budget: u64) -> Result<ClaimReport> {
    let mut out = ClaimReport::new();
    let (l1, mean) = decomposition(seed, budget)?;
    out.insert(DECOMPOSITION.into(), l1);
    out.insert(DECOMPOSITION_EXPECTATION.into(), mean);
    let [id, prod, unit] = averaging(seed)?;
    out.insert(AVERAGING_IDENTITY.into(), id);
    out.insert(AVERAGING_PRODUCT.into(), prod);
    out.insert(OPERATOR_NORM_PRODUCT.into(), unit);
    let (dom, chain) = switching(budget, 4)?;
    out.insert(SWITCHING_DOMINATION.into(), dom);
    out.insert(SWITCHING_MOMENTS.into(), chain);
    out.insert(NEGATIVE_MOMENT.into(), negative_moment()?);
    out.insert(NORM_CHAIN.into(), norm_chain(seed)?);
    out.insert(T_SET.into(), t_set_agreement(log2_cap(budget, 12)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_caps() {
        assert_eq!(log2_cap(1_000_000, 6), 6);
        assert_eq!(log2_cap(8, 6), 3);
        assert_eq!(log2_cap(0, 6), 0);
    }

    #[test]
    fn small_claims_pass() {
        assert!(negative_moment().unwrap().pass);
        assert!(t_set_agreement(8).pass);
        assert!(norm_chain(1).unwrap().pass);
        let (dom, chain) = switching(64, 4).unwrap();
        assert!(dom.pass && chain.pass);
    }
}
