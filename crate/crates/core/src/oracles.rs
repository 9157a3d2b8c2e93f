//! Brute-force and direct-evaluation oracles for the inequalities behind the
//! bounds, plus `L_p(mu)` norms.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;
use nalgebra::DMatrix;
use num_complex::Complex;
// Float supplies the math methods without std; it goes unused when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::bounds::binomial_negative_moment;
use crate::chain::{averaging_operator, MarkovChain, SignSystem, WeightSystem};
use crate::error::{Error, Result};
use crate::instances::HolderInstance;
use crate::transfer::{CharFnValue, SumDistribution};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Largest number of state paths the brute-force oracles will enumerate.
pub const PATH_BUDGET: u128 = 10_000_000;
/// Largest `k` for which `holder_lhs_rhs` enumerates `{0,1}^k`.
pub const MAX_HOLDER_K: usize = 16;
/// Largest `n` for which `switching_stats` enumerates `{0,1}^{n-1}`.
pub const MAX_SWITCHING_N: usize = 13;

/// `L_p(mu)` norms and the `L_2(mu)` operator norm.
#[derive(Debug, Clone, PartialEq)]
pub struct MuNormContext {
    mu: Vec<f64>,
}

impl MuNormContext {
    pub fn new(mu: &[f64]) -> Result<Self> {
        for (i, &m) in mu.iter().enumerate() {
            if !(m >= 0.0) {
                return Err(Error::InvalidDistribution { detail: "negative or non-finite mass", index: i, value: m });
            }
        }
        Ok(Self { mu: mu.to_vec() })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn l1(&self, v: &[Complex<f64>]) -> f64 {
        v.iter().zip(&self.mu).map(|(z, m)| z.norm() * m).sum()
    }

    pub fn l2(&self, v: &[Complex<f64>]) -> f64 {
        v.iter().zip(&self.mu).map(|(z, m)| z.norm_sqr() * m).sum::<f64>().sqrt()
    }

    /// Essential supremum: states without mass are ignored.
    pub fn linf(&self, v: &[Complex<f64>]) -> f64 {
        v.iter().zip(&self.mu).filter(|(_, &m)| m > 0.0).map(|(z, _)| z.norm()).fold(0.0, f64::max)
    }

    /// `<u, mu> = sum_i u_i mu_i`.
    pub fn mean(&self, v: &[Complex<f64>]) -> Complex<f64> {
        v.iter().zip(&self.mu).map(|(z, &m)| z * m).sum()
    }

    /// `||M||_{L_2(mu) -> L_2(mu)}`: the largest singular value of
    /// `D^{1/2} M D^{-1/2}`. Needs every state to carry mass.
    pub fn op_norm(&self, m: &CMatrix) -> Result<f64> {
        if let Some(i) = self.mu.iter().position(|&x| x <= 0.0) {
            return Err(Error::ZeroStationaryMass { state: i });
        }
        let n = self.mu.len();
        let s: Vec<f64> = self.mu.iter().map(|x| x.sqrt()).collect();
        let scaled = CMatrix::from_fn(n, n, |i, j| m[(i, j)] * (s[i] / s[j]));
        let svd = scaled.try_svd(false, false, 1e-15, 10_000).ok_or(Error::EigenSolver("svd did not converge"))?;
        Ok(svd.singular_values.iter().copied().fold(0.0, f64::max))
    }
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex::new(x, 0.0))
}

fn check_path_budget(chain: &MarkovChain, n: usize) -> Result<()> {
    let mut paths: u128 = 1;
    for _ in 0..n {
        paths = paths.saturating_mul(chain.n_states() as u128);
        if paths > PATH_BUDGET {
            return Err(Error::BudgetExceeded { needed: paths, budget: PATH_BUDGET });
        }
    }
    Ok(())
}

/// Visits every state path `y_1..y_n` with its probability
/// `mu(y_1) prod A(y_i, y_{i+1})` and the per-step state sequence.
fn for_each_path<F: FnMut(&[usize], f64)>(chain: &MarkovChain, n: usize, mut visit: F) {
    let a = chain.transition();
    let mu = chain.stationary();
    let states = chain.n_states();
    let mut path = vec![0usize; n];
    let mut prob = vec![0.0f64; n];
    if n == 0 {
        visit(&path, 1.0);
        return;
    }
    // Odometer over paths; prob[i] is the probability of the prefix ending at i.
    let mut depth = 0usize;
    loop {
        prob[depth] = if depth == 0 { mu[path[0]] } else { prob[depth - 1] * a[(path[depth - 1], path[depth])] };
        if depth + 1 < n {
            depth += 1;
            path[depth] = 0;
            continue;
        }
        visit(&path, prob[depth]);
        loop {
            path[depth] += 1;
            if path[depth] < states {
                break;
            }
            if depth == 0 {
                return;
            }
            depth -= 1;
        }
    }
}

/// `E exp(2 pi i xi sum_j f_j(Y_j) v_j)` by enumerating all `N^n` paths.
pub fn brute_force_char_fn(chain: &MarkovChain, signs: &SignSystem, weights: &WeightSystem, xi: f64) -> Result<CharFnValue> {
    let v = weights.as_scalars()?;
    let n = signs.n_steps();
    if v.len() != n {
        return Err(Error::DimensionMismatch { what: "weight count", expected: n, found: v.len() });
    }
    check_path_budget(chain, n)?;
    let f = signs.functions();
    let (mut re, mut im) = (0.0, 0.0);
    for_each_path(chain, n, |path, p| {
        let s: f64 = path.iter().enumerate().map(|(j, &y)| f[j][y] as f64 * v[j]).sum();
        let (sin, cos) = (2.0 * PI * xi * s).sin_cos();
        re += p * cos;
        im += p * sin;
    });
    Ok(CharFnValue { re, im })
}

/// Exact law of `sum_j f_j(Y_j) v_j` for integer weights by path enumeration.
pub fn brute_force_distribution(chain: &MarkovChain, signs: &SignSystem, weights: &[i64]) -> Result<SumDistribution> {
    let n = signs.n_steps();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { what: "weight count", expected: n, found: weights.len() });
    }
    check_path_budget(chain, n)?;
    let span: i64 = weights.iter().map(|w| w.abs()).sum();
    let mut masses = vec![0.0f64; (2 * span + 1) as usize];
    let f = signs.functions();
    for_each_path(chain, n, |path, p| {
        let s: i64 = path.iter().enumerate().map(|(j, &y)| f[j][y] as i64 * weights[j]).sum();
        masses[(s + span) as usize] += p;
    });
    Ok(SumDistribution::from_masses(-span, masses))
}

/// `t(s) = { i in 1..=k+1 : sbar_i = sbar_{i-1} = 0 }` with
/// `sbar = (0, s_1, ..., s_k, 0)`. Indices are 1-based.
pub fn t_set(s: &[bool]) -> Vec<usize> {
    let k = s.len();
    let bar = |i: usize| if i == 0 || i == k + 1 { false } else { s[i - 1] };
    (1..=k + 1).filter(|&i| !bar(i) && !bar(i - 1)).collect()
}

/// The same set described edge by edge: interior `i` with
/// `s_{i-1} = s_i = 0`, plus `1` when `s_1 = 0` and `k + 1` when `s_k = 0`.
pub fn t_set_by_cases(s: &[bool]) -> Vec<usize> {
    let k = s.len();
    let mut out = Vec::new();
    if k == 0 {
        return vec![1];
    }
    if !s[0] {
        out.push(1);
    }
    for i in 2..=k {
        if !s[i - 2] && !s[i - 1] {
            out.push(i);
        }
    }
    if !s[k - 1] {
        out.push(k + 1);
    }
    out
}

/// Both sides of the decomposition inequality for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderReport {
    /// `||U_1 (T_1 + (1-lambda) E) U_2 ... U_{k+1} 1||_{L_1(mu)}`.
    pub lhs_l1: f64,
    /// `|<mu, U_1 (T_1 + (1-lambda) E) U_2 ... U_{k+1} 1>|`, the quantity the
    /// applications need.
    pub lhs_mean: f64,
    pub rhs: f64,
}

impl HolderReport {
    pub fn violation(&self) -> f64 {
        self.lhs_l1 - self.rhs
    }

    pub fn mean_violation(&self) -> f64 {
        self.lhs_mean - self.rhs
    }
}

pub fn holder_lhs_rhs(inst: &HolderInstance) -> Result<HolderReport> {
    inst.validate()?;
    let k = inst.k();
    if k > MAX_HOLDER_K {
        return Err(Error::BudgetExceeded { needed: 1u128 << k, budget: 1u128 << MAX_HOLDER_K });
    }
    let ctx = MuNormContext::new(&inst.mu)?;
    let e = to_complex(&averaging_operator(&inst.mu));
    let gap = Complex::new(1.0 - inst.lam, 0.0);

    let mut w = inst.u[k].clone();
    for j in (0..k).rev() {
        let m = &inst.t[j] + &e * gap;
        let next = &m * nalgebra::DVector::from_column_slice(&w);
        w = next.iter().zip(&inst.u[j]).map(|(x, u)| x * u).collect();
    }
    let lhs_l1 = ctx.l1(&w);
    let lhs_mean = ctx.mean(&w).norm();

    let norms: Vec<f64> = inst.t.iter().map(|t| ctx.op_norm(t)).collect::<Result<_>>()?;
    let means: Vec<f64> = inst.u.iter().map(|u| ctx.mean(u).norm()).collect();
    let mut rhs = 0.0;
    let mut s = vec![false; k];
    for bits in 0u32..(1u32 << k) {
        let mut term = 1.0;
        for (j, sj) in s.iter_mut().enumerate() {
            *sj = (bits >> j) & 1 == 1;
            term *= if *sj { norms[j] } else { 1.0 - inst.lam };
        }
        if term == 0.0 {
            continue;
        }
        for i in t_set(&s) {
            term *= means[i - 1];
        }
        rhs += term;
    }
    Ok(HolderReport { lhs_l1, lhs_mean, rhs })
}

/// Left and right sides of one inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingReport {
    /// Largest entrywise gap in `E diag(u) E = <u, mu> E`.
    pub identity_error: f64,
    /// `||R_1 E R_2 ... E R_k 1||_{L_1} <= prod ||R_i 1||_{L_1}`.
    pub product_of_averages: Sides,
    /// `||U_1 T_1 ... U_k T_k U_{k+1} 1||_{L_1} <= prod ||T_j||`.
    pub unit_vectors: Sides,
}

impl AveragingReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.identity_error <= tol && self.product_of_averages.holds(tol) && self.unit_vectors.holds(tol)
    }
}

/// Direct evaluation of the three averaging facts. `us` must hold one more
/// vector than `ts`, each with entries of modulus at most 1.
pub fn check_averaging_identities(
    mu: &[f64],
    u: &[Complex<f64>],
    rs: &[CMatrix],
    ts: &[CMatrix],
    us: &[Vec<Complex<f64>>],
) -> Result<AveragingReport> {
    let ctx = MuNormContext::new(mu)?;
    let n = mu.len();
    if us.len() != ts.len() + 1 {
        return Err(Error::DimensionMismatch { what: "vector count", expected: ts.len() + 1, found: us.len() });
    }
    let e = to_complex(&averaging_operator(mu));
    let du = CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(u));
    let lhs = &e * du * &e;
    let rhs = &e * ctx.mean(u);
    let identity_error = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);

    let ones = nalgebra::DVector::from_element(n, Complex::new(1.0, 0.0));
    let product_of_averages = match rs.split_last() {
        None => Sides { lhs: 1.0, rhs: 1.0 },
        Some((last, rest)) => {
            let mut w = last * &ones;
            for r in rest.iter().rev() {
                w = r * (&e * w);
            }
            let rhs = rs.iter().map(|r| ctx.l1((r * &ones).as_slice())).product();
            Sides { lhs: ctx.l1(w.as_slice()), rhs }
        }
    };

    let mut w = nalgebra::DVector::from_column_slice(&us[ts.len()]);
    for (t, uj) in ts.iter().zip(us).rev() {
        w = t * w;
        w.iter_mut().zip(uj).for_each(|(x, y)| *x *= y);
    }
    let rhs = ts.iter().map(|t| ctx.op_norm(t)).collect::<Result<Vec<_>>>()?.into_iter().product();
    let unit_vectors = Sides { lhs: ctx.l1(w.as_slice()), rhs };

    Ok(AveragingReport { identity_error, product_of_averages, unit_vectors })
}

/// Exact comparison of the run count `r(s)` of a switching string with its
/// binomial stand-in `r'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingReport {
    pub n: usize,
    pub lam: f64,
    /// `P[r(s) + 1 = t]`, indexed by `t`.
    pub r_plus_one: Vec<f64>,
    /// `P[r' = t]`, indexed by `t`.
    pub r_prime: Vec<f64>,
    pub binomial_trials: u64,
    /// `min_t (P[r(s)+1 >= t] - P[r' >= t])`; domination is `>= 0`.
    pub min_margin: f64,
    /// `E[(r(s)+1)^{-1/2}]`.
    pub mean_inv_sqrt_r: f64,
    /// `E[r'^{-1/2}]`.
    pub mean_inv_sqrt_rprime: f64,
    /// `(E[1/r'])^{1/2}`.
    pub jensen: f64,
    /// `(1/(m p))^{1/2}` with `m` trials and `p = (1-lambda)^2`; absent when
    /// `m = 0` or `lambda = 1`.
    pub moment_bound: Option<f64>,
}

impl SwitchingReport {
    pub fn dominated(&self, tol: f64) -> bool {
        self.min_margin >= -tol
    }

    /// `E[(r+1)^{-1/2}] <= E[r'^{-1/2}] <= (E[1/r'])^{1/2} <= bound`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        self.mean_inv_sqrt_r <= self.mean_inv_sqrt_rprime + tol
            && self.mean_inv_sqrt_rprime <= self.jensen + tol
            && self.moment_bound.is_none_or(|b| self.jensen <= b + tol)
    }
}

fn binomial_pmf(m: u64, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; m as usize + 1];
    if p <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if p >= 1.0 {
        out[m as usize] = 1.0;
        return out;
    }
    let mut ln_c = 0.0f64;
    for j in 0..=m {
        if j > 0 {
            ln_c += ((m - j + 1) as f64).ln() - (j as f64).ln();
        }
        out[j as usize] = (ln_c + j as f64 * p.ln() + (m - j) as f64 * (1.0 - p).ln()).exp();
    }
    out
}

/// `s` ranges over `{0,1}^{n-1}` with `P[s] = prod lambda^{s_j}
/// (1-lambda)^{1-s_j}`; `r(s)` counts `j in 1..=n-2` with
/// `s_j = s_{j+1} = 0` whose shared coordinate `v_{j+1}` is in
/// `unit_mask`. `r' = B(floor(n/divisor) - 1, (1-lambda)^2) + 1`, with a
/// negative trial count read as zero.
pub fn switching_stats(n: usize, lam: f64, unit_mask: &[bool], divisor: usize) -> Result<SwitchingReport> {
    if n == 0 || n > MAX_SWITCHING_N {
        return Err(Error::BudgetExceeded { needed: 1u128 << n.min(127).saturating_sub(1), budget: 1u128 << (MAX_SWITCHING_N - 1) });
    }
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::OutOfRange { what: "lambda", value: lam });
    }
    if unit_mask.len() != n {
        return Err(Error::DimensionMismatch { what: "mask length", expected: n, found: unit_mask.len() });
    }
    if divisor == 0 {
        return Err(Error::OutOfRange { what: "divisor", value: 0.0 });
    }
    let bits = n - 1;
    let mut r_plus_one = vec![0.0f64; n + 1];
    for mask in 0u32..(1u32 << bits) {
        let s = |j: usize| (mask >> (j - 1)) & 1 == 1;
        let ones = mask.count_ones() as i32;
        let p = lam.powi(ones) * (1.0 - lam).powi(bits as i32 - ones);
        if p == 0.0 {
            continue;
        }
        let r = (1..n.saturating_sub(1)).filter(|&j| !s(j) && !s(j + 1) && unit_mask[j]).count();
        r_plus_one[r + 1] += p;
    }
    let trials = (n / divisor).saturating_sub(1) as u64;
    let q = (1.0 - lam) * (1.0 - lam);
    let pmf = binomial_pmf(trials, q);
    let mut r_prime = vec![0.0f64; trials as usize + 2];
    for (j, &m) in pmf.iter().enumerate() {
        r_prime[j + 1] = m;
    }

    let top = r_plus_one.len().max(r_prime.len());
    let tail = |d: &[f64], t: usize| d.iter().skip(t).sum::<f64>();
    let min_margin = (1..top).map(|t| tail(&r_plus_one, t) - tail(&r_prime, t)).fold(f64::INFINITY, f64::min);
    let inv_sqrt = |d: &[f64]| d.iter().enumerate().skip(1).map(|(t, m)| m / (t as f64).sqrt()).sum::<f64>();
    let mean_inv_sqrt_r = inv_sqrt(&r_plus_one);
    let mean_inv_sqrt_rprime = inv_sqrt(&r_prime);
    let jensen = r_prime.iter().enumerate().skip(1).map(|(t, m)| m / t as f64).sum::<f64>().sqrt();
    let moment_bound = if trials >= 1 && lam < 1.0 {
        Some(binomial_negative_moment(trials, q, 1)?.bound.sqrt())
    } else {
        None
    };
    Ok(SwitchingReport {
        n,
        lam,
        r_plus_one,
        r_prime,
        binomial_trials: trials,
        min_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
        mean_inv_sqrt_r,
        mean_inv_sqrt_rprime,
        jensen,
        moment_bound,
    })
}

/// Every mask on `n` coordinates with exactly `ceil(n/2)` entries set.
pub fn minimal_unit_masks(n: usize) -> Vec<Vec<bool>> {
    let want = n.div_ceil(2) as u32;
    (0u32..(1u32 << n))
        .filter(|m| m.count_ones() == want)
        .map(|m| (0..n).map(|i| (m >> i) & 1 == 1).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_independent_chain, make_two_state_chain};

    fn one(n: usize) -> Vec<Complex<f64>> {
        vec![Complex::new(1.0, 0.0); n]
    }

    #[test]
    fn single_state_char_fn() {
        let c = make_independent_chain(&[1.0]).unwrap();
        let s = SignSystem::new(&c, vec![vec![1], vec![-1], vec![1]]).unwrap();
        let w = WeightSystem::scalars(&[1.0, 2.0, 0.5], crate::WeightVariant::General).unwrap();
        let v = brute_force_char_fn(&c, &s, &w, 0.3).unwrap();
        let expect = Complex::from_polar(1.0, 2.0 * PI * 0.3 * (-0.5));
        assert!((v.as_complex() - expect).norm() < 1e-14);
        assert!((brute_force_char_fn(&c, &s, &w, 0.0).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn brute_force_two_state() {
        let c = make_two_state_chain(0.3).unwrap();
        let s = SignSystem::split_labeling(&c, 2).unwrap();
        let d = brute_force_distribution(&c, &s, &[1, 1]).unwrap();
        assert!((d.prob_at(0) - 0.65).abs() < 1e-15);
        assert!((d.prob_at(2) - 0.175).abs() < 1e-15);
    }

    #[test]
    fn t_set_examples() {
        assert_eq!(t_set(&[false]), vec![1, 2]);
        assert_eq!(t_set(&[true]), Vec::<usize>::new());
        assert_eq!(t_set(&[false, true, false, false]), vec![1, 4, 5]);
        for k in 1..10usize {
            for bits in 0u32..(1 << k) {
                let s: Vec<bool> = (0..k).map(|j| (bits >> j) & 1 == 1).collect();
                assert_eq!(t_set(&s), t_set_by_cases(&s));
            }
        }
    }

    #[test]
    fn holder_trivial_cases() {
        let mu = vec![0.3, 0.7];
        for lam in [0.0, 0.4, 1.0] {
            let inst = HolderInstance { mu: mu.clone(), lam, t: vec![CMatrix::zeros(2, 2)], u: vec![one(2), one(2)] };
            let r = holder_lhs_rhs(&inst).unwrap();
            assert!((r.lhs_l1 - (1.0 - lam)).abs() < 1e-14);
            assert!((r.rhs - (1.0 - lam)).abs() < 1e-14);
        }
    }

    #[test]
    fn holder_mean_zero_vector_breaks_the_l1_form() {
        // A = E (lambda = 0), T = A - E = 0, u_1 has mean zero. The product is
        // u_1 <u_2, mu>, whose L_1 norm is 1 while every right-hand term
        // carries the factor |<u_1, mu>| = 0.
        let mu = vec![0.5, 0.5];
        let u1 = vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)];
        let inst = HolderInstance { mu, lam: 0.0, t: vec![CMatrix::zeros(2, 2)], u: vec![u1, one(2)] };
        let r = holder_lhs_rhs(&inst).unwrap();
        assert!((r.lhs_l1 - 1.0).abs() < 1e-14);
        assert_eq!(r.rhs, 0.0);
        assert!(r.lhs_mean <= r.rhs + 1e-14);
    }

    #[test]
    fn averaging_trivial_cases() {
        let mu = vec![0.2, 0.3, 0.5];
        let r1 = to_complex(&make_independent_chain(&mu).unwrap().transition().clone());
        let rep = check_averaging_identities(&mu, &one(3), core::slice::from_ref(&r1), &[], &[one(3)]).unwrap();
        assert!(rep.identity_error < 1e-15);
        assert!((rep.product_of_averages.lhs - rep.product_of_averages.rhs).abs() < 1e-15);
        assert!(rep.holds(1e-12));
    }

    #[test]
    fn norms_and_op_norm() {
        let c = make_two_state_chain(0.3).unwrap();
        let ctx = MuNormContext::new(c.stationary()).unwrap();
        let t = to_complex(&(c.transition() - c.averaging_operator()));
        assert!((ctx.op_norm(&t).unwrap() - 0.3).abs() < 1e-12);
        let v = vec![Complex::new(3.0, 0.0), Complex::new(0.0, -1.0)];
        assert!(ctx.l1(&v) <= ctx.l2(&v) && ctx.l2(&v) <= ctx.linf(&v));
    }

    #[test]
    fn switching_trivial_cases() {
        let full = vec![true; 8];
        let r = switching_stats(8, 0.0, &full, 4).unwrap();
        assert_eq!(r.r_plus_one[7], 1.0);
        let r = switching_stats(8, 1.0, &full, 4).unwrap();
        assert_eq!(r.r_plus_one[1], 1.0);
        let r = switching_stats(10, 0.4, &[true; 10], 4).unwrap();
        assert!(r.dominated(1e-12) && r.chain_holds(1e-12), "{r:?}");
        assert!(switching_stats(14, 0.5, &[true; 14], 4).is_err());
    }

    #[test]
    fn minimal_masks() {
        assert_eq!(minimal_unit_masks(4).len(), 6);
        assert!(minimal_unit_masks(5).iter().all(|m| m.iter().filter(|&&b| b).count() == 3));
    }
}
