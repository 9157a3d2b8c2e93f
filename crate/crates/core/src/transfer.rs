//! Exact laws of `S = f_1(Y_1) v_1 + ... + f_n(Y_n) v_n` by transfer-matrix
//! products over the chain.
//!
//! Everything here works on *step values*: an `n x N` table `c[j][y]` giving
//! the contribution of step `j` when the chain sits in state `y`. For a sign
//! system and scalar weights `c[j][y] = f_j(y) v_j`; the expander generator
//! feeds block sums of vertex labels through the same machinery.
//!
//! The characteristic function is
//! `E[exp(2 pi i xi S)] = <mu, U_1 A U_2 A ... A U_n 1>` with
//! `U_j = diag(exp(2 pi i xi c[j][.]))`, evaluated right to left with `n - 1`
//! matrix-vector products.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
// Float supplies the math methods without std; it goes unused when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::chain::{MarkovChain, SignSystem, WeightSystem};
use crate::error::{Error, Result};
use crate::linalg::CompensatedSum;

/// Default bound on `N * n * width` for the floating-point DP.
pub const DEFAULT_CELL_BUDGET: u128 = 1_000_000_000;
/// Bound on `N * n * width` for the exact rational DP.
pub const RATIONAL_CELL_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharFnValue {
    pub re: f64,
    pub im: f64,
}

impl CharFnValue {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn as_complex(&self) -> Complex<f64> {
        Complex::new(self.re, self.im)
    }
}

impl From<Complex<f64>> for CharFnValue {
    fn from(z: Complex<f64>) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// `c[j][y] = f_j(y) * v_j` for scalar weights.
pub fn step_values(signs: &SignSystem, weights: &WeightSystem) -> Result<Vec<Vec<f64>>> {
    let v = weights.as_scalars()?;
    if v.len() != signs.n_steps() {
        return Err(Error::DimensionMismatch { what: "weight count", expected: signs.n_steps(), found: v.len() });
    }
    Ok(signs
        .functions()
        .iter()
        .zip(&v)
        .map(|(f, &w)| f.iter().map(|&s| s as f64 * w).collect())
        .collect())
}

/// Integer step values; fails on non-integer weights.
pub fn integer_step_values(signs: &SignSystem, weights: &WeightSystem) -> Result<Vec<Vec<i64>>> {
    let v = weights.as_integers()?;
    if v.len() != signs.n_steps() {
        return Err(Error::DimensionMismatch { what: "weight count", expected: signs.n_steps(), found: v.len() });
    }
    Ok(signs
        .functions()
        .iter()
        .zip(&v)
        .map(|(f, &w)| f.iter().map(|&s| s as i64 * w).collect())
        .collect())
}

fn check_steps<T>(chain: &MarkovChain, steps: &[Vec<T>]) -> Result<()> {
    let n = chain.n_states();
    for s in steps {
        if s.len() != n {
            return Err(Error::DimensionMismatch { what: "step value length", expected: n, found: s.len() });
        }
    }
    Ok(())
}

/// `<mu, U_1 A U_2 ... A U_n 1>` where `U_j = diag(phase(j, y))`.
fn transfer_product<P>(chain: &MarkovChain, n_steps: usize, mut phase: P) -> Complex<f64>
where
    P: FnMut(usize, usize) -> Complex<f64>,
{
    let n = chain.n_states();
    if n_steps == 0 {
        return Complex::new(1.0, 0.0);
    }
    let a = chain.transition();
    let mut w: Vec<Complex<f64>> = (0..n).map(|y| phase(n_steps - 1, y)).collect();
    let mut next = vec![Complex::zero(); n];
    for j in (0..n_steps - 1).rev() {
        for (y, out) in next.iter_mut().enumerate() {
            let mut acc = Complex::<f64>::zero();
            for (z, wz) in w.iter().enumerate() {
                acc += *wz * a[(y, z)];
            }
            *out = acc * phase(j, y);
        }
        core::mem::swap(&mut w, &mut next);
    }
    w.iter().zip(chain.stationary()).map(|(z, &m)| z * m).sum()
}

/// Characteristic function of the signed sum at frequency `xi`.
pub fn char_fn(chain: &MarkovChain, signs: &SignSystem, weights: &WeightSystem, xi: f64) -> Result<CharFnValue> {
    let steps = step_values(signs, weights)?;
    char_fn_steps(chain, &steps, xi)
}

pub fn char_fn_steps(chain: &MarkovChain, steps: &[Vec<f64>], xi: f64) -> Result<CharFnValue> {
    check_steps(chain, steps)?;
    let tau = core::f64::consts::TAU;
    Ok(transfer_product(chain, steps.len(), |j, y| Complex::from_polar(1.0, tau * xi * steps[j][y])).into())
}

/// Characteristic function at the `Z_p` frequency `xi / p`, with phases
/// reduced modulo `p` before scaling so large integer sums lose no accuracy.
pub fn char_fn_zp(chain: &MarkovChain, steps: &[Vec<i64>], xi: u64, p: u64) -> Result<CharFnValue> {
    check_steps(chain, steps)?;
    let tau = core::f64::consts::TAU;
    let pi = p as i128;
    Ok(transfer_product(chain, steps.len(), |j, y| {
        let r = ((xi as i128 * steps[j][y] as i128) % pi + pi) % pi;
        Complex::from_polar(1.0, tau * r as f64 / p as f64)
    })
    .into())
}

/// Exact law of an integer-valued signed sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SumDistribution {
    offset: i64,
    masses: Vec<f64>,
}

impl SumDistribution {
    pub fn from_masses(offset: i64, masses: Vec<f64>) -> Self {
        Self { offset, masses }
    }

    /// Smallest lattice point represented.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `(smallest, largest)` represented lattice point.
    pub fn span(&self) -> (i64, i64) {
        (self.offset, self.offset + self.masses.len() as i64 - 1)
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn prob_at(&self, s: i64) -> f64 {
        let idx = s - self.offset;
        if idx < 0 || idx as usize >= self.masses.len() {
            0.0
        } else {
            self.masses[idx as usize]
        }
    }

    /// `(point, mass)` pairs with nonzero mass, ascending.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0.0)
            .map(move |(i, &m)| (self.offset + i as i64, m))
    }

    /// Mass of the closed window `|s - x0| <= r`.
    pub fn window(&self, x0: f64, r: f64) -> f64 {
        if r < 0.0 || !x0.is_finite() {
            return 0.0;
        }
        let (lo, hi) = self.span();
        let a = (x0 - r).ceil().max(lo as f64);
        let b = (x0 + r).floor().min(hi as f64);
        if a > b {
            return 0.0;
        }
        let (a, b) = ((a as i64 - self.offset) as usize, (b as i64 - self.offset) as usize);
        self.masses[a..=b].iter().copied().collect::<CompensatedSum>().value()
    }

    /// `sup_{x0 in R}` of the closed-window mass, with a maximizing center.
    ///
    /// A closed interval of length `2r` holds at most `floor(2r) + 1`
    /// consecutive integers, and an integer-aligned window attains that, so a
    /// sliding sum over integer starts is exact.
    pub fn sup_window(&self, r: f64) -> (f64, f64) {
        if r < 0.0 || self.masses.is_empty() {
            return (0.0, 0.0);
        }
        let width = ((2.0 * r).floor() as usize + 1).min(self.masses.len());
        let mut best = (self.offset as f64 + r, f64::NEG_INFINITY);
        for start in 0..=(self.masses.len() - width) {
            let m = self.masses[start..start + width].iter().copied().collect::<CompensatedSum>().value();
            if m > best.1 {
                best = (self.offset as f64 + start as f64 + r, m);
            }
        }
        best
    }

    /// `max_s P(S = s)`.
    pub fn max_point(&self) -> (i64, f64) {
        self.masses
            .iter()
            .enumerate()
            .fold((self.offset, 0.0), |acc, (i, &m)| if m > acc.1 { (self.offset + i as i64, m) } else { acc })
    }

    /// `P(S = x0 mod p)`, summed from the exact masses.
    pub fn residue_mass(&self, x0: i64, p: u64) -> f64 {
        let p = p as i64;
        let target = x0.rem_euclid(p);
        self.support()
            .filter(|(s, _)| s.rem_euclid(p) == target)
            .map(|(_, m)| m)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Closed-window small-ball probability `P(|S - x0| <= r)`.
pub fn smallball_exact(dist: &SumDistribution, x0: f64, r: f64) -> f64 {
    dist.window(x0, r)
}

/// Range of every partial sum, plus the envelope `(lo, hi)` covering all of
/// them; the DP grid spans the envelope.
fn step_ranges(steps: &[Vec<i64>]) -> (i64, i64, Vec<(i64, i64)>) {
    let (mut plo, mut phi) = (0i64, 0i64);
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    let mut prefix = Vec::with_capacity(steps.len());
    for s in steps {
        plo += s.iter().copied().min().unwrap_or(0);
        phi += s.iter().copied().max().unwrap_or(0);
        prefix.push((plo, phi));
        lo = lo.min(plo);
        hi = hi.max(phi);
    }
    (lo, hi, prefix)
}

fn cell_count(chain: &MarkovChain, steps: &[Vec<i64>], width: i64) -> u128 {
    chain.n_states() as u128 * steps.len().max(1) as u128 * width as u128
}

/// Forward DP over `(step, state, partial sum)`.
pub fn exact_sum_distribution(
    chain: &MarkovChain,
    signs: &SignSystem,
    weights: &WeightSystem,
    budget: u128,
) -> Result<SumDistribution> {
    let steps = integer_step_values(signs, weights)?;
    exact_sum_distribution_steps(chain, &steps, budget)
}

pub fn exact_sum_distribution_steps(chain: &MarkovChain, steps: &[Vec<i64>], budget: u128) -> Result<SumDistribution> {
    check_steps(chain, steps)?;
    let n = chain.n_states();
    if steps.is_empty() {
        return Ok(SumDistribution { offset: 0, masses: vec![1.0] });
    }
    let (lo, hi, prefix) = step_ranges(steps);
    let width = hi - lo + 1;
    let cells = cell_count(chain, steps, width);
    if cells > budget {
        return Err(Error::BudgetExceeded { needed: cells, budget });
    }
    let w = width as usize;
    let a = chain.transition();
    let mu = chain.stationary();
    let mut cur = vec![0.0f64; n * w];
    let mut next = vec![0.0f64; n * w];
    for y in 0..n {
        cur[y * w + (steps[0][y] - lo) as usize] += mu[y];
    }
    for j in 1..steps.len() {
        let (plo, phi) = prefix[j - 1];
        let (a0, a1) = ((plo - lo) as usize, (phi - lo) as usize);
        next.iter_mut().for_each(|x| *x = 0.0);
        for y2 in 0..n {
            let shift = steps[j][y2];
            for idx in a0..=a1 {
                let mut acc = CompensatedSum::new();
                for y in 0..n {
                    let m = cur[y * w + idx];
                    if m != 0.0 {
                        acc.add(m * a[(y, y2)]);
                    }
                }
                let v = acc.value();
                if v != 0.0 {
                    let target = (idx as i64 + shift) as usize;
                    next[y2 * w + target] = v;
                }
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    let (flo, fhi) = prefix[prefix.len() - 1];
    let masses = ((flo - lo) as usize..=(fhi - lo) as usize)
        .map(|i| (0..n).map(|y| cur[y * w + i]).collect::<CompensatedSum>().value())
        .collect();
    Ok(SumDistribution { offset: flo, masses })
}

/// Largest denominator tried when reading a float as a short fraction.
const RATIONAL_MAX_DENOMINATOR: i64 = 1_000_000;

/// The first continued-fraction convergent within 8 ulps of `x` whose
/// denominator is at most `RATIONAL_MAX_DENOMINATOR`, else the exact binary
/// fraction of `x`. Decimal inputs such as `0.35` and computed values such as
/// `0.5000000000000001` both come back as the fraction they stand for.
pub fn rationalize(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::PreconditionViolated("non-finite entry".into()));
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h, k) = (a * h1 + h0, a * k1 + k0);
        if k > RATIONAL_MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        if (x - h as f64 / k as f64).abs() <= 8.0 * f64::EPSILON * x.abs() {
            return Ok(BigRational::new(BigInt::from(h), BigInt::from(k)));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    BigRational::from_float(x).ok_or(Error::PreconditionViolated("non-finite entry".into()))
}

/// Exact rational law; transition and stationary entries are read through
/// [`rationalize`].
pub fn exact_sum_distribution_rational(chain: &MarkovChain, steps: &[Vec<i64>]) -> Result<Vec<(i64, BigRational)>> {
    check_steps(chain, steps)?;
    let n = chain.n_states();
    if steps.is_empty() {
        return Ok(vec![(0, BigRational::from_integer(BigInt::from(1)))]);
    }
    let (lo, hi, prefix) = step_ranges(steps);
    let width = hi - lo + 1;
    let cells = cell_count(chain, steps, width);
    if cells > RATIONAL_CELL_BUDGET {
        return Err(Error::BudgetExceeded { needed: cells, budget: RATIONAL_CELL_BUDGET });
    }
    let to_q = rationalize;
    let a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| to_q(chain.transition()[(i, j)])).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let w = width as usize;
    let mut cur = vec![BigRational::zero(); n * w];
    for y in 0..n {
        cur[y * w + (steps[0][y] - lo) as usize] += to_q(chain.stationary()[y])?;
    }
    for j in 1..steps.len() {
        let (plo, phi) = prefix[j - 1];
        let mut next = vec![BigRational::zero(); n * w];
        for y2 in 0..n {
            for idx in (plo - lo) as usize..=(phi - lo) as usize {
                let mut acc = BigRational::zero();
                for y in 0..n {
                    let m = &cur[y * w + idx];
                    if !m.is_zero() && !a[y][y2].is_zero() {
                        acc += m * &a[y][y2];
                    }
                }
                if !acc.is_zero() {
                    next[y2 * w + (idx as i64 + steps[j][y2]) as usize] = acc;
                }
            }
        }
        cur = next;
    }
    let (flo, fhi) = prefix[prefix.len() - 1];
    let mut out = Vec::new();
    for i in (flo - lo) as usize..=(fhi - lo) as usize {
        let mut total = BigRational::zero();
        for y in 0..n {
            total += &cur[y * w + i];
        }
        if !total.is_zero() {
            out.push((lo + i as i64, total));
        }
    }
    Ok(out)
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime strictly greater than `2 * max v_i`.
pub fn find_prime(weights: &WeightSystem) -> Result<u64> {
    let v = weights.as_integers()?;
    if let Some(index) = v.iter().position(|&x| x < 1) {
        return Err(Error::InvalidWeights { variant: "distinct-positive-integers", index });
    }
    let max = v.iter().copied().max().unwrap_or(0) as u64;
    let mut p = 2 * max + 1;
    while !is_prime(p) {
        p += 1;
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZpAverage {
    pub prime: u64,
    /// `(1/p) sum_{xi in Z_p} |E[exp(2 pi i xi S / p)]|`.
    pub average: f64,
    /// `P(S = x0 mod p)` by mod-`p` Fourier inversion.
    pub residue_probability: f64,
}

/// Averaged transfer-product modulus over `Z_p`, plus the Fourier-inverted
/// residue probability that dominates `P(S = x0)`.
pub fn zp_fourier_average(
    chain: &MarkovChain,
    signs: &SignSystem,
    weights: &WeightSystem,
    p: u64,
    x0: i64,
) -> Result<ZpAverage> {
    let steps = integer_step_values(signs, weights)?;
    let max = weights.as_integers()?.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    if p < max {
        return Err(Error::PreconditionViolated(alloc::format!("prime {p} is smaller than max weight {max}")));
    }
    zp_fourier_average_steps(chain, &steps, p, x0)
}

pub fn zp_fourier_average_steps(chain: &MarkovChain, steps: &[Vec<i64>], p: u64, x0: i64) -> Result<ZpAverage> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let tau = core::f64::consts::TAU;
    let target = x0.rem_euclid(p as i64) as u64;
    let mut average = CompensatedSum::new();
    let mut residue = CompensatedSum::new();
    for xi in 0..p {
        let phi = char_fn_zp(chain, steps, xi, p)?.as_complex();
        average.add(phi.norm());
        let r = ((xi as u128 * target as u128) % p as u128) as f64;
        residue.add((Complex::from_polar(1.0, -tau * r / p as f64) * phi).re);
    }
    Ok(ZpAverage {
        prime: p,
        average: average.value() / p as f64,
        residue_probability: residue.value() / p as f64,
    })
}

/// `(1/p) sum_{xi in Z_p} prod_j |cos(2 pi xi v_j / p)|`, the i.i.d.
/// Rademacher specialization of [`zp_fourier_average`].
pub fn cosine_average_zp(weights: &[i64], p: u64) -> f64 {
    let tau = core::f64::consts::TAU;
    let mut total = CompensatedSum::new();
    for xi in 0..p {
        let prod: f64 = weights
            .iter()
            .map(|&v| {
                let r = ((xi as i128 * v as i128).rem_euclid(p as i128)) as f64;
                (tau * r / p as f64).cos().abs()
            })
            .product();
        total.add(prod);
    }
    total.value() / p as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_recovers_short_fractions() {
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(rationalize(0.35).unwrap(), q(7, 20));
        assert_eq!(rationalize(0.5000000000000001).unwrap(), q(1, 2));
        assert_eq!(rationalize(1.0 / 3.0).unwrap(), q(1, 3));
        assert_eq!(rationalize(-0.25).unwrap(), q(-1, 4));
        let pi = rationalize(core::f64::consts::PI).unwrap();
        assert_eq!(pi, BigRational::from_float(core::f64::consts::PI).unwrap());
        assert!(rationalize(f64::NAN).is_err());
    }
    use crate::chain::{make_independent_chain, make_two_state_chain, WeightVariant};

    fn uniform() -> MarkovChain {
        make_independent_chain(&[0.5, 0.5]).unwrap()
    }

    #[test]
    fn char_fn_at_origin_is_one() {
        let c = make_two_state_chain(0.3).unwrap();
        let s = SignSystem::split_labeling(&c, 3).unwrap();
        let w = WeightSystem::integers(&[1, 2, 5]).unwrap();
        let v = char_fn(&c, &s, &w, 0.0).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn single_balanced_factor_vanishes_at_quarter() {
        let c = uniform();
        let s = SignSystem::split_labeling(&c, 1).unwrap();
        let v = char_fn(&c, &s, &WeightSystem::all_ones(1), 0.25).unwrap();
        assert!(v.modulus() < 1e-15);
    }

    #[test]
    fn two_step_remark_chain_by_hand() {
        // P(S=0) = (1+lam)/2, P(S=+-2) = (1-lam)/4 for lam = 0.3.
        let c = make_two_state_chain(0.3).unwrap();
        let s = SignSystem::split_labeling(&c, 2).unwrap();
        let d = exact_sum_distribution(&c, &s, &WeightSystem::all_ones(2), DEFAULT_CELL_BUDGET).unwrap();
        assert!((d.prob_at(0) - 0.65).abs() < 1e-15);
        assert!((d.prob_at(2) - 0.175).abs() < 1e-15);
        assert!((d.prob_at(-2) - 0.175).abs() < 1e-15);
        assert_eq!(d.prob_at(1), 0.0);
        // phi(xi) = 0.65 + 0.35 cos(4 pi xi).
        let xi = 0.1;
        let phi = char_fn(&c, &s, &WeightSystem::all_ones(2), xi).unwrap();
        let expect = 0.65 + 0.35 * (4.0 * core::f64::consts::PI * xi).cos();
        assert!((phi.re - expect).abs() < 1e-14 && phi.im.abs() < 1e-14);
    }

    #[test]
    fn independent_four_step_binomial() {
        let c = uniform();
        let s = SignSystem::split_labeling(&c, 4).unwrap();
        let d = exact_sum_distribution(&c, &s, &WeightSystem::all_ones(4), DEFAULT_CELL_BUDGET).unwrap();
        assert!((d.prob_at(0) - 0.375).abs() < 1e-15);
        assert!((smallball_exact(&d, 0.0, 1.0) - 0.375).abs() < 1e-15);
        assert!((smallball_exact(&d, 0.0, 100.0) - 1.0).abs() < 1e-15);
        assert_eq!(smallball_exact(&d, 50.0, 1.0), 0.0);
        assert!((d.total() - 1.0).abs() < 1e-15);
        // Window centered between lattice points takes two neighbours.
        assert!((d.window(1.0, 1.0) - (0.375 + 0.25)).abs() < 1e-15);
        assert!((d.sup_window(1.0).1 - 0.625).abs() < 1e-15);
    }

    #[test]
    fn alternating_chain_cancels() {
        let c = make_two_state_chain(1.0).unwrap();
        let s = SignSystem::split_labeling(&c, 2).unwrap();
        let d = exact_sum_distribution(&c, &s, &WeightSystem::all_ones(2), DEFAULT_CELL_BUDGET).unwrap();
        assert_eq!(d.prob_at(0), 1.0);
    }

    #[test]
    fn budget_and_integrality_errors() {
        let c = uniform();
        let s = SignSystem::split_labeling(&c, 3).unwrap();
        let w = WeightSystem::integers(&[1, 1000, 7]).unwrap();
        assert!(matches!(exact_sum_distribution(&c, &s, &w, 10), Err(Error::BudgetExceeded { .. })));
        let w = WeightSystem::scalars(&[1.0, 0.5, 2.0], WeightVariant::General).unwrap();
        assert!(matches!(
            exact_sum_distribution(&c, &s, &w, DEFAULT_CELL_BUDGET),
            Err(Error::NonIntegerWeights { index: 1, .. })
        ));
        let short = WeightSystem::all_ones(2);
        assert!(matches!(char_fn(&c, &s, &short, 0.1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rational_mode_is_exact() {
        let c = uniform();
        let s = SignSystem::split_labeling(&c, 4).unwrap();
        let steps = integer_step_values(&s, &WeightSystem::all_ones(4)).unwrap();
        let d = exact_sum_distribution_rational(&c, &steps).unwrap();
        let zero = d.iter().find(|(s, _)| *s == 0).unwrap();
        assert_eq!(zero.1, BigRational::new(BigInt::from(3), BigInt::from(8)));
    }

    #[test]
    fn primes() {
        let p = |v: &[i64]| find_prime(&WeightSystem::integers(v).unwrap()).unwrap();
        assert_eq!(p(&[1, 2, 3]), 7);
        assert_eq!(p(&[1]), 3);
        assert_eq!(p(&(1..=10).collect::<Vec<_>>()), 23);
        assert!(is_prime(2) && is_prime(97) && !is_prime(91) && !is_prime(1));
    }

    #[test]
    fn zp_average_hand_sum_and_empty_product() {
        let c = uniform();
        let s = SignSystem::split_labeling(&c, 1).unwrap();
        let z = zp_fourier_average(&c, &s, &WeightSystem::all_ones(1), 3, 0).unwrap();
        assert!((z.average - 2.0 / 3.0).abs() < 1e-15);
        assert!((cosine_average_zp(&[1], 3) - 2.0 / 3.0).abs() < 1e-15);
        let empty = zp_fourier_average_steps(&c, &[], 5, 0).unwrap();
        assert!((empty.average - 1.0).abs() < 1e-15);
        assert!(matches!(zp_fourier_average_steps(&c, &[], 9, 0), Err(Error::NotPrime(9))));
    }
}
