//! Monte Carlo small-ball estimates for general weights, and the marginal
//! law of one coordinate of a uniform random unit vector.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;
// Float supplies the math methods without std; it goes unused when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chain::{MarkovChain, SignSystem, WeightSystem, WeightVariant};
use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::rng::{counter_rng, streams};
use crate::special::{clopper_pearson, ln_gamma};

/// Confidence level of every interval reported by this module.
pub const CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub hits: u64,
    pub samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_hits(hits: u64, samples: u64, seed: u64) -> Self {
        let (lo, hi) = clopper_pearson(hits, samples, CONFIDENCE);
        let estimate = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        Self { estimate, hits, samples, ci_low: lo.min(estimate), ci_high: hi.max(estimate), seed }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    match cumulative.iter().position(|&c| u < c) {
        Some(i) => i,
        // Row sums can fall a hair short of 1; land on the last state with
        // positive mass.
        None => cumulative
            .windows(2)
            .rposition(|w| w[1] > w[0])
            .map(|i| i + 1)
            .unwrap_or(0),
    }
}

/// Draws state paths `Y_1 ~ mu, Y_{i+1} ~ A(Y_i, .)`; path `i` uses the
/// counter stream `(seed, SIGN_PATHS, i)`.
#[derive(Debug, Clone)]
pub struct PathSampler {
    stationary_cdf: Vec<f64>,
    row_cdfs: Vec<Vec<f64>>,
    seed: u64,
}

impl PathSampler {
    pub fn new(chain: &MarkovChain, seed: u64) -> Self {
        let mut acc = 0.0;
        let stationary_cdf = chain
            .stationary()
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Self { stationary_cdf, row_cdfs: chain.cumulative_rows(), seed }
    }

    /// Writes the `index`-th path of length `out.len()` into `out`.
    pub fn path_into(&self, index: u64, out: &mut [usize]) {
        let mut rng = counter_rng(self.seed, streams::SIGN_PATHS, index);
        let mut y = 0usize;
        for (i, slot) in out.iter_mut().enumerate() {
            let u: f64 = rng.random();
            y = if i == 0 { pick(&self.stationary_cdf, u) } else { pick(&self.row_cdfs[y], u) };
            *slot = y;
        }
    }
}

/// Stream of `count` sign vectors `(f_1(Y_1), ..., f_n(Y_n))`.
pub fn sample_signs<'a>(
    chain: &MarkovChain,
    signs: &'a SignSystem,
    count: u64,
    seed: u64,
) -> impl Iterator<Item = Vec<i8>> + 'a {
    let sampler = PathSampler::new(chain, seed);
    let n = signs.n_steps();
    (0..count).map(move |i| {
        let mut path = vec![0usize; n];
        sampler.path_into(i, &mut path);
        path.iter().zip(signs.functions()).map(|(&y, f)| f[y]).collect()
    })
}

/// Fraction of sampled sums inside the closed ball `||S - x0|| <= r`.
pub fn smallball_mc(
    chain: &MarkovChain,
    signs: &SignSystem,
    weights: &WeightSystem,
    x0: &[f64],
    r: f64,
    count: u64,
    seed: u64,
) -> Result<McEstimate> {
    if !(r >= 0.0) {
        return Err(Error::OutOfRange { what: "radius", value: r });
    }
    let d = weights.dim();
    if x0.len() != d {
        return Err(Error::DimensionMismatch { what: "center dimension", expected: d, found: x0.len() });
    }
    if weights.len() != signs.n_steps() {
        return Err(Error::DimensionMismatch { what: "weight count", expected: signs.n_steps(), found: weights.len() });
    }
    let sampler = PathSampler::new(chain, seed);
    let n = signs.n_steps();
    let mut path = vec![0usize; n];
    let mut sum = vec![0.0f64; d];
    let r2 = r * r;
    let mut hits = 0u64;
    for i in 0..count {
        sampler.path_into(i, &mut path);
        sum.copy_from_slice(x0);
        sum.iter_mut().for_each(|s| *s = -*s);
        for ((&y, f), v) in path.iter().zip(signs.functions()).zip(weights.vectors()) {
            let e = f[y] as f64;
            sum.iter_mut().zip(v).for_each(|(s, &x)| *s += e * x);
        }
        if sum.iter().map(|x| x * x).sum::<f64>() <= r2 {
            hits += 1;
        }
    }
    Ok(McEstimate::from_hits(hits, count, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// `log int_0^{pi/2} cos^m(theta) d theta`.
fn ln_wallis(m: f64) -> f64 {
    0.5 * PI.ln() + ln_gamma((m + 1.0) / 2.0) - ln_gamma(m / 2.0 + 1.0) - 2f64.ln()
}

/// `P(|v_1| >= t)` for `v` uniform on the unit sphere in `R^d`.
///
/// The density of `v_1` is proportional to `(1 - s^2)^{(d-3)/2}`; with
/// `s = sin(theta)` the tail becomes `int_{asin t}^{pi/2} cos^{d-2}` over its
/// total, which is smooth even at `d = 2`.
pub fn first_coord_tail(d: usize, t: f64, mode: TailMode) -> Result<f64> {
    match mode {
        TailMode::Exact => first_coord_tail_exact(d, t),
        TailMode::MonteCarlo { samples, seed } => Ok(first_coord_tail_mc(d, t, samples, seed)?.estimate),
    }
}

pub fn first_coord_tail_exact(d: usize, t: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    if t <= 0.0 {
        return Ok(1.0);
    }
    if t > 1.0 {
        return Ok(0.0);
    }
    if d == 1 {
        return Ok(1.0);
    }
    let m = (d - 2) as i32;
    let theta0 = t.asin();
    let numer = Quadrature::default().integrate(|th| th.cos().powi(m), theta0, PI / 2.0, &[])?;
    Ok((numer / ln_wallis(m as f64).exp()).clamp(0.0, 1.0))
}

/// Uniform random unit vector in `R^d`; draw `index` of the unit-vector
/// stream under `seed`.
pub fn random_unit_vector(d: usize, seed: u64, index: u64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let mut rng = counter_rng(seed, streams::UNIT_VECTORS, index);
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(g.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// `n` independent uniform unit vectors in `R^d` as a general weight system.
pub fn random_unit_weights(n: usize, d: usize, seed: u64) -> Result<WeightSystem> {
    let v = (0..n as u64).map(|i| random_unit_vector(d, seed, i)).collect::<Result<Vec<_>>>()?;
    WeightSystem::new(d, v, WeightVariant::General)
}

pub fn first_coord_tail_mc(d: usize, t: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let mut hits = 0u64;
    let mut g = vec![0.0f64; d];
    for i in 0..samples {
        let mut rng = counter_rng(seed, streams::UNIT_VECTORS, i);
        g.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && g[0].abs() / norm >= t {
            hits += 1;
        }
    }
    Ok(McEstimate::from_hits(hits, samples, seed))
}

/// Median of `|v_1|`: the `t` with `P(|v_1| >= t) = 1/2`.
pub fn first_coord_median(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if first_coord_tail_exact(d, mid)? >= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Smallest `C` with `P(|v_1| >= 1/(C sqrt(d))) >= 1/2` in dimension `d`.
pub fn coord_constant(d: usize) -> Result<f64> {
    Ok(1.0 / (first_coord_median(d)? * (d as f64).sqrt()))
}
