//! Expander-walk sign generator.
//!
//! The vertex set of the expander is `{-1, 1}^k`: vertex `v` in `0..2^k` is
//! labeled by its `k` bits read big-endian, bit `0` mapping to `+1` and bit
//! `1` to `-1`. A walk of `n/k` vertices yields `n` signs by concatenating the
//! labels, and the multiset `D` of all walks (uniform start, uniform edge slot
//! at every step) is the generator's output distribution.
//!
//! The concrete expander is the Margulis-Gabber-Galil degree-8 multigraph on
//! `Z_m x Z_m`, `m = 2^{k/2}`, with vertex `x * m + y` (first coordinate in
//! the high bits). Edge slots `0..8` follow
//! `(x + 2y, y), (x - 2y, y), (x + 2y + 1, y), (x - 2y - 1, y),`
//! `(x, y + 2x), (x, y - 2x), (x, y + 2x + 1), (x, y - 2x - 1)`,
//! each map paired with its inverse so the edge multiset is symmetric.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
// Float supplies the math methods without std; it goes unused when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{counter_rng, streams};
use crate::sampler::McEstimate;

/// Graphs up to this many vertices are certified by a dense eigensolve.
pub const DENSE_CERTIFY_LIMIT: usize = 1 << 11;
/// Largest graph `certify_lambda` accepts.
pub const CERTIFY_LIMIT: usize = 1 << 14;
/// Default bound on the number of walks `enumerate_walks` will visit.
pub const DEFAULT_WALK_BUDGET: u128 = 100_000_000;
/// Literature bound `5 sqrt(2) / 8` on the normalized second eigenvalue of
/// the MGG family.
pub const MGG_LAMBDA_BOUND: f64 = 0.883_883_476_483_184_4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certification {
    Uncertified,
    /// Dense symmetric eigendecomposition of `A - J`.
    Dense(f64),
    /// Lanczos estimate of `||A - J||` with the residual of its Ritz pair.
    Lanczos { value: f64, residual: f64 },
}

impl Certification {
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Certification::Uncertified => None,
            Certification::Dense(v) => Some(v),
            Certification::Lanczos { value, .. } => Some(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpanderGraph {
    k: u32,
    degree: usize,
    neighbors: Vec<u32>,
    certification: Certification,
}

impl ExpanderGraph {
    /// Build from neighbor lists; vertex count must be `2^k`, every list must
    /// have the same length, and the edge multiset must be symmetric.
    pub fn from_neighbor_lists(k: u32, lists: &[Vec<u32>]) -> Result<Self> {
        if k == 0 || k > 30 {
            return Err(Error::InvalidGraph(format!("label length k = {k} is out of range")));
        }
        let n = 1usize << k;
        if lists.len() != n {
            return Err(Error::InvalidGraph(format!("expected {n} neighbor lists, found {}", lists.len())));
        }
        let degree = lists[0].len();
        if degree == 0 {
            return Err(Error::InvalidGraph("degree must be positive".into()));
        }
        let mut neighbors = Vec::with_capacity(n * degree);
        for (v, l) in lists.iter().enumerate() {
            if l.len() != degree {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} has {} edge slots, expected {degree}",
                    l.len()
                )));
            }
            if let Some(&bad) = l.iter().find(|&&u| u as usize >= n) {
                return Err(Error::InvalidGraph(format!("vertex {v} lists out-of-range neighbor {bad}")));
            }
            neighbors.extend_from_slice(l);
        }
        let g = Self { k, degree, neighbors, certification: Certification::Uncertified };
        g.check_symmetric()?;
        Ok(g)
    }

    fn check_symmetric(&self) -> Result<()> {
        let mut forward: Vec<(u32, u32)> = Vec::with_capacity(self.neighbors.len());
        for v in 0..self.n_vertices() {
            for &u in self.neighbors_of(v) {
                forward.push((v as u32, u));
            }
        }
        let mut backward: Vec<(u32, u32)> = forward.iter().map(|&(a, b)| (b, a)).collect();
        forward.sort_unstable();
        backward.sort_unstable();
        if let Some(i) = (0..forward.len()).find(|&i| forward[i] != backward[i]) {
            return Err(Error::InvalidGraph(format!(
                "edge multiset is not symmetric near {} -> {}",
                forward[i].0, forward[i].1
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_vertices(&self) -> usize {
        1usize << self.k
    }

    pub fn neighbors_of(&self, v: usize) -> &[u32] {
        &self.neighbors[v * self.degree..(v + 1) * self.degree]
    }

    pub fn neighbor(&self, v: usize, slot: usize) -> usize {
        self.neighbors[v * self.degree + slot] as usize
    }

    pub fn neighbor_lists(&self) -> Vec<Vec<u32>> {
        (0..self.n_vertices()).map(|v| self.neighbors_of(v).to_vec()).collect()
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    pub fn certified_lambda(&self) -> Option<f64> {
        self.certification.lambda()
    }

    /// `+-1` label of vertex `v`, big-endian.
    pub fn label(&self, v: usize) -> impl Iterator<Item = i8> + '_ {
        let k = self.k;
        (0..k).map(move |i| if (v >> (k - 1 - i)) & 1 == 0 { 1 } else { -1 })
    }

    /// Normalized adjacency matrix (dense).
    pub fn normalized_adjacency(&self) -> DMatrix<f64> {
        let n = self.n_vertices();
        let mut a = DMatrix::zeros(n, n);
        let w = 1.0 / self.degree as f64;
        for v in 0..n {
            for &u in self.neighbors_of(v) {
                a[(v, u as usize)] += w;
            }
        }
        a
    }

    /// Compute and store `||A - J||`.
    pub fn certify_lambda(&mut self) -> Result<f64> {
        let n = self.n_vertices();
        if n > CERTIFY_LIMIT {
            return Err(Error::TooLarge { vertices: n, limit: CERTIFY_LIMIT });
        }
        if n <= DENSE_CERTIFY_LIMIT {
            let a = self.normalized_adjacency();
            let j = DMatrix::from_element(n, n, 1.0 / n as f64);
            let lam = linalg::spectral_radius_symmetric(&(a - j))?;
            self.certification = Certification::Dense(lam);
            return Ok(lam);
        }
        let w = 1.0 / self.degree as f64;
        let est = linalg::lanczos_spectral_radius(
            n,
            |x, y| {
                for (v, out) in y.iter_mut().enumerate() {
                    *out = self.neighbors_of(v).iter().map(|&u| x[u as usize]).sum::<f64>() * w;
                }
            },
            true,
            600,
            1e-10,
            streams::LANCZOS_START,
        )?;
        self.certification = Certification::Lanczos { value: est.value, residual: est.residual };
        Ok(est.value)
    }

    /// The random walk on this graph as a Markov chain with uniform
    /// stationary distribution.
    pub fn as_markov_chain(&self) -> Result<MarkovChain> {
        let n = self.n_vertices();
        MarkovChain::from_matrix(self.normalized_adjacency(), Some(&vec![1.0 / n as f64; n]))
    }
}

/// Margulis-Gabber-Galil degree-8 expander on `2^k` vertices.
pub fn build_mgg_expander(k: u32) -> Result<ExpanderGraph> {
    if !k.is_multiple_of(2) || k == 0 {
        return Err(Error::OddK(k));
    }
    if k > 30 {
        return Err(Error::InvalidGraph(format!("k = {k} is too large")));
    }
    let m = 1u64 << (k / 2);
    let mask = m - 1;
    let n = (m * m) as usize;
    let mut neighbors = Vec::with_capacity(n * 8);
    let id = |x: u64, y: u64| ((x & mask) * m + (y & mask)) as u32;
    for v in 0..n as u64 {
        let (x, y) = (v / m, v % m);
        // Wrapping arithmetic mod a power of two is reduction by the mask.
        let (x2, y2) = (x.wrapping_mul(2), y.wrapping_mul(2));
        neighbors.extend_from_slice(&[
            id(x.wrapping_add(y2), y),
            id(x.wrapping_sub(y2), y),
            id(x.wrapping_add(y2).wrapping_add(1), y),
            id(x.wrapping_sub(y2).wrapping_sub(1), y),
            id(x, y.wrapping_add(x2)),
            id(x, y.wrapping_sub(x2)),
            id(x, y.wrapping_add(x2).wrapping_add(1)),
            id(x, y.wrapping_sub(x2).wrapping_sub(1)),
        ]);
    }
    let g = ExpanderGraph { k, degree: 8, neighbors, certification: Certification::Uncertified };
    debug_assert!(g.check_symmetric().is_ok());
    Ok(g)
}

/// A generator instance: walks of `n / k` vertices on `graph`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrgSpec {
    graph: ExpanderGraph,
    n: usize,
}

impl PrgSpec {
    pub fn new(graph: ExpanderGraph, n: usize) -> Result<Self> {
        let k = graph.k() as usize;
        if n == 0 || !n.is_multiple_of(k) {
            return Err(Error::IndivisibleLength { n, k });
        }
        Ok(Self { graph, n })
    }

    pub fn graph(&self) -> &ExpanderGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.n / self.graph.k() as usize
    }

    /// `|D| = 2^k * degree^{n/k - 1}`, counting walk multiplicity.
    pub fn walk_count(&self) -> u128 {
        let mut c: u128 = 1u128 << self.graph.k();
        for _ in 1..self.blocks() {
            c = c.saturating_mul(self.graph.degree() as u128);
        }
        c
    }

    /// `log2 |D| = k + (n/k - 1) log2(degree)`.
    pub fn log2_size(&self) -> f64 {
        self.graph.k() as f64 + (self.blocks() - 1) as f64 * (self.graph.degree() as f64).log2()
    }

    /// `c[j][v] = sum_l label(v)_l * w_{jk + l}`: the contribution of block
    /// `j` when the walk is at vertex `v`.
    pub fn block_values(&self, weights: &[f64]) -> Result<Vec<Vec<f64>>> {
        if weights.len() != self.n {
            return Err(Error::DimensionMismatch { what: "weight count", expected: self.n, found: weights.len() });
        }
        let k = self.graph.k() as usize;
        Ok((0..self.blocks())
            .map(|j| {
                (0..self.graph.n_vertices())
                    .map(|v| self.graph.label(v).zip(&weights[j * k..(j + 1) * k]).map(|(s, &w)| s as f64 * w).sum())
                    .collect()
            })
            .collect())
    }
}

/// Every walk, each with probability `1 / |D|`.
pub struct WalkIter<'a> {
    spec: &'a PrgSpec,
    start: usize,
    slots: Vec<usize>,
    done: bool,
    weight: f64,
}

impl Iterator for WalkIter<'_> {
    type Item = (Vec<i8>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let g = self.spec.graph();
        let mut out = Vec::with_capacity(self.spec.n());
        let mut v = self.start;
        out.extend(g.label(v));
        for &s in &self.slots {
            v = g.neighbor(v, s);
            out.extend(g.label(v));
        }
        // Odometer over edge slots, then start vertices.
        let mut i = self.slots.len();
        loop {
            if i == 0 {
                self.start += 1;
                if self.start == g.n_vertices() {
                    self.done = true;
                }
                break;
            }
            i -= 1;
            self.slots[i] += 1;
            if self.slots[i] < g.degree() {
                break;
            }
            self.slots[i] = 0;
        }
        Some((out, self.weight))
    }
}

pub fn enumerate_walks(spec: &PrgSpec, budget: u128) -> Result<WalkIter<'_>> {
    let count = spec.walk_count();
    if count > budget {
        return Err(Error::BudgetExceeded { needed: count, budget });
    }
    Ok(WalkIter { spec, start: 0, slots: vec![0; spec.blocks() - 1], done: false, weight: 1.0 / count as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrgMode {
    Exact { budget: u128 },
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrgProbability {
    Exact { probability: f64, hits: u128, walks: u128 },
    Sampled(McEstimate),
}

impl PrgProbability {
    pub fn value(&self) -> f64 {
        match self {
            PrgProbability::Exact { probability, .. } => *probability,
            PrgProbability::Sampled(e) => e.estimate,
        }
    }
}

/// `P(|eps . v - x0| <= r)` for `eps` uniform over the walk multiset.
///
/// The last `padding` weights are exempt from the `v_i >= 1` hypothesis so
/// that zero-weight padding can make `n` a multiple of `k`.
pub fn prg_smallball(
    spec: &PrgSpec,
    weights: &[f64],
    padding: usize,
    x0: f64,
    r: f64,
    mode: PrgMode,
) -> Result<PrgProbability> {
    let checked = weights.len().saturating_sub(padding);
    if let Some(i) = weights[..checked].iter().position(|&w| !(w >= 1.0)) {
        return Err(Error::HypothesisViolated(format!("weight v_{} = {} is below 1", i + 1, weights[i])));
    }
    if !(r >= 0.0) {
        return Err(Error::OutOfRange { what: "radius", value: r });
    }
    let blocks = spec.block_values(weights)?;
    let g = spec.graph();
    let inside = |s: f64| (s - x0).abs() <= r;
    match mode {
        PrgMode::Exact { budget } => {
            let walks = spec.walk_count();
            if walks > budget {
                return Err(Error::BudgetExceeded { needed: walks, budget });
            }
            let depth = blocks.len();
            let mut hits: u128 = 0;
            // Depth-first over (vertex, partial sum) with an explicit stack.
            let mut stack: Vec<(usize, usize, f64)> = Vec::new();
            for v in 0..g.n_vertices() {
                stack.push((v, 0, blocks[0][v]));
                while let Some((u, j, s)) = stack.pop() {
                    if j + 1 == depth {
                        if inside(s) {
                            hits += 1;
                        }
                        continue;
                    }
                    for &w in g.neighbors_of(u) {
                        stack.push((w as usize, j + 1, s + blocks[j + 1][w as usize]));
                    }
                }
            }
            Ok(PrgProbability::Exact { probability: hits as f64 / walks as f64, hits, walks })
        }
        PrgMode::Sampled { samples, seed } => {
            let mut hits = 0u64;
            for i in 0..samples {
                let mut rng = counter_rng(seed, streams::EXPANDER_WALKS, i);
                let mut v = rng.random_range(0..g.n_vertices());
                let mut s = blocks[0][v];
                for b in &blocks[1..] {
                    v = g.neighbor(v, rng.random_range(0..g.degree()));
                    s += b[v];
                }
                if inside(s) {
                    hits += 1;
                }
            }
            Ok(PrgProbability::Sampled(McEstimate::from_hits(hits, samples, seed)))
        }
    }
}

/// Smallest even `k` with `k >= sqrt(n)`.
pub fn even_block_length(n: usize) -> usize {
    let mut k = 2usize;
    while k * k < n {
        k += 2;
    }
    k
}

/// `log2 |D|` for `n` signs with `k = even_block_length(n)`, `ceil(n / k)`
/// blocks and the degree-8 expander.
pub fn log2_size_for(n: usize) -> f64 {
    let k = even_block_length(n);
    let blocks = n.div_ceil(k).max(1);
    k as f64 + 3.0 * (blocks - 1) as f64
}

/// Zero weights appended so that `k` divides the length.
pub fn pad_to_multiple(weights: &[f64], k: usize) -> (Vec<f64>, usize) {
    let target = weights.len().div_ceil(k).max(1) * k;
    let padding = target - weights.len();
    let mut out = weights.to_vec();
    out.resize(target, 0.0);
    (out, padding)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete_graph_k4() -> ExpanderGraph {
        let lists: Vec<Vec<u32>> = (0..4u32).map(|v| (0..4u32).filter(|&u| u != v).collect()).collect();
        ExpanderGraph::from_neighbor_lists(2, &lists).unwrap()
    }

    #[test]
    fn mgg_structure() {
        let g = build_mgg_expander(2).unwrap();
        assert_eq!(g.n_vertices(), 4);
        assert_eq!(g.degree(), 8);
        assert_eq!(g.neighbor_lists().iter().map(|l| l.len()).sum::<usize>(), 32);
        assert!(g.check_symmetric().is_ok());
        assert_eq!(build_mgg_expander(3), Err(Error::OddK(3)));
    }

    #[test]
    fn labels_are_big_endian() {
        let g = build_mgg_expander(4).unwrap();
        assert_eq!(g.label(0).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        assert_eq!(g.label(0b1000).collect::<Vec<_>>(), vec![-1, 1, 1, 1]);
        assert_eq!(g.label(0b0011).collect::<Vec<_>>(), vec![1, 1, -1, -1]);
    }

    #[test]
    fn k4_spectrum() {
        let mut g = complete_graph_k4();
        assert!((g.certify_lambda().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_graph_has_lambda_one() {
        // Two components {0,1} and {2,3}, each a doubled edge.
        let lists = vec![vec![1, 1], vec![0, 0], vec![3, 3], vec![2, 2]];
        let mut g = ExpanderGraph::from_neighbor_lists(2, &lists).unwrap();
        assert!((g.certify_lambda().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_irregular_or_asymmetric() {
        assert!(ExpanderGraph::from_neighbor_lists(1, &[vec![1], vec![0, 0]]).is_err());
        assert!(ExpanderGraph::from_neighbor_lists(1, &[vec![1], vec![1]]).is_err());
        assert!(ExpanderGraph::from_neighbor_lists(1, &[vec![1], vec![0]]).is_ok());
    }

    #[test]
    fn walk_enumeration_counts_and_weights() {
        let g = build_mgg_expander(2).unwrap();
        let spec = PrgSpec::new(g.clone(), 4).unwrap();
        assert_eq!(spec.walk_count(), 32);
        let walks: Vec<_> = enumerate_walks(&spec, DEFAULT_WALK_BUDGET).unwrap().collect();
        assert_eq!(walks.len(), 32);
        assert!((walks.iter().map(|w| w.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(walks.iter().all(|w| w.0.len() == 4));

        let single = PrgSpec::new(g, 2).unwrap();
        let labels: Vec<_> = enumerate_walks(&single, DEFAULT_WALK_BUDGET).unwrap().map(|w| w.0).collect();
        assert_eq!(labels, vec![vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]]);
        assert!(matches!(enumerate_walks(&spec, 10), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn divisibility_and_hypothesis() {
        let g = build_mgg_expander(4).unwrap();
        assert_eq!(PrgSpec::new(g.clone(), 6), Err(Error::IndivisibleLength { n: 6, k: 4 }));
        let spec = PrgSpec::new(g, 8).unwrap();
        let err = prg_smallball(&spec, &[1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 0, 0.0, 1.0, PrgMode::Exact {
            budget: DEFAULT_WALK_BUDGET,
        });
        assert!(matches!(err, Err(Error::HypothesisViolated(_))));
        let (padded, pad) = pad_to_multiple(&[1.0; 6], 4);
        assert_eq!((padded.len(), pad), (8, 2));
        assert!(prg_smallball(&spec, &padded, pad, 0.0, 1.0, PrgMode::Exact { budget: DEFAULT_WALK_BUDGET }).is_ok());
    }

    #[test]
    fn no_step_walks_reproduce_the_cube() {
        // n = k: D is {-1,1}^k itself, so all-ones weights give binomial mass.
        let spec = PrgSpec::new(build_mgg_expander(4).unwrap(), 4).unwrap();
        let p = prg_smallball(&spec, &[1.0; 4], 0, 0.0, 1.0, PrgMode::Exact { budget: DEFAULT_WALK_BUDGET }).unwrap();
        assert!((p.value() - 6.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn block_lengths() {
        assert_eq!(even_block_length(1), 2);
        assert_eq!(even_block_length(8), 4);
        assert_eq!(even_block_length(16), 4);
        assert_eq!(even_block_length(17), 6);
        assert_eq!(log2_size_for(16), 4.0 + 9.0);
    }
}
