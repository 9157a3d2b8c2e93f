//! Finite-state stationary reversible Markov chains, the sign functions read
//! off their states, and the weights multiplying those signs.
//!
//! A [`MarkovChain`] owns a row-stochastic transition matrix `A` and its
//! stationary distribution `mu`, and is only constructible through
//! [`MarkovChain::new`], which enforces stochasticity, stationarity and
//! detailed balance. The spectral parameter
//! `lambda = ||A - E_mu||` on `L2(mu)` is computed by [`spectral_lambda`].

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
// Float supplies the math methods without std; it goes unused when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance for checks on user-supplied data, which may be decimal-rounded.
pub const STRUCTURAL_TOL: f64 = 1e-9;
/// Tolerance for identities that only suffer internal round-off.
pub const DERIVED_TOL: f64 = 1e-12;
const FIXED_SPACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    transition: DMatrix<f64>,
    stationary: Vec<f64>,
}

impl MarkovChain {
    /// Validate a raw transition matrix and optional stationary distribution.
    ///
    /// When `stationary` is `None` it is computed as the unique left fixed
    /// probability vector of the matrix.
    pub fn new(rows: &[Vec<f64>], stationary: Option<&[f64]>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotSquare { rows: 0, offending_row: 0, cols: 0 });
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, offending_row: i, cols: r.len() });
            }
        }
        let transition = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(transition, stationary)
    }

    pub fn from_matrix(transition: DMatrix<f64>, stationary: Option<&[f64]>) -> Result<Self> {
        let n = transition.nrows();
        if n == 0 || transition.ncols() != n {
            return Err(Error::NotSquare { rows: n, offending_row: 0, cols: transition.ncols() });
        }
        check_stochastic(&transition)?;
        let stationary = match stationary {
            Some(mu) => {
                if mu.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "stationary distribution length",
                        expected: n,
                        found: mu.len(),
                    });
                }
                check_distribution(mu)?;
                mu.to_vec()
            }
            None => compute_stationary(&transition)?,
        };
        // Detailed balance implies stationarity, so it is checked first and
        // reports the more specific failure.
        check_detailed_balance(&transition, &stationary)?;
        check_stationary(&transition, &stationary)?;
        Ok(Self { transition, stationary })
    }

    pub fn n_states(&self) -> usize {
        self.stationary.len()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// The rank-one averaging operator whose rows all equal `mu`.
    pub fn averaging_operator(&self) -> DMatrix<f64> {
        averaging_operator(&self.stationary)
    }

    /// Cumulative row sums, used for inverse-CDF sampling.
    pub(crate) fn cumulative_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n_states();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                (0..n)
                    .map(|j| {
                        acc += self.transition[(i, j)];
                        acc
                    })
                    .collect()
            })
            .collect()
    }
}

/// `(E_mu)_{ij} = mu_j`.
pub fn averaging_operator(mu: &[f64]) -> DMatrix<f64> {
    let n = mu.len();
    DMatrix::from_fn(n, n, |_, j| mu[j])
}

fn check_stochastic(a: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            if !x.is_finite() || x < 0.0 {
                match worst {
                    Some((_, _, w)) if w <= x => {}
                    _ => worst = Some((i, j, x)),
                }
            }
        }
    }
    if let Some((row, col, value)) = worst {
        return Err(Error::NotStochastic { detail: "negative or non-finite entry", row, col, value });
    }
    let (row, dev) = (0..n)
        .map(|i| (i, (a.row(i).sum() - 1.0).abs()))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if dev > STRUCTURAL_TOL {
        return Err(Error::NotStochastic {
            detail: "row does not sum to 1",
            row,
            col: 0,
            value: a.row(row).sum(),
        });
    }
    Ok(())
}

pub(crate) fn check_distribution(mu: &[f64]) -> Result<()> {
    if mu.is_empty() {
        return Err(Error::InvalidDistribution { detail: "empty vector", index: 0, value: 0.0 });
    }
    for (i, &x) in mu.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidDistribution { detail: "negative or non-finite entry", index: i, value: x });
        }
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > DERIVED_TOL {
        return Err(Error::InvalidDistribution { detail: "entries do not sum to 1", index: 0, value: total });
    }
    Ok(())
}

fn check_stationary(a: &DMatrix<f64>, mu: &[f64]) -> Result<()> {
    let n = mu.len();
    let (state, deviation) = (0..n)
        .map(|j| {
            let s: f64 = (0..n).map(|i| mu[i] * a[(i, j)]).sum();
            (j, s - mu[j])
        })
        .fold((0, 0.0), |acc, x| if x.1.abs() > acc.1.abs() { x } else { acc });
    if deviation.abs() > STRUCTURAL_TOL {
        return Err(Error::NotStationary { state, deviation });
    }
    Ok(())
}

fn check_detailed_balance(a: &DMatrix<f64>, mu: &[f64]) -> Result<()> {
    let (i, j, dev) = detailed_balance_violation(a, mu);
    if dev > STRUCTURAL_TOL {
        return Err(Error::NotReversible {
            i,
            j,
            forward: mu[i] * a[(i, j)],
            backward: mu[j] * a[(j, i)],
        });
    }
    Ok(())
}

/// Worst `|mu_i A_ij - mu_j A_ji|` and where it occurs.
pub fn detailed_balance_violation(a: &DMatrix<f64>, mu: &[f64]) -> (usize, usize, f64) {
    let n = mu.len();
    let mut worst = (0, 0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (mu[i] * a[(i, j)] - mu[j] * a[(j, i)]).abs();
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    worst
}

/// Worst entrywise asymmetry of `D^{1/2} A D^{-1/2}`; zero iff `A` is
/// reversible with respect to a full-support `mu`.
pub fn symmetrized_asymmetry(a: &DMatrix<f64>, mu: &[f64]) -> Result<f64> {
    let s = symmetrize(a, mu)?;
    Ok((&s - s.transpose()).amax())
}

fn symmetrize(m: &DMatrix<f64>, mu: &[f64]) -> Result<DMatrix<f64>> {
    if let Some(state) = mu.iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroStationaryMass { state });
    }
    let n = mu.len();
    Ok(DMatrix::from_fn(n, n, |i, j| mu[i].sqrt() * m[(i, j)] / mu[j].sqrt()))
}

fn compute_stationary(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (dimension, v) = linalg::left_fixed_space(a, FIXED_SPACE_TOL)?;
    if dimension > 1 {
        return Err(Error::NoUniqueStationary { dimension });
    }
    let v = v.ok_or(Error::NoUniqueStationary { dimension: 0 })?;
    let total: f64 = v.iter().sum();
    if total.abs() < f64::EPSILON {
        return Err(Error::NoUniqueStationary { dimension: 0 });
    }
    let mut mu: Vec<f64> = v.iter().map(|x| x / total).collect();
    for (i, x) in mu.iter_mut().enumerate() {
        if *x < -STRUCTURAL_TOL {
            return Err(Error::InvalidDistribution {
                detail: "fixed vector has entries of both signs",
                index: i,
                value: *x,
            });
        }
        *x = x.max(0.0);
    }
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|x| *x /= total);
    Ok(mu)
}

/// `lambda = ||A - E_mu||_{L2(mu) -> L2(mu)}`, computed as the largest
/// absolute eigenvalue of `D^{1/2} (A - E_mu) D^{-1/2}`.
pub fn spectral_lambda(chain: &MarkovChain) -> Result<f64> {
    let centered = chain.transition() - chain.averaging_operator();
    let s = symmetrize(&centered, chain.stationary())?;
    let rho = linalg::spectral_radius_symmetric(&s)?;
    Ok(rho.clamp(0.0, 1.0))
}

/// The two-state chain with entries `(1 -/+ lam)/2`, uniform stationary
/// distribution and nontrivial eigenvalue `-lam`.
pub fn make_two_state_chain(lam: f64) -> Result<MarkovChain> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::OutOfRange { what: "lambda", value: lam });
    }
    let stay = (1.0 - lam) / 2.0;
    let switch = (1.0 + lam) / 2.0;
    MarkovChain::new(&[alloc::vec![stay, switch], alloc::vec![switch, stay]], Some(&[0.5, 0.5]))
}

/// The i.i.d. chain `A = E_mu`.
pub fn make_independent_chain(mu: &[f64]) -> Result<MarkovChain> {
    check_distribution(mu)?;
    let a = averaging_operator(mu);
    MarkovChain::from_matrix(a, Some(mu))
}

/// The sign functions `f_1, ..., f_n : [N] -> {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSystem {
    functions: Vec<Vec<i8>>,
    balances: Vec<f64>,
}

impl SignSystem {
    /// Row `j` of `functions` is `f_j` evaluated on every state.
    pub fn new(chain: &MarkovChain, functions: Vec<Vec<i8>>) -> Result<Self> {
        let n_states = chain.n_states();
        for (j, f) in functions.iter().enumerate() {
            if f.len() != n_states {
                return Err(Error::DimensionMismatch {
                    what: "sign function length",
                    expected: n_states,
                    found: f.len(),
                });
            }
            if let Some(y) = f.iter().position(|&s| s != 1 && s != -1) {
                return Err(Error::InvalidSigns(format!(
                    "f_{} takes value {} at state {}",
                    j + 1,
                    f[y],
                    y
                )));
            }
        }
        let mu = chain.stationary();
        let balances = functions
            .iter()
            .map(|f| f.iter().zip(mu).map(|(&s, &m)| s as f64 * m).sum())
            .collect();
        Ok(Self { functions, balances })
    }

    /// The same function on every step.
    pub fn repeated(chain: &MarkovChain, f: &[i8], n_steps: usize) -> Result<Self> {
        Self::new(chain, (0..n_steps).map(|_| f.to_vec()).collect())
    }

    /// `f(state) = +1` on the first half of the states (rounded up) and `-1`
    /// on the rest; for two states this is the labeling `f(1) = 1, f(2) = -1`.
    pub fn split_labeling(chain: &MarkovChain, n_steps: usize) -> Result<Self> {
        let n = chain.n_states();
        let half = n.div_ceil(2);
        let f: Vec<i8> = (0..n).map(|y| if y < half { 1 } else { -1 }).collect();
        Self::repeated(chain, &f, n_steps)
    }

    pub fn n_steps(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[Vec<i8>] {
        &self.functions
    }

    pub fn balances(&self) -> &[f64] {
        &self.balances
    }

    pub fn max_imbalance(&self) -> f64 {
        self.balances.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// `E_mu[f_j] = 0` for every step, to within `1e-12`.
    pub fn is_balanced(&self) -> bool {
        self.max_imbalance() <= DERIVED_TOL
    }

    pub fn require_balanced(&self) -> Result<()> {
        match self.balances.iter().position(|b| b.abs() > DERIVED_TOL) {
            None => Ok(()),
            Some(j) => Err(Error::InvalidSigns(format!(
                "f_{} is not balanced: E_mu[f] = {}",
                j + 1,
                self.balances[j]
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightVariant {
    General,
    /// Every weight has Euclidean norm at least 1.
    AtLeastUnit,
    /// At least half of the weights have norm at least 1.
    HalfAtLeastUnit,
    /// Scalars that are pairwise distinct positive integers.
    DistinctPositiveIntegers,
}

impl WeightVariant {
    pub fn name(self) -> &'static str {
        match self {
            WeightVariant::General => "general",
            WeightVariant::AtLeastUnit => "at-least-unit",
            WeightVariant::HalfAtLeastUnit => "half-at-least-unit",
            WeightVariant::DistinctPositiveIntegers => "distinct-positive-integers",
        }
    }
}

/// The vectors `v_1, ..., v_n` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem {
    dim: usize,
    weights: Vec<Vec<f64>>,
    variant: WeightVariant,
}

impl WeightSystem {
    pub fn new(dim: usize, weights: Vec<Vec<f64>>, variant: WeightVariant) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        for w in &weights {
            if w.len() != dim {
                return Err(Error::DimensionMismatch { what: "weight vector length", expected: dim, found: w.len() });
            }
        }
        let norm = |w: &[f64]| w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit = |w: &[f64]| norm(w) >= 1.0 - DERIVED_TOL;
        match variant {
            WeightVariant::General => {}
            WeightVariant::AtLeastUnit => {
                if let Some(i) = weights.iter().position(|w| !unit(w)) {
                    return Err(Error::InvalidWeights { variant: variant.name(), index: i });
                }
            }
            WeightVariant::HalfAtLeastUnit => {
                let count = weights.iter().filter(|w| unit(w)).count();
                if 2 * count < weights.len() {
                    return Err(Error::InvalidWeights { variant: variant.name(), index: count });
                }
            }
            WeightVariant::DistinctPositiveIntegers => {
                if dim != 1 {
                    return Err(Error::UnsupportedDimension(dim));
                }
                let mut seen: Vec<i64> = Vec::with_capacity(weights.len());
                for (i, w) in weights.iter().enumerate() {
                    let x = w[0];
                    if x.fract() != 0.0 || !(1.0..=9.0e15).contains(&x) {
                        return Err(Error::InvalidWeights { variant: variant.name(), index: i });
                    }
                    let xi = x as i64;
                    if seen.contains(&xi) {
                        return Err(Error::InvalidWeights { variant: variant.name(), index: i });
                    }
                    seen.push(xi);
                }
            }
        }
        Ok(Self { dim, weights, variant })
    }

    pub fn scalars(values: &[f64], variant: WeightVariant) -> Result<Self> {
        Self::new(1, values.iter().map(|&x| alloc::vec![x]).collect(), variant)
    }

    pub fn integers(values: &[i64]) -> Result<Self> {
        Self::new(1, values.iter().map(|&x| alloc::vec![x as f64]).collect(), WeightVariant::General)
    }

    pub fn all_ones(n: usize) -> Self {
        Self { dim: 1, weights: (0..n).map(|_| alloc::vec![1.0]).collect(), variant: WeightVariant::AtLeastUnit }
    }

    /// `v = (1, 2, ..., n)`.
    pub fn arange(n: usize) -> Self {
        Self {
            dim: 1,
            weights: (1..=n).map(|i| alloc::vec![i as f64]).collect(),
            variant: WeightVariant::DistinctPositiveIntegers,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn variant(&self) -> WeightVariant {
        self.variant
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Scalar view; fails unless `d = 1`.
    pub fn as_scalars(&self) -> Result<Vec<f64>> {
        if self.dim != 1 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        Ok(self.weights.iter().map(|w| w[0]).collect())
    }

    /// Integer view; fails unless `d = 1` and every weight is integral.
    pub fn as_integers(&self) -> Result<Vec<i64>> {
        let s = self.as_scalars()?;
        s.iter()
            .enumerate()
            .map(|(index, &value)| {
                if value.fract() == 0.0 && value.abs() < 9.0e15 {
                    Ok(value as i64)
                } else {
                    Err(Error::NonIntegerWeights { index, value })
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_two_state_is_valid() {
        let c = MarkovChain::new(&[vec![0.5, 0.5], vec![0.5, 0.5]], None).unwrap();
        assert!((c.stationary()[0] - 0.5).abs() < 1e-12);
        assert!(spectral_lambda(&c).unwrap() < 1e-12);
    }

    #[test]
    fn periodic_swap_is_reversible_with_lambda_one() {
        let c = MarkovChain::new(&[vec![0.0, 1.0], vec![1.0, 0.0]], None).unwrap();
        assert!((c.stationary()[1] - 0.5).abs() < 1e-12);
        assert!((spectral_lambda(&c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detailed_balance_failure_names_entry() {
        let err = MarkovChain::new(&[vec![0.9, 0.1], vec![0.5, 0.5]], Some(&[0.5, 0.5])).unwrap_err();
        match err {
            Error::NotReversible { i: 0, j: 1, forward, backward } => {
                assert!((forward - 0.05).abs() < 1e-15);
                assert!((backward - 0.25).abs() < 1e-15);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn non_reversible_three_cycle() {
        // Doubly stochastic, so uniform is stationary, but the cycle bias
        // breaks detailed balance.
        let rows = [vec![0.0, 0.8, 0.2], vec![0.2, 0.0, 0.8], vec![0.8, 0.2, 0.0]];
        let err = MarkovChain::new(&rows, None).unwrap_err();
        match err {
            Error::NotReversible { forward, backward, .. } => {
                assert!((forward - backward).abs() > 0.1);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn reducible_chain_has_no_unique_stationary() {
        let err = MarkovChain::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], None).unwrap_err();
        assert_eq!(err, Error::NoUniqueStationary { dimension: 2 });
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let err = MarkovChain::new(&[vec![0.5, 0.6], vec![0.5, 0.5]], None).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, .. }));
        let err = MarkovChain::new(&[vec![1.5, -0.5], vec![0.5, 0.5]], None).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, col: 1, .. }));
        let err = MarkovChain::new(&[vec![0.5, 0.5], vec![1.0]], None).unwrap_err();
        assert!(matches!(err, Error::NotSquare { offending_row: 1, .. }));
    }

    #[test]
    fn two_state_remark_matrix() {
        let c = make_two_state_chain(0.3).unwrap();
        assert!((c.transition()[(0, 0)] - 0.35).abs() < 1e-15);
        assert!((c.transition()[(0, 1)] - 0.65).abs() < 1e-15);
        assert!((spectral_lambda(&c).unwrap() - 0.3).abs() < 1e-12);
        let c0 = make_two_state_chain(0.0).unwrap();
        assert_eq!(c0.transition()[(1, 0)], 0.5);
        let c1 = make_two_state_chain(1.0).unwrap();
        assert_eq!(c1.transition()[(0, 1)], 1.0);
        assert!(matches!(make_two_state_chain(1.2), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn independent_chains() {
        let c = make_independent_chain(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(c.transition()[(2, 1)], 0.3);
        assert!(spectral_lambda(&c).unwrap() < 1e-12);
        let degenerate = make_independent_chain(&[1.0, 0.0]).unwrap();
        assert_eq!(degenerate.transition()[(1, 0)], 1.0);
        assert!(matches!(spectral_lambda(&degenerate), Err(Error::ZeroStationaryMass { state: 1 })));
        assert!(matches!(make_independent_chain(&[0.7, 0.7]), Err(Error::InvalidDistribution { .. })));
    }

    #[test]
    fn sign_system_checks_values_and_balance() {
        let c = make_two_state_chain(0.3).unwrap();
        let s = SignSystem::split_labeling(&c, 3).unwrap();
        assert!(s.is_balanced());
        assert!(SignSystem::new(&c, vec![vec![1, 0]]).is_err());
        let skew = SignSystem::new(&c, vec![vec![1, 1]]).unwrap();
        assert!(!skew.is_balanced());
        assert!(skew.require_balanced().is_err());
    }

    #[test]
    fn weight_variants() {
        assert!(WeightSystem::scalars(&[1.0, 2.0, 3.0], WeightVariant::DistinctPositiveIntegers).is_ok());
        assert!(WeightSystem::scalars(&[1.0, 1.0], WeightVariant::DistinctPositiveIntegers).is_err());
        assert!(WeightSystem::scalars(&[1.5], WeightVariant::DistinctPositiveIntegers).is_err());
        assert!(WeightSystem::scalars(&[0.5, 2.0], WeightVariant::HalfAtLeastUnit).is_ok());
        assert!(WeightSystem::scalars(&[0.5, 0.2, 2.0], WeightVariant::HalfAtLeastUnit).is_err());
        assert!(WeightSystem::new(2, vec![vec![0.6, 0.8]], WeightVariant::AtLeastUnit).is_ok());
        assert!(WeightSystem::new(2, vec![vec![0.6, 0.7]], WeightVariant::AtLeastUnit).is_err());
        let w = WeightSystem::scalars(&[1.0, 2.5], WeightVariant::General).unwrap();
        assert_eq!(w.as_integers(), Err(Error::NonIntegerWeights { index: 1, value: 2.5 }));
    }
}
