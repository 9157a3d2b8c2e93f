//! Dense and matrix-free linear algebra helpers shared by the chain, oracle
//! and expander modules.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
// Float supplies the math methods without std; it goes unused when std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Eigenvalues of a symmetric matrix. The input is symmetrized first so that
/// round-off asymmetry does not leak into the solver.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::EigenSolver("matrix is not square"));
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.try_symmetric_eigen(f64::EPSILON, 10_000)
        .map(|e| e.eigenvalues)
        .ok_or(Error::EigenSolver("symmetric eigen decomposition did not converge"))
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_radius_symmetric(m: &DMatrix<f64>) -> Result<f64> {
    Ok(symmetric_eigenvalues(m)?
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x.abs())))
}

/// Largest singular value (the l2 operator norm).
pub fn largest_singular_value(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolver("singular value decomposition did not converge"))?;
    Ok(svd.singular_values.iter().fold(0.0f64, |a, &x| a.max(x)))
}

/// Basis of the left fixed space `{x : x^T A = x^T}`.
///
/// Returns the dimension of the fixed space (singular values of `A^T - I`
/// below `tol`) together with one normalized basis vector when the space is
/// nonzero.
pub fn left_fixed_space(a: &DMatrix<f64>, tol: f64) -> Result<(usize, Option<Vec<f64>>)> {
    let n = a.nrows();
    let m = a.transpose() - DMatrix::<f64>::identity(n, n);
    let svd = m
        .try_svd(false, true, f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolver("singular value decomposition did not converge"))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or(Error::EigenSolver("missing right singular vectors"))?;
    let mut null_rows = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            null_rows.push(i);
        }
    }
    // A stochastic matrix always has a fixed vector; if rounding hid it, take
    // the smallest singular direction.
    if null_rows.is_empty() {
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        null_rows.push(imin);
        let v: Vec<f64> = v_t.row(imin).iter().copied().collect();
        return Ok((0, Some(v)));
    }
    let v: Vec<f64> = v_t.row(null_rows[0]).iter().copied().collect();
    Ok((null_rows.len(), Some(v)))
}

/// Outcome of a Lanczos run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosEstimate {
    /// Largest |Ritz value|.
    pub value: f64,
    /// Residual norm of the Ritz pair attaining `value`; the true spectrum
    /// contains an eigenvalue within this distance.
    pub residual: f64,
    pub iterations: usize,
}

/// Spectral radius of a symmetric linear operator restricted to the
/// complement of the constant vector, by Lanczos with full
/// reorthogonalization.
///
/// `apply(x, y)` must write `M x` into `y`.
pub fn lanczos_spectral_radius<F>(
    dim: usize,
    mut apply: F,
    deflate_constant: bool,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<LanczosEstimate>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ones = 1.0 / (dim as f64).sqrt();
    let project = |v: &mut [f64]| {
        if deflate_constant {
            let c: f64 = v.iter().sum::<f64>() * ones;
            v.iter_mut().for_each(|x| *x -= c * ones);
        }
    };
    let normalize = |v: &mut [f64]| -> f64 {
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            v.iter_mut().for_each(|x| *x /= nrm);
        }
        nrm
    };

    let mut q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut q);
    if normalize(&mut q) == 0.0 {
        return Ok(LanczosEstimate { value: 0.0, residual: 0.0, iterations: 0 });
    }
    let effective_dim = if deflate_constant { dim - 1 } else { dim };
    let max_iter = max_iter.min(effective_dim).max(1);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut best = LanczosEstimate { value: 0.0, residual: f64::INFINITY, iterations: 0 };

    for it in 0..max_iter {
        apply(&basis[it], &mut w);
        project(&mut w);
        let alpha: f64 = w.iter().zip(&basis[it]).map(|(a, b)| a * b).sum();
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(a, x)| a * x).sum();
                w.iter_mut().zip(b).for_each(|(a, x)| *a -= c * x);
            }
        }
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();

        let m = alphas.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = t
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::EigenSolver("tridiagonal eigen decomposition did not converge"))?;
        let (imax, theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, -1.0f64), |acc, (i, &x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        let residual = (beta * eig.eigenvectors[(m - 1, imax)]).abs();
        best = LanczosEstimate { value: theta, residual, iterations: m };
        if residual < tol || beta < 1e-14 || m == max_iter {
            break;
        }
        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    Ok(best)
}
