//! Analytic bounds: Esseen quadrature, the cosine-product integral, binomial
//! negative moments, the theorem-level formulas, and fitted stand-ins for
//! their unspecified universal constants.

use alloc::string::String;
use alloc::vec::Vec;

use core::f64::consts::TAU;
// Float supplies the math methods without std; it goes unused when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::CompensatedSum;
use crate::quad::Quadrature;

/// A universal constant made concrete as the supremum of
/// `probability / formula` over a recorded instance family.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedConstant {
    pub name: String,
    pub value: f64,
    pub family: String,
    pub grid: String,
}

/// Supremum of `probability / formula_value` over the family.
pub fn fit_constant(name: &str, family: &str, grid: &str, instances: &[(f64, f64)]) -> Result<FittedConstant> {
    if instances.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut value = 0.0f64;
    for (i, &(prob, formula)) in instances.iter().enumerate() {
        if !(formula > 0.0) || !formula.is_finite() {
            return Err(Error::PreconditionViolated(alloc::format!(
                "instance {i} has non-positive formula value {formula}"
            )));
        }
        value = value.max(prob / formula);
    }
    if !(value > 0.0) {
        return Err(Error::PreconditionViolated("fitted constant is not positive".into()));
    }
    Ok(FittedConstant { name: name.into(), value, family: family.into(), grid: grid.into() })
}

/// `prefactor * (R/sqrt(d) + sqrt(d)/eps)^d * int_{|xi| <= eps} |phi(xi)| dxi`.
///
/// Only `d = 1` is integrated. Quadrature runs at absolute tolerance `1e-10`.
pub fn esseen_bound<F>(modulus: F, d: usize, r: f64, eps: f64, prefactor: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if d != 1 {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(r > 0.0) || !(eps > 0.0) {
        return Err(Error::OutOfRange { what: "radius and eps must be positive; radius", value: r.min(eps) });
    }
    let integral = Quadrature { initial_panels: 64, ..Quadrature::default() }.integrate(modulus, -eps, eps, &[])?;
    let sd = (d as f64).sqrt();
    Ok(prefactor * (r / sd + sd / eps).powi(d as i32) * integral)
}

/// Largest number of distinct kink locations for which the cosine product
/// integral is split at every zero of every factor.
const MAX_SPLIT_POINTS: usize = 4096;

/// `int_{-1}^{1} prod_j |cos(2 pi xi v_j)| dxi` for weights with `|v_j| >= 1`.
pub fn cosine_product_integral(weights: &[f64]) -> Result<f64> {
    if let Some(i) = weights.iter().position(|v| !(v.abs() >= 1.0)) {
        return Err(Error::PreconditionViolated(alloc::format!("|v_{}| = {} < 1", i + 1, weights[i].abs())));
    }
    if weights.is_empty() {
        return Ok(2.0);
    }
    // |cos(2 pi xi v)| has kinks at xi = (2m + 1) / (4 |v|).
    let mut kinks: Vec<f64> = Vec::new();
    let estimated: f64 = weights.iter().map(|v| 4.0 * v.abs() + 2.0).sum();
    if estimated <= MAX_SPLIT_POINTS as f64 || weights.len() <= 8 {
        for &v in weights {
            let v = v.abs();
            let mmax = (4.0 * v).ceil() as i64;
            for m in -mmax..=mmax {
                let x = (2 * m + 1) as f64 / (4.0 * v);
                if x > -1.0 && x < 1.0 {
                    kinks.push(x);
                }
            }
        }
        kinks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    }
    let f = |xi: f64| weights.iter().map(|&v| (TAU * xi * v).cos().abs()).product::<f64>();
    Quadrature::default().integrate(f, -1.0, 1.0, &kinks)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeMoment {
    /// `E[(X + 1)^{-d}]` for `X ~ Bin(n, p)`.
    pub exact: f64,
    /// `d^d / (n p)^d`.
    pub bound: f64,
}

fn ln_choose(n: u64, k: u64) -> f64 {
    libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((n - k + 1) as f64)
}

pub fn binomial_negative_moment(n: u64, p: f64, d: u32) -> Result<NegativeMoment> {
    if n == 0 {
        return Err(Error::OutOfRange { what: "trials", value: 0.0 });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::OutOfRange { what: "success probability", value: p });
    }
    if d == 0 {
        return Err(Error::OutOfRange { what: "moment order", value: 0.0 });
    }
    let exact = if p == 1.0 {
        ((n + 1) as f64).powi(-(d as i32))
    } else {
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        (0..=n)
            .map(|i| {
                let lpmf = ln_choose(n, i) + i as f64 * lp + (n - i) as f64 * lq;
                (lpmf - d as f64 * ((i + 1) as f64).ln()).exp()
            })
            .collect::<CompensatedSum>()
            .value()
    };
    let bound = (d as f64 / (n as f64 * p)).powi(d as i32);
    Ok(NegativeMoment { exact, bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremKind {
    /// `C R sqrt(d) / ((1 - lambda) sqrt(n))`.
    HighDim,
    /// `C / ((1 - lambda) sqrt(n))`.
    ScalarHalfUnit,
    /// `C / ((1 - lambda)^3 n^{3/2})`.
    DistinctInt,
    /// `C / sqrt(n)`.
    Prg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremParams {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub radius: f64,
}

/// The constants that the theorem formulas consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConstants {
    /// Conclusion constant for the scalar and high-dimensional bounds.
    pub equal: f64,
    pub diff: f64,
    pub prg: f64,
    /// Hypothesis constant `C'` in `R >= 1 / (C' sqrt(d))`.
    pub coord: f64,
}

impl TheoremConstants {
    pub fn unit() -> Self {
        Self { equal: 1.0, diff: 1.0, prg: 1.0, coord: 1.0 }
    }
}

/// The theorem formula without its constant.
pub fn theorem_shape(kind: TheoremKind, params: &TheoremParams) -> Result<f64> {
    if params.n == 0 {
        return Err(Error::OutOfRange { what: "n", value: 0.0 });
    }
    let lam = params.lambda;
    if kind != TheoremKind::Prg {
        if !(0.0..=1.0).contains(&lam) {
            return Err(Error::OutOfRange { what: "lambda", value: lam });
        }
        if lam >= 1.0 {
            return Err(Error::DegenerateGap);
        }
    }
    let n = params.n as f64;
    let gap = 1.0 - lam;
    Ok(match kind {
        TheoremKind::HighDim => params.radius * (params.d.max(1) as f64).sqrt() / (gap * n.sqrt()),
        TheoremKind::ScalarHalfUnit => 1.0 / (gap * n.sqrt()),
        TheoremKind::DistinctInt => 1.0 / (gap.powi(3) * n.powf(1.5)),
        TheoremKind::Prg => 1.0 / n.sqrt(),
    })
}

pub fn theorem_bound(kind: TheoremKind, params: &TheoremParams, constants: &TheoremConstants) -> Result<f64> {
    if kind == TheoremKind::HighDim {
        let d = params.d.max(1) as f64;
        let min_r = 1.0 / (constants.coord * d.sqrt());
        if params.radius < min_r {
            return Err(Error::HypothesisViolated(alloc::format!(
                "radius {} is below 1/(C' sqrt(d)) = {}",
                params.radius, min_r
            )));
        }
    }
    let shape = theorem_shape(kind, params)?;
    let c = match kind {
        TheoremKind::HighDim | TheoremKind::ScalarHalfUnit => constants.equal,
        TheoremKind::DistinctInt => constants.diff,
        TheoremKind::Prg => constants.prg,
    };
    Ok(c * shape)
}

/// Relative slack on every `probability <= bound` comparison, so that a
/// constant fitted as an exact supremum is not failed by last-bit rounding
/// when the same instance is recomputed along another path.
pub const BOUND_RTOL: f64 = 1e-12;

/// One row of a bound-check report.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub instance_id: String,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub radius: f64,
    pub prob: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(instance_id: String, params: &TheoremParams, prob: f64, bound: f64) -> Self {
        let ratio = if bound > 0.0 { prob / bound } else { f64::INFINITY };
        Self {
            instance_id,
            n: params.n,
            d: params.d,
            lambda: params.lambda,
            radius: params.radius,
            prob,
            bound,
            ratio,
            pass: ratio <= 1.0 + BOUND_RTOL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn esseen_point_mass() {
        let b = esseen_bound(|_| 1.0, 1, 1.0, 1.0, 0.5).unwrap();
        assert!((b - 0.5 * 2.0 * 2.0).abs() < 1e-12);
        assert!(matches!(esseen_bound(|_| 1.0, 2, 1.0, 1.0, 1.0), Err(Error::UnsupportedDimension(2))));
    }

    #[test]
    fn cosine_integral_closed_forms() {
        assert!((cosine_product_integral(&[1.0]).unwrap() - 4.0 / PI).abs() < 1e-10);
        assert_eq!(cosine_product_integral(&[]).unwrap(), 2.0);
        // |cos|^2 averages to 1/2.
        assert!((cosine_product_integral(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-10);
        assert!(matches!(cosine_product_integral(&[1.0, 0.5]), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn negative_moment_hand_values() {
        let m = binomial_negative_moment(1, 1.0, 1).unwrap();
        assert_eq!((m.exact, m.bound), (0.5, 1.0));
        let m = binomial_negative_moment(2, 0.5, 1).unwrap();
        assert!((m.exact - 7.0 / 12.0).abs() < 1e-15);
        assert_eq!(m.bound, 1.0);
        let m = binomial_negative_moment(50, 0.36, 2).unwrap();
        assert!((m.bound - 4.0 / (2500.0 * 0.36 * 0.36)).abs() < 1e-15);
        assert!(m.exact <= m.bound);
        assert!(matches!(binomial_negative_moment(5, 0.0, 1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn theorem_formulas() {
        let c = TheoremConstants::unit();
        let p = TheoremParams { n: 100, d: 1, lambda: 0.0, radius: 1.0 };
        assert!((theorem_bound(TheoremKind::ScalarHalfUnit, &p, &c).unwrap() - 0.1).abs() < 1e-15);
        let p = TheoremParams { n: 16, d: 1, lambda: 0.5, radius: 1.0 };
        assert!((theorem_bound(TheoremKind::DistinctInt, &p, &c).unwrap() - 0.125).abs() < 1e-15);
        let p = TheoremParams { n: 16, d: 1, lambda: 1.0, radius: 1.0 };
        assert_eq!(theorem_bound(TheoremKind::ScalarHalfUnit, &p, &c), Err(Error::DegenerateGap));
        let p = TheoremParams { n: 16, d: 4, lambda: 0.2, radius: 0.1 };
        assert!(matches!(theorem_bound(TheoremKind::HighDim, &p, &c), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn fitting() {
        let c = fit_constant("C", "one", "-", &[(0.375, 0.5)]).unwrap();
        assert_eq!(c.value, 0.75);
        let c = fit_constant("C", "flat", "-", &[(0.2, 0.4), (0.1, 0.2), (0.3, 0.6)]).unwrap();
        assert_eq!(c.value, 0.5);
        assert_eq!(fit_constant("C", "none", "-", &[]), Err(Error::EmptyFamily));
    }

    #[test]
    fn report_pass_flag_tracks_ratio() {
        let p = TheoremParams { n: 4, d: 1, lambda: 0.0, radius: 1.0 };
        assert!(BoundReport::new("a".into(), &p, 0.375, 0.5).pass);
        assert!(!BoundReport::new("b".into(), &p, 0.6, 0.5).pass);
    }
}
