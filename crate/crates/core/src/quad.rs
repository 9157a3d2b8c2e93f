//! Adaptive Simpson quadrature with caller-supplied breakpoints.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Uniform panels per breakpoint-delimited piece before adaptivity.
    pub initial_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-10, max_intervals: 1 << 20, initial_panels: 8 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

const MIN_DEPTH: u32 = 3;
const MAX_DEPTH: u32 = 60;

impl Quadrature {
    /// Integrate `f` over `[a, b]`, splitting first at every breakpoint that
    /// falls strictly inside the interval.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64, breakpoints: &[f64]) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        if a == b {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        cuts.dedup();

        let panels_per_piece = self.initial_panels.max(1);
        let length = hi - lo;
        let mut stack: Vec<Panel> = Vec::new();
        for w in cuts.windows(2) {
            let h = (w[1] - w[0]) / panels_per_piece as f64;
            for p in 0..panels_per_piece {
                let pa = w[0] + h * p as f64;
                let pb = if p + 1 == panels_per_piece { w[1] } else { pa + h };
                let pm = 0.5 * (pa + pb);
                let (fa, fm, fb) = (f(pa), f(pm), f(pb));
                stack.push(Panel {
                    a: pa,
                    b: pb,
                    fa,
                    fm,
                    fb,
                    whole: (pb - pa) / 6.0 * (fa + 4.0 * fm + fb),
                    tol: self.abs_tol * (pb - pa) / length,
                    depth: 0,
                });
            }
        }

        let mut total = CompensatedSum::new();
        let mut intervals = stack.len();
        while let Some(p) = stack.pop() {
            let m = 0.5 * (p.a + p.b);
            let lm = 0.5 * (p.a + m);
            let rm = 0.5 * (m + p.b);
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
            let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
            let delta = left + right - p.whole;
            if !delta.is_finite() {
                return Err(Error::PreconditionViolated("integrand is not finite".into()));
            }
            if p.depth >= MIN_DEPTH && (delta.abs() <= 15.0 * p.tol || p.depth >= MAX_DEPTH) {
                if p.depth >= MAX_DEPTH && delta.abs() > 15.0 * p.tol {
                    return Err(Error::QuadratureNonConvergence {
                        tolerance: self.abs_tol,
                        max_intervals: self.max_intervals,
                    });
                }
                total.add(left + right + delta / 15.0);
                continue;
            }
            intervals += 1;
            if intervals > self.max_intervals {
                return Err(Error::QuadratureNonConvergence {
                    tolerance: self.abs_tol,
                    max_intervals: self.max_intervals,
                });
            }
            let tol = 0.5 * p.tol;
            let depth = p.depth + 1;
            stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth });
            stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth });
        }
        Ok(sign * total.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_and_trig() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x * x * x - x, 0.0, 2.0, &[]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = q.integrate(|x| x.sin(), 0.0, PI, &[]).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let v = q.integrate(|x| x.sin(), PI, 0.0, &[]).unwrap();
        assert!((v + 2.0).abs() < 1e-10);
    }

    #[test]
    fn kinked_integrand_with_and_without_breakpoints() {
        let q = Quadrature::default();
        let f = |x: f64| (2.0 * PI * x).cos().abs();
        let exact = 4.0 / PI;
        let with = q.integrate(f, -1.0, 1.0, &[-0.75, -0.25, 0.25, 0.75]).unwrap();
        let without = q.integrate(f, -1.0, 1.0, &[]).unwrap();
        assert!((with - exact).abs() < 1e-10);
        assert!((without - exact).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let q = Quadrature { abs_tol: 1e-14, max_intervals: 16, initial_panels: 1 };
        let err = q.integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &[]).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }
}
