//! Bracketing root finder and golden-section maximizer.

use crate::error::{Error, Result};

/// Stopping rule shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let t = Tolerance { abs_tol, rel_tol, max_iter };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0) || !(self.rel_tol >= 0.0) {
            return Err(Error::InvalidInput("tolerances must be non-negative".into()));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(Error::InvalidInput("abs_tol and rel_tol cannot both be zero".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-14, rel_tol: 1e-14, max_iter: 200 }
    }
}

/// Bisection on `[a, b]`.
///
/// Stops when `|f(x)| ≤ abs_tol` or the bracket width drops below
/// `rel_tol·|x|` (or below the spacing of adjacent doubles).
pub fn find_root_bisect<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    find_root_bisect_traced(f, a, b, tol, |_, _| {})
}

/// As [`find_root_bisect`], reporting the bracket after every iteration.
pub fn find_root_bisect_traced<F, T>(mut f: F, a: f64, b: f64, tol: Tolerance, mut trace: T) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    T: FnMut(f64, f64),
{
    tol.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput("bisection bracket must be finite".into()));
    }
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo * fhi < 0.0) {
        return Err(Error::Bracket { a, b });
    }
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid.is_nan() {
            return Err(Error::Domain { what: "bisection objective", value: mid });
        }
        if fmid == 0.0 || fmid.abs() <= tol.abs_tol {
            trace(mid, mid);
            return Ok(mid);
        }
        if (flo < 0.0) == (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        trace(lo, hi);
        let width = hi - lo;
        let x = 0.5 * (lo + hi);
        if width <= tol.rel_tol * x.abs() || x == lo || x == hi {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { what: "bisection", iterations: tol.max_iter })
}

/// Golden-section maximization of a unimodal function on `[a, b]` using a
/// fixed number of iterations, so results do not depend on timing or data.
/// Returns `(argmax, max)`, also considering the interval end points.
pub fn golden_section_max<F>(mut f: F, a: f64, b: f64, iterations: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for end in [a, b] {
        let v = f(end);
        if v > best.1 {
            best = (end, v);
        }
    }
    best
}
