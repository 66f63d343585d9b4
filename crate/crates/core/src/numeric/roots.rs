//! Bracketing solvers: bisection for roots, golden-section search for
//! extrema, and grid-plus-refinement suprema on intervals.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Finds a root of `f` on `[lo, hi]` by bisection.
///
/// Only a sign change between the endpoints is required, so increasing and
/// decreasing functions are handled alike. Stops once the bracket is narrower
/// than `tol`.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let fb = f(b)?;
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite value at bracket endpoint: f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot {
            lower: lo,
            upper: hi,
            f_lower: fa,
            f_upper: fb,
        });
    }
    // 200 halvings exhaust the f64 mantissa for any finite bracket.
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) <= tol || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm.is_nan() {
            return Err(Error::Numeric(format!("NaN at θ = {mid}")));
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for a maximizer of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // The endpoints are candidates too: a monotone f peaks at the boundary.
    [(x, fx), (lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// Golden-section search for a minimizer. Returns `(argmin, min)`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|t| -f(t), lo, hi, tol);
    (x, -v)
}

/// Default grid resolution for suprema over a parameter interval.
pub const SUP_GRID_POINTS: usize = 257;

/// Supremum of `f` on `[lo, hi]`: evaluate on a uniform grid, then refine
/// with golden-section search over the cells adjacent to the grid argmax.
pub fn sup_on_interval<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize) -> f64 {
    let points = points.max(3);
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(grid_point(lo, hi, step, i, points));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let a = grid_point(lo, hi, step, best_i.saturating_sub(1), points);
    let b = grid_point(lo, hi, step, (best_i + 1).min(points - 1), points);
    let (_, refined) = golden_max(&mut f, a, b, 1e-12 * (1.0 + hi.abs().max(lo.abs())));
    best.max(refined)
}

pub(crate) fn grid_point(lo: f64, hi: f64, step: f64, i: usize, points: usize) -> f64 {
    if i + 1 == points {
        hi
    } else {
        lo + step * i as f64
    }
}
