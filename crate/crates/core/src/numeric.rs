//! Small scalar numerics shared by the curve fitting and equilibrium solvers.

use nalgebra::{DMatrix, DVector};

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign.
/// Returns `None` when the bracket does not change sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 || (hi - lo) < tol {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Scans `[lo, hi]` downward on a uniform grid and bisects the highest
/// crossing where `g` goes from positive (below) to non-positive (above).
pub fn highest_downcrossing<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, cells: usize) -> Option<f64> {
    let h = (hi - lo) / cells as f64;
    let mut upper = hi;
    let mut g_upper = g(upper);
    for i in (0..cells).rev() {
        let lower = lo + i as f64 * h;
        let g_lower = g(lower);
        if g_lower > 0.0 && g_upper <= 0.0 {
            return bisect(&g, lower, upper, 1e-13);
        }
        upper = lower;
        g_upper = g_lower;
    }
    None
}

/// Least-squares polynomial fit. Coefficients are returned highest power first.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return None;
    }
    let cols = degree + 1;
    let a = DMatrix::from_fn(xs.len(), cols, |r, c| xs[r].powi((degree - c) as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-12).ok()?;
    let coeffs: Vec<f64> = sol.iter().copied().collect();
    coeffs.iter().all(|c| c.is_finite()).then_some(coeffs)
}

/// Horner evaluation, coefficients highest power first.
pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}
