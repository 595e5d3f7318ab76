//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{bail, Result};

const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Fails with a validation error when a subinterval does not converge
/// within the recursion budget or the integrand produces non-finite values.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut ok = true;
    let v = refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut ok);
    if !ok {
        bail!(Validation, "quadrature did not converge on [{a}, {b}]");
    }
    if !v.is_finite() {
        bail!(Validation, "integrand is not finite on [{a}, {b}]");
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ok: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        *ok = false;
        return left + right;
    }
    if libm::fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *ok = false;
        return left + right + delta / 15.0;
    }
    // Interval collapsed below floating resolution: nothing left to refine.
    if m <= a || m >= b || lm <= a || rm >= b {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
}

/// Integrates over consecutive `breaks` (sorted, deduplicated), splitting
/// the tolerance evenly. Use this to place kinks and jumps on interval ends.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> Result<f64> {
    let pieces = breaks.windows(2).filter(|w| w[1] > w[0]).count().max(1);
    let tol = tol / pieces as f64;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += adaptive_simpson(f, w[0], w[1], tol)?;
        }
    }
    Ok(total)
}
