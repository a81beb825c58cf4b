//! Bracketed scalar root finding.

use crate::{Error, Result};

/// Outcome of a bracketed solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub root: f64,
    /// Final bracket, `lo < hi`, still containing the sign change.
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Finds a zero crossing of `f` on `[lo, hi]` to absolute tolerance `xtol`.
///
/// Bisection/secant hybrid: every step tries the secant (regula falsi with
/// the Illinois down-weighting) and falls back to bisection whenever the
/// secant point leaves the middle part of the bracket or the bracket failed
/// to halve on the previous step. Each iterate keeps a valid sign change, so
/// convergence is guaranteed for any continuous `f`.
pub fn find_crossing<F, E>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<Bracketed, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<Error>,
{
    if !(lo < hi) || !(xtol > 0.0) {
        return Err(Error::invalid(format!("bad bracket [{lo}, {hi}] or tolerance {xtol}")).into());
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut evaluations = 2;
    if fa == 0.0 || fb == 0.0 {
        let root = if fa == 0.0 { a } else { b };
        return Ok(Bracketed { root, lo: a, hi: b, f_lo: fa, f_hi: fb, iterations: 0, evaluations });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { what: "function".into(), lo, hi }.into());
    }

    // Illinois weights on the retained endpoint
    let (mut wa, mut wb) = (1.0, 1.0);
    let mut force_bisect = false;
    let mut iterations = 0;
    while b - a > xtol {
        iterations += 1;
        let width = b - a;
        let secant = (a * fb * wb - b * fa * wa) / (fb * wb - fa * wa);
        let margin = 0.01 * width;
        let x = if !force_bisect && secant.is_finite() && secant > a + margin && secant < b - margin {
            secant
        } else {
            0.5 * (a + b)
        };
        let fx = f(x)?;
        evaluations += 1;
        if fx == 0.0 {
            return Ok(Bracketed { root: x, lo: x, hi: x, f_lo: 0.0, f_hi: 0.0, iterations, evaluations });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            wa = 1.0;
            wb *= 0.5;
        } else {
            b = x;
            fb = fx;
            wb = 1.0;
            wa *= 0.5;
        }
        // a secant step that did not at least halve the bracket is followed by bisection
        force_bisect = !force_bisect && b - a > 0.5 * width;
    }
    // final linear interpolation inside the tight bracket
    let root = {
        let r = (a * fb - b * fa) / (fb - fa);
        if r.is_finite() && r >= a && r <= b { r } else { 0.5 * (a + b) }
    };
    Ok(Bracketed { root, lo: a, hi: b, f_lo: fa, f_hi: fb, iterations, evaluations })
}
