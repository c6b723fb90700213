//! Scalar root finding: uniform bracketing scan and Brent polishing.

use crate::error::{Error, Result};

/// Brent's method on `[a, b]`; requires a sign change.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NoConvergence(format!("non-finite function value at {b}")));
        }
    }
    Err(Error::NoConvergence("Brent iteration limit".into()))
}

/// Scan `[start, limit]` (in either direction) with steps of `step` and return
/// the first `count` sign-change brackets. Exact zeros on the grid are
/// returned as degenerate brackets.
pub fn scan_brackets<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    step: f64,
    limit: f64,
    count: usize,
) -> Result<Vec<(f64, f64)>> {
    if step == 0.0 || (limit - start) * step <= 0.0 {
        return Err(Error::InvalidArgument("scan step must point from start towards limit".into()));
    }
    let mut out = Vec::with_capacity(count);
    let mut x0 = start;
    let mut f0 = f(x0);
    let steps = ((limit - start) / step).ceil() as usize;
    for i in 1..=steps {
        if out.len() == count {
            break;
        }
        let x1 = start + step * i as f64;
        let f1 = f(x1);
        if f1 == 0.0 {
            out.push((x1, x1));
        } else if f0 != 0.0 && f0.signum() != f1.signum() && f0.is_finite() && f1.is_finite() {
            out.push(if x0 < x1 { (x0, x1) } else { (x1, x0) });
        }
        x0 = x1;
        f0 = f1;
    }
    if out.len() < count {
        return Err(Error::BracketingFailed { found: out.len(), wanted: count, limit });
    }
    Ok(out)
}

/// Every sign-change bracket met while scanning from `start` to `limit`.
pub fn scan_all_brackets<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    step: f64,
    limit: f64,
) -> Result<Vec<(f64, f64)>> {
    if step == 0.0 || (limit - start) * step <= 0.0 {
        return Err(Error::InvalidArgument("scan step must point from start towards limit".into()));
    }
    let mut out = Vec::new();
    let mut x0 = start;
    let mut f0 = f(x0);
    let steps = ((limit - start) / step).ceil() as usize;
    for i in 1..=steps {
        let x1 = start + step * i as f64;
        let f1 = f(x1);
        if f1 == 0.0 {
            out.push((x1, x1));
        } else if f0 != 0.0 && f0.signum() != f1.signum() && f0.is_finite() && f1.is_finite() {
            out.push(if x0 < x1 { (x0, x1) } else { (x1, x0) });
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(out)
}

/// Polish a bracket produced by a scan; degenerate brackets are exact roots.
pub fn polish<F: FnMut(f64) -> f64>(f: F, bracket: (f64, f64), xtol: f64) -> Result<f64> {
    if bracket.0 == bracket.1 {
        return Ok(bracket.0);
    }
    brent(f, bracket.0, bracket.1, xtol)
}
