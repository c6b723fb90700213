use std::f64::consts::PI;

use crate::bessel::{bessel_j_int, bessel_k_scaled_int};
use crate::error::{Error, Result};
use crate::roots::{polish, scan_all_brackets, scan_brackets};

use super::Sign;

const SCAN_STEP: f64 = 0.05;
const ROOT_TOL: f64 = 1e-12;

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// `J_m(|λ|R) − sgn(λ) J_{m+1}(|λ|R)`; vanishes exactly on the bag spectrum.
pub fn secular_infinite(m: i32, lambda: f64, radius: f64) -> Result<f64> {
    check_radius(radius)?;
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite and nonzero".into()));
    }
    let x = lambda.abs() * radius;
    Ok(bessel_j_int(m, x)? - lambda.signum() * bessel_j_int(m + 1, x)?)
}

fn residual_inf(m: i32, radius: f64) -> impl Fn(f64) -> f64 {
    move |l| secular_infinite(m, l, radius).unwrap_or(f64::NAN)
}

fn polish_infinite(m: i32, radius: f64, bracket: (f64, f64)) -> Result<f64> {
    let f = residual_inf(m, radius);
    let root = polish(&f, bracket, 1e-15 * bracket.1.abs().max(1.0 / radius))?;
    let res = f(root);
    if !(res.abs() < ROOT_TOL) {
        return Err(Error::NoConvergence(format!("root {root} has residual {res:e}")));
    }
    Ok(root)
}

/// First `count` bag eigenvalues on one sign branch of channel `m`, ordered
/// by increasing `|λ|`.
pub fn eigenvalues_infinite(m: i32, count: usize, radius: f64, sign: Sign) -> Result<Vec<f64>> {
    check_radius(radius)?;
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let s = sign.value();
    let step = SCAN_STEP / radius;
    let limit = ((count as f64 + m.unsigned_abs() as f64 + 4.0) * PI + 10.0) / radius;
    let x_max = crate::bessel::J_MAX_ARG / radius;
    let brackets = scan_brackets(
        residual_inf(m, radius),
        s * 0.5 * step,
        s * step,
        s * limit.min(x_max),
        count,
    )?;
    brackets.into_iter().map(|b| polish_infinite(m, radius, b)).collect()
}

/// Every bag eigenvalue of channel `m` (both branches) with `|λ| ≤ limit`, sorted.
pub fn infinite_roots_upto(m: i32, radius: f64, limit: f64) -> Result<Vec<f64>> {
    check_radius(radius)?;
    let step = SCAN_STEP / radius;
    let limit = limit.min(crate::bessel::J_MAX_ARG / radius);
    let mut out = Vec::new();
    if limit <= step {
        return Ok(out);
    }
    for s in [-1.0, 1.0] {
        for b in scan_all_brackets(residual_inf(m, radius), s * 0.5 * step, s * step, s * limit)? {
            out.push(polish_infinite(m, radius, b)?);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

struct FiniteTerms {
    first: f64,
    second: f64,
}

fn finite_terms(m: i32, lambda: f64, mass: f64, radius: f64) -> Result<FiniteTerms> {
    check_radius(radius)?;
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
    }
    if !(lambda.abs() < mass) {
        return Err(Error::Precondition(format!("|lambda| = {} must be below M = {mass}", lambda.abs())));
    }
    let kappa = ((mass - lambda.abs()) * (mass + lambda.abs())).sqrt();
    let x = lambda.abs() * radius;
    let sgn = if lambda < 0.0 { -1.0 } else { 1.0 };
    let kr = kappa * radius;
    let first = kappa * bessel_k_scaled_int(m + 1, kr)? * bessel_j_int(m, x)?;
    let second = sgn * (mass + lambda) * bessel_k_scaled_int(m, kr)? * bessel_j_int(m + 1, x)?;
    Ok(FiniteTerms { first, second })
}

/// Matching determinant of the interior `J` and exterior `K` solutions,
/// `κ K_{m+1}(κR) J_m(|λ|R) − sgn(λ)(M+λ) K_m(κR) J_{m+1}(|λ|R)` with both
/// `K` scaled by `e^{κR}`.
pub fn secular_finite(m: i32, lambda: f64, mass: f64, radius: f64) -> Result<f64> {
    let t = finite_terms(m, lambda, mass, radius)?;
    Ok(t.first - t.second)
}

/// `secular_finite` divided by the sum of the magnitudes of its two terms.
pub fn secular_finite_normalized(m: i32, lambda: f64, mass: f64, radius: f64) -> Result<f64> {
    let t = finite_terms(m, lambda, mass, radius)?;
    let scale = t.first.abs() + t.second.abs();
    Ok(if scale > 0.0 { (t.first - t.second) / scale } else { 0.0 })
}

/// The eigenvalue of `H_M` in channel `m` that continues the bag eigenvalue
/// near `target`. The search bracket is `target ± min(η₀, 10/M)` with `η₀`
/// half the distance from the nearest bag eigenvalue to its neighbours.
pub fn eigenvalue_finite_near(m: i32, mass: f64, radius: f64, target: f64) -> Result<f64> {
    check_radius(radius)?;
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
    }
    if target == 0.0 || !(target.abs() < mass) {
        return Err(Error::Precondition(format!("target {target} must be nonzero with |target| < M = {mass}")));
    }
    let eta = neighbour_half_gap(m, radius, target)?;
    let w = eta.min(10.0 / mass);
    let s = target.signum();
    let edge = 1e-9 / radius;
    let inner = (target.abs() - w).max(edge);
    let outer = (target.abs() + w).min(mass * (1.0 - 1e-12));
    let (lo, hi) = if s > 0.0 { (inner, outer) } else { (-outer, -inner) };
    let f = |l: f64| secular_finite(m, l, mass, radius).unwrap_or(f64::NAN);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.signum() != fhi.signum()) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let root = crate::roots::brent(f, lo, hi, 1e-15 * target.abs().max(1.0 / radius))?;
    Ok(root)
}

fn neighbour_half_gap(m: i32, radius: f64, target: f64) -> Result<f64> {
    let roots = infinite_roots_upto(m, radius, target.abs() + 2.0 * (PI + 2.0) / radius)?;
    let Some((idx, _)) = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
    else {
        return Ok(f64::INFINITY);
    };
    let r0 = roots[idx];
    let mut gap = f64::INFINITY;
    if idx > 0 {
        gap = gap.min(r0 - roots[idx - 1]);
    }
    if idx + 1 < roots.len() {
        gap = gap.min(roots[idx + 1] - r0);
    }
    Ok(0.5 * gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_roots_unit_disk() {
        let plus = eigenvalues_infinite(0, 3, 1.0, Sign::Plus).unwrap();
        let want = [1.4346956508, 4.6801025541, 7.8360023352];
        for (a, b) in plus.iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
        let minus = eigenvalues_infinite(0, 3, 1.0, Sign::Minus).unwrap();
        let want = [-3.1128644954, -6.2662873679, -9.4128766779];
        for (a, b) in minus.iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
        let m1 = eigenvalues_infinite(1, 1, 1.0, Sign::Plus).unwrap();
        assert!((m1[0] - 2.6298741119).abs() < 1e-9);
    }

    #[test]
    fn negative_channel_mirrors_zero_channel() {
        let a = eigenvalues_infinite(0, 3, 1.0, Sign::Plus).unwrap();
        let b = eigenvalues_infinite(-1, 3, 1.0, Sign::Minus).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_lambda_rejected() {
        assert!(secular_infinite(0, 0.0, 1.0).is_err());
        assert!(secular_finite(0, 5.0, 5.0, 1.0).is_err());
    }

    #[test]
    fn finite_near_infinite() {
        let l = eigenvalues_infinite(0, 1, 1.0, Sign::Plus).unwrap()[0];
        let lm = eigenvalue_finite_near(0, 100.0, 1.0, l).unwrap();
        assert!((lm - l).abs() < 0.02);
        assert!(lm < l);
    }
}
