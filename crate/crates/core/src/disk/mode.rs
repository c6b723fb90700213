use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::bessel::{bessel_j_int, bessel_k_scaled_int};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::spinor::Spinor2;

use super::secular::{secular_finite_normalized, secular_infinite};
use super::{DiskProblem, Mass};

const EIGEN_TOL: f64 = 1e-10;
const EXTERIOR_SPAN: f64 = 40.0;

/// Radial parts of `ψ = (u e^{imθ}, i v e^{i(m+1)θ})` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialState {
    pub u: f64,
    pub v: f64,
}

/// A normalised disk eigenmode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskMode {
    pub problem: DiskProblem,
    pub lambda: f64,
    pub norm_const: f64,
    /// `|f|²` per unit arclength on `r = R`.
    pub boundary_density: f64,
    /// `½ ∮ |f|² ds`.
    pub mu_pred: f64,
    /// `−(λ − (m+½)/R) · ½ ∮ |f|² ds`, the first-order shift measured by the
    /// disk mass sweeps.
    pub mu_tangential: f64,
    /// Exterior decay rate `√(M² − λ²)`; `None` for the bag problem.
    pub kappa: Option<f64>,
    exterior_amp: f64,
}

impl DiskMode {
    fn sgn(&self) -> f64 {
        if self.lambda < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    fn raw(&self, r: f64) -> Result<RadialState> {
        if !(r >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius {r} must be nonnegative")));
        }
        let m = self.problem.m;
        let big_r = self.problem.radius;
        if r <= big_r {
            let x = self.lambda.abs() * r;
            return Ok(RadialState { u: bessel_j_int(m, x)?, v: self.sgn() * bessel_j_int(m + 1, x)? });
        }
        match (self.problem.mass, self.kappa) {
            (Mass::Finite(mass), Some(kappa)) => {
                let env = (-kappa * (r - big_r)).exp();
                if env == 0.0 {
                    return Ok(RadialState { u: 0.0, v: 0.0 });
                }
                let kr = kappa * r;
                let u = self.exterior_amp * bessel_k_scaled_int(m, kr)? * env;
                let v = kappa / (self.lambda + mass) * self.exterior_amp * bessel_k_scaled_int(m + 1, kr)? * env;
                Ok(RadialState { u, v })
            }
            _ => Ok(RadialState { u: 0.0, v: 0.0 }),
        }
    }

    /// Normalised radial parts at `r` (zero outside the disk in the bag case).
    pub fn radial(&self, r: f64) -> Result<RadialState> {
        let s = self.raw(r)?;
        Ok(RadialState { u: self.norm_const * s.u, v: self.norm_const * s.v })
    }

    /// Normalised radial derivative `(u', v')` at `r > 0`, from the radial system.
    pub fn radial_derivative(&self, r: f64) -> Result<RadialState> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("radial derivative needs r > 0".into()));
        }
        let s = self.radial(r)?;
        let mc = match self.problem.mass {
            Mass::Finite(mass) if r > self.problem.radius => mass,
            _ => 0.0,
        };
        let m = self.problem.m as f64;
        Ok(RadialState {
            u: m / r * s.u - (self.lambda + mc) * s.v,
            v: -(m + 1.0) / r * s.v + (self.lambda - mc) * s.u,
        })
    }

    /// The spinor `f(x, y)`.
    pub fn spinor_at(&self, x: f64, y: f64) -> Result<Spinor2> {
        let r = x.hypot(y);
        let th = y.atan2(x);
        let s = self.radial(r)?;
        let m = self.problem.m as f64;
        Ok([
            Complex64::from_polar(s.u, m * th),
            Complex64::new(0.0, 1.0) * Complex64::from_polar(s.v, (m + 1.0) * th),
        ])
    }

    /// The boundary trace `f(R e^{iθ})`.
    pub fn boundary_trace(&self, theta: f64) -> Result<Spinor2> {
        let r = self.problem.radius;
        let s = self.radial(r)?;
        let m = self.problem.m as f64;
        Ok([
            Complex64::from_polar(s.u, m * theta),
            Complex64::new(0.0, 1.0) * Complex64::from_polar(s.v, (m + 1.0) * theta),
        ])
    }
}

fn panel_integral<F: Fn(f64) -> Result<f64>>(rule: &QuadratureRule, a: f64, b: f64, panels: usize, f: &F) -> Result<f64> {
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        for (x, w) in rule.mapped(lo, lo + width) {
            total += w * f(x)?;
        }
    }
    Ok(total)
}

/// Normalise an eigenvalue of `problem` into a [`DiskMode`].
pub fn normalize_mode(problem: &DiskProblem, lambda: f64) -> Result<DiskMode> {
    let problem = DiskProblem::new(problem.radius, problem.m, problem.mass)?;
    let big_r = problem.radius;
    let m = problem.m;
    let x_r = lambda.abs() * big_r;
    let (kappa, exterior_amp) = match problem.mass {
        Mass::Infinite => {
            let res = secular_infinite(m, lambda, big_r)?;
            if !(res.abs() < EIGEN_TOL) {
                return Err(Error::Precondition(format!("lambda {lambda} is not a bag eigenvalue (residual {res:e})")));
            }
            (None, 0.0)
        }
        Mass::Finite(mass) => {
            let res = secular_finite_normalized(m, lambda, mass, big_r)?;
            if !(res.abs() < EIGEN_TOL) {
                return Err(Error::Precondition(format!(
                    "lambda {lambda} is not an eigenvalue for M = {mass} (residual {res:e})"
                )));
            }
            let kappa = ((mass - lambda.abs()) * (mass + lambda.abs())).sqrt();
            let kr = kappa * big_r;
            let jm = bessel_j_int(m, x_r)?;
            let jm1 = bessel_j_int(m + 1, x_r)?;
            let amp = if jm.abs() >= jm1.abs() {
                jm / bessel_k_scaled_int(m, kr)?
            } else {
                lambda.signum() * jm1 * (lambda + mass) / (kappa * bessel_k_scaled_int(m + 1, kr)?)
            };
            (Some(kappa), amp)
        }
    };
    let mut mode = DiskMode {
        problem,
        lambda,
        norm_const: 1.0,
        boundary_density: 0.0,
        mu_pred: 0.0,
        mu_tangential: 0.0,
        kappa,
        exterior_amp,
    };

    let density = |r: f64| -> Result<f64> {
        let s = mode.raw(r)?;
        Ok((s.u * s.u + s.v * s.v) * r)
    };
    let panels = (x_r / 10.0).ceil() as usize + 1;
    let mut totals = [0.0; 2];
    for (slot, n) in totals.iter_mut().zip([64usize, 128]) {
        let rule = gauss_legendre(n)?;
        let mut total = panel_integral(&rule, 0.0, big_r, panels, &density)?;
        if let Some(k) = kappa {
            let outer = |t: f64| density(big_r + t / k).map(|d| d / k);
            total += panel_integral(&rule, 0.0, EXTERIOR_SPAN, 1, &outer)?;
        }
        *slot = 2.0 * PI * total;
    }
    if !((totals[0] - totals[1]).abs() <= 1e-10 * totals[1]) {
        return Err(Error::Quadrature(format!(
            "norm integral changed from {} to {} under node doubling",
            totals[0], totals[1]
        )));
    }
    mode.norm_const = 1.0 / totals[1].sqrt();
    let at_r = mode.radial(big_r)?;
    mode.boundary_density = at_r.u * at_r.u + at_r.v * at_r.v;
    mode.mu_pred = PI * big_r * mode.boundary_density;
    mode.mu_tangential = -(lambda - (m as f64 + 0.5) / big_r) * mode.mu_pred;
    Ok(mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::{eigenvalue_finite_near, eigenvalues_infinite, Sign};

    #[test]
    fn bag_mode_boundary_condition_and_mu() {
        let l = eigenvalues_infinite(0, 1, 1.0, Sign::Plus).unwrap()[0];
        let mode = normalize_mode(&DiskProblem::infinite(1.0, 0).unwrap(), l).unwrap();
        let s = mode.radial(1.0).unwrap();
        assert!((s.u - s.v).abs() < 1e-10 * s.u.abs());
        let j = bessel_j_int(0, l).unwrap();
        let closed = PI * mode.norm_const.powi(2) * 2.0 * j * j;
        assert!((mode.mu_pred - closed).abs() < 1e-12);
        assert!((mode.mu_pred - 0.76747).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_eigenvalue() {
        let p = DiskProblem::infinite(1.0, 0).unwrap();
        assert!(matches!(normalize_mode(&p, 1.3), Err(Error::Precondition(_))));
    }

    #[test]
    fn finite_mode_is_continuous() {
        let l = eigenvalues_infinite(1, 1, 1.0, Sign::Minus).unwrap()[0];
        let lm = eigenvalue_finite_near(1, 50.0, 1.0, l).unwrap();
        let mode = normalize_mode(&DiskProblem::finite(1.0, 1, 50.0).unwrap(), lm).unwrap();
        let a = mode.radial(1.0).unwrap();
        let b = mode.radial(1.0 + 1e-14).unwrap();
        assert!((a.u - b.u).abs() < 1e-10 * a.u.abs().max(a.v.abs()));
        assert!((a.v - b.v).abs() < 1e-10 * a.u.abs().max(a.v.abs()));
    }
}
