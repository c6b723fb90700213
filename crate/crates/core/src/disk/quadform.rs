//! Exterior quadratic-form identity
//!
//! ```text
//! ‖(T + Mσ₃)φ‖² = ‖∇φ‖² + M²‖φ‖² − M‖P₊φ‖²_∂ + M‖P₋φ‖²_∂
//! ```
//!
//! on `Ω₋ = {r > R}`, checked by quadrature for Gaussian bumps times
//! polynomial spinors. Expanding `‖Tφ‖²` also produces
//! `2 Re⟨∂₁φ, iσ₃∂₂φ⟩`, which vanishes pointwise when both components of `φ`
//! are real; the report carries it so complex fields can be checked too.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::spinor::{tangent_frame_2d, Spinor2, C64};

/// `φ(x) = exp(−|x−c|²/(2w²)) Σ_k coeffs[·][k] b_k(x−c)` with the monomials
/// `b = (1, dx, dy, dx², dx·dy, dy²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestField {
    pub center: [f64; 2],
    pub width: f64,
    pub coeffs: [[C64; 6]; 2],
}

impl TestField {
    pub fn zero() -> TestField {
        TestField { center: [0.0, 0.0], width: 1.0, coeffs: [[C64::new(0.0, 0.0); 6]; 2] }
    }

    /// Gaussian bump times a constant spinor.
    pub fn bump(center: [f64; 2], width: f64, spinor: Spinor2) -> TestField {
        let mut coeffs = [[C64::new(0.0, 0.0); 6]; 2];
        coeffs[0][0] = spinor[0];
        coeffs[1][0] = spinor[1];
        TestField { center, width, coeffs }
    }

    /// `(φ, ∂₁φ, ∂₂φ)` at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> (Spinor2, Spinor2, Spinor2) {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let w2 = self.width * self.width;
        let g = (-(dx * dx + dy * dy) / (2.0 * w2)).exp();
        let gx = -dx / w2 * g;
        let gy = -dy / w2 * g;
        let b = [1.0, dx, dy, dx * dx, dx * dy, dy * dy];
        let bx = [0.0, 1.0, 0.0, 2.0 * dx, dy, 0.0];
        let by = [0.0, 0.0, 1.0, 0.0, dx, 2.0 * dy];
        let mut v = [C64::new(0.0, 0.0); 2];
        let mut d1 = v;
        let mut d2 = v;
        for c in 0..2 {
            let (mut p, mut px, mut py) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for k in 0..6 {
                p += self.coeffs[c][k] * b[k];
                px += self.coeffs[c][k] * bx[k];
                py += self.coeffs[c][k] * by[k];
            }
            v[c] = p * g;
            d1[c] = px * g + p * gx;
            d2[c] = py * g + p * gy;
        }
        (v, d1, d2)
    }
}

/// A random field whose bump straddles the circle of radius `radius`.
/// With `real = true` all coefficients are real.
pub fn random_test_field<R: Rng>(rng: &mut R, radius: f64, real: bool) -> TestField {
    let ang = rng.gen_range(0.0..2.0 * PI);
    let rc = radius * rng.gen_range(0.7..1.5);
    let width = radius * rng.gen_range(0.25..0.6);
    let mut coeffs = [[C64::new(0.0, 0.0); 6]; 2];
    for row in coeffs.iter_mut() {
        for (k, c) in row.iter_mut().enumerate() {
            let scale = if k == 0 { 1.0 } else { 1.0 / width };
            let re = rng.gen_range(-1.0..1.0) * scale;
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) * scale };
            *c = C64::new(re, im);
        }
    }
    TestField { center: [rc * ang.cos(), rc * ang.sin()], width, coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Gauss nodes per radial panel.
    pub n_r: usize,
    /// Uniform angular nodes.
    pub n_theta: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { n_r: 32, n_theta: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadFormReport {
    pub mass: f64,
    /// `‖(T + Mσ₃)φ‖²` over `Ω₋`.
    pub lhs: f64,
    /// `‖∇φ‖² + M²‖φ‖² − M‖P₊φ‖² + M‖P₋φ‖²`.
    pub rhs: f64,
    pub grad_sq: f64,
    pub mass_sq: f64,
    pub plus_boundary: f64,
    pub minus_boundary: f64,
    /// `2 Re⟨∂₁φ, iσ₃∂₂φ⟩` over `Ω₋`.
    pub cross_term: f64,
    pub mismatch: f64,
    pub relative_mismatch: f64,
    /// Largest relative change of any component under node doubling.
    pub doubling_change: f64,
}

struct Parts {
    lhs: f64,
    grad: f64,
    mass_sq: f64,
    plus: f64,
    minus: f64,
    cross: f64,
}

fn integrate(field: &TestField, mass: f64, radius: f64, spec: QuadratureSpec) -> Result<Parts> {
    let rule = gauss_legendre(spec.n_r)?;
    let c = field.center[0].hypot(field.center[1]);
    let r_out = (c + 12.0 * field.width).max(radius + field.width);
    let panels = ((r_out - radius) / (1.5 * field.width)).ceil().max(1.0) as usize;
    let pw = (r_out - radius) / panels as f64;
    let dth = 2.0 * PI / spec.n_theta as f64;
    let i = Complex64::new(0.0, 1.0);
    let mut p = Parts { lhs: 0.0, grad: 0.0, mass_sq: 0.0, plus: 0.0, minus: 0.0, cross: 0.0 };
    for t in 0..spec.n_theta {
        let th = dth * t as f64;
        let (sn, cs) = th.sin_cos();
        for k in 0..panels {
            let lo = radius + pw * k as f64;
            for (r, w) in rule.mapped(lo, lo + pw) {
                let wt = w * r * dth;
                let (v, d1, d2) = field.eval(r * cs, r * sn);
                // −i(σ₁∂₁ + σ₂∂₂)φ + Mσ₃φ
                let t0 = -i * (d1[1] - i * d2[1]) + mass * v[0];
                let t1 = -i * (d1[0] + i * d2[0]) - mass * v[1];
                p.lhs += wt * (t0.norm_sqr() + t1.norm_sqr());
                p.grad += wt * (d1[0].norm_sqr() + d1[1].norm_sqr() + d2[0].norm_sqr() + d2[1].norm_sqr());
                p.mass_sq += wt * (v[0].norm_sqr() + v[1].norm_sqr());
                let cr = d1[0].conj() * (i * d2[0]) + d1[1].conj() * (-i * d2[1]);
                p.cross += wt * 2.0 * cr.re;
            }
        }
        let frame = tangent_frame_2d(th);
        let (v, _, _) = field.eval(radius * cs, radius * sn);
        let (gp, gm) = frame.split(&v);
        p.plus += radius * dth * 2.0 * gp.norm_sqr();
        p.minus += radius * dth * 2.0 * gm.norm_sqr();
    }
    Ok(p)
}

/// Evaluate both sides of the identity for `field` on the exterior of the
/// disk of radius `radius`.
pub fn quadratic_form_identity(
    field: &TestField,
    mass: f64,
    radius: f64,
    spec: QuadratureSpec,
) -> Result<QuadFormReport> {
    if !(radius > 0.0) || !(field.width > 0.0) || !mass.is_finite() || mass < 0.0 {
        return Err(Error::InvalidArgument("need radius > 0, width > 0 and finite M >= 0".into()));
    }
    if spec.n_r < 2 || spec.n_r > 256 || spec.n_theta < 8 {
        return Err(Error::InvalidArgument(format!("bad quadrature spec {spec:?}")));
    }
    let a = integrate(field, mass, radius, spec)?;
    let b = integrate(field, mass, radius, QuadratureSpec { n_r: 2 * spec.n_r, n_theta: 2 * spec.n_theta })?;
    let scale = b.lhs.abs() + b.grad + mass * mass * b.mass_sq + mass * (b.plus + b.minus);
    let rel = |x: f64, y: f64| if scale > 0.0 { (x - y).abs() / scale } else { 0.0 };
    let doubling_change = [
        rel(a.lhs, b.lhs),
        rel(a.grad, b.grad),
        rel(mass * mass * a.mass_sq, mass * mass * b.mass_sq),
        rel(mass * a.plus, mass * b.plus),
        rel(mass * a.minus, mass * b.minus),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if doubling_change > 1e-6 {
        return Err(Error::Quadrature(format!("node doubling changed the result by {doubling_change:e}")));
    }
    let rhs = b.grad + mass * mass * b.mass_sq - mass * b.plus + mass * b.minus;
    let mismatch = b.lhs - rhs;
    Ok(QuadFormReport {
        mass,
        lhs: b.lhs,
        rhs,
        grad_sq: b.grad,
        mass_sq: b.mass_sq,
        plus_boundary: b.plus,
        minus_boundary: b.minus,
        cross_term: b.cross,
        mismatch,
        relative_mismatch: if scale > 0.0 { mismatch.abs() / scale } else { 0.0 },
        doubling_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_field() {
        let r = quadratic_form_identity(&TestField::zero(), 3.0, 1.0, QuadratureSpec::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.relative_mismatch, 0.0);
    }

    #[test]
    fn constant_spinor_bump() {
        let f = TestField::bump([1.1, 0.2], 0.4, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let r = quadratic_form_identity(&f, 3.0, 1.0, QuadratureSpec::default()).unwrap();
        assert!(r.relative_mismatch < 1e-8, "{r:?}");
    }

    #[test]
    fn complex_fields_differ_by_cross_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let f = random_test_field(&mut rng, 1.0, false);
            let r = quadratic_form_identity(&f, 2.0, 1.0, QuadratureSpec::default()).unwrap();
            let scale = r.lhs.abs() + r.rhs.abs();
            assert!((r.mismatch - r.cross_term).abs() < 1e-8 * scale, "{r:?}");
        }
    }
}
