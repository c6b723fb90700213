use serde::Serialize;

use super::operator::GridOperator;
use super::shape::{BoundaryPoint, ShapeSpec};
use crate::error::{Error, Result};
use crate::spinor::C64;

pub const MIN_TRACE_SAMPLES: usize = 128;

/// Spinor values on `∂Ω` at points uniform in arclength.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryTrace {
    pub points: Vec<BoundaryPoint>,
    pub samples: Vec<[C64; 2]>,
    /// Periodic trapezoid weights; they sum to the perimeter.
    pub weights: Vec<f64>,
}

impl BoundaryTrace {
    /// Trace of a continuous field, evaluated pointwise.
    pub fn from_fn<F: Fn(&BoundaryPoint) -> [C64; 2]>(shape: &ShapeSpec, n: usize, f: F) -> Result<BoundaryTrace> {
        if n < MIN_TRACE_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "trace needs at least {MIN_TRACE_SAMPLES} samples, got {n}"
            )));
        }
        let points = shape.sample_boundary(n);
        let w = shape.perimeter() / n as f64;
        let samples = points.iter().map(f).collect();
        Ok(BoundaryTrace { points, samples, weights: vec![w; n] })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `∮ |f|² ds`.
    pub fn norm_sq(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * (s[0].norm_sqr() + s[1].norm_sqr()))
            .sum()
    }

    pub fn scale(&mut self, c: C64) {
        for s in self.samples.iter_mut() {
            s[0] *= c;
            s[1] *= c;
        }
    }
}

/// Inward depths, in grid spacings, of the samples extrapolated to `∂Ω`.
/// At 3h no interpolation stencil reaches a node outside the shape.
const TRACE_DEPTHS: [f64; 3] = [3.0, 4.0, 5.0];
/// Quadratic extrapolation from those depths to depth zero.
const TRACE_WEIGHTS: [f64; 3] = [10.0, -15.0, 6.0];

/// Trace of the field restricted to `Ω`.
///
/// The field is interpolated bicubically (Catmull-Rom) at three points on the
/// inward normal through each boundary sample and extrapolated to the
/// boundary. Interpolating at the boundary itself would mix in nodes of the
/// mass barrier, which the grid does not resolve once `M·h` is of order one.
pub fn boundary_trace(op: &GridOperator, field: &[C64], samples: usize) -> Result<BoundaryTrace> {
    if field.len() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: field.len() });
    }
    BoundaryTrace::from_fn(&op.shape, samples, |p| {
        let (c, s) = (p.theta.cos(), p.theta.sin());
        let mut out = [C64::new(0.0, 0.0); 2];
        for (d, w) in TRACE_DEPTHS.iter().zip(TRACE_WEIGHTS) {
            let t = d * op.h;
            let v = interpolate(op, field, p.pos[0] - t * c, p.pos[1] - t * s);
            out[0] += v[0] * w;
            out[1] += v[1] * w;
        }
        out
    })
}

/// Field value at an arbitrary point of the box; the box edge carries zeros.
pub fn interpolate(op: &GridOperator, field: &[C64], x: f64, y: f64) -> [C64; 2] {
    let n = op.side() as isize;
    let fx = (x + op.half_width) / op.h - 1.0;
    let fy = (y + op.half_width) / op.h - 1.0;
    let ix = fx.floor();
    let iy = fy.floor();
    let wx = catmull_rom(fx - ix);
    let wy = catmull_rom(fy - iy);
    let (ix, iy) = (ix as isize, iy as isize);
    let mut out = [C64::new(0.0, 0.0); 2];
    for (b, wyb) in wy.iter().enumerate() {
        let j = iy - 1 + b as isize;
        if j < 0 || j >= n {
            continue;
        }
        for (a, wxa) in wx.iter().enumerate() {
            let i = ix - 1 + a as isize;
            if i < 0 || i >= n {
                continue;
            }
            let k = 2 * (j as usize * n as usize + i as usize);
            let w = wxa * wyb;
            out[0] += field[k] * w;
            out[1] += field[k + 1] * w;
        }
    }
    out
}

fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_cubics() {
        for t in [0.0, 0.25, 0.7] {
            let w = catmull_rom(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let lin: f64 = w.iter().enumerate().map(|(i, w)| w * (i as f64 - 1.0)).sum();
            assert!((lin - t).abs() < 1e-15);
        }
    }

    #[test]
    fn extrapolation_weights_are_exact_for_quadratics() {
        for p in 0..3 {
            let got: f64 = TRACE_DEPTHS.iter().zip(TRACE_WEIGHTS).map(|(d, w)| w * d.powi(p)).sum();
            assert!((got - if p == 0 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_samples() {
        let shape = ShapeSpec::disk(1.0).unwrap();
        assert!(BoundaryTrace::from_fn(&shape, 64, |_| [C64::new(1.0, 0.0); 2]).is_err());
        let t = BoundaryTrace::from_fn(&shape, 128, |_| [C64::new(1.0, 0.0); 2]).unwrap();
        assert!((t.weights.iter().sum::<f64>() - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    }
}
