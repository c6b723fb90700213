use rayon::prelude::*;
use serde::Serialize;

use super::shape::ShapeSpec;
use crate::error::{Error, Result};
use crate::spinor::C64;

/// Largest admissible `M·h`.
pub const RESOLUTION_LIMIT: f64 = 1.0;
/// Required clearance between the shape and the box edge, in units of `1/M`.
pub const MARGIN_LAYERS: f64 = 6.0;

/// Discrete `H_M` on the nodes `x_i = −L + i h`, `0 < i < 2L/h`, with zero
/// values on the box edge.
///
/// Fields are stored node by node, row-major in `y`, both spinor components
/// adjacent: index `2(j n + i) + c`.
#[derive(Debug, Clone, Serialize)]
pub struct GridOperator {
    pub shape: ShapeSpec,
    pub half_width: f64,
    pub h: f64,
    pub mass: f64,
    pub wilson_c: f64,
    n: usize,
    #[serde(skip)]
    outside: Vec<bool>,
}

impl GridOperator {
    pub fn new(shape: ShapeSpec, mass: f64, half_width: f64, h: f64, wilson_c: f64) -> Result<GridOperator> {
        GridOperator::build(shape, mass, half_width, h, wilson_c, true)
    }

    fn build(shape: ShapeSpec, mass: f64, half_width: f64, h: f64, wilson_c: f64, guard: bool) -> Result<GridOperator> {
        if !(h > 0.0) || !(half_width > 0.0) || !(mass >= 0.0) || !(wilson_c >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs h > 0, L > 0, M ≥ 0 and wilson_c ≥ 0 (got h={h}, L={half_width}, M={mass}, c={wilson_c})"
            )));
        }
        if guard && mass * h > RESOLUTION_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "resolution guard: M·h = {} exceeds {RESOLUTION_LIMIT}",
                mass * h
            )));
        }
        let cells = 2.0 * half_width / h;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) || cells.round() < 4.0 {
            return Err(Error::InvalidArgument(format!("h={h} does not divide 2L={}", 2.0 * half_width)));
        }
        let reach = shape.center[0].abs().max(shape.center[1].abs()) + shape.max_radius();
        let margin = if mass > 0.0 { MARGIN_LAYERS / mass } else { 0.0 };
        if reach + margin > half_width {
            return Err(Error::InvalidArgument(format!(
                "shape reaches {reach} but the box half-width {half_width} leaves less than the margin {margin}"
            )));
        }
        let n = cells.round() as usize - 1;
        let mut outside = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = -half_width + (i + 1) as f64 * h;
                let y = -half_width + (j + 1) as f64 * h;
                outside.push(!shape.contains(x, y));
            }
        }
        Ok(GridOperator { shape, half_width, h, mass, wilson_c, n, outside })
    }

    /// The same operator at twice the spacing, without the resolution guard.
    pub fn coarsened(&self) -> Option<GridOperator> {
        if !(self.n + 1).is_multiple_of(2) {
            return None;
        }
        GridOperator::build(self.shape, self.mass, self.half_width, 2.0 * self.h, self.wilson_c, false).ok()
    }

    /// Interpolate a field on this grid onto the nodes of `fine`.
    pub fn prolongate(&self, v: &[C64], fine: &GridOperator) -> Vec<C64> {
        fine.sample(|x, y| super::trace::interpolate(self, v, x, y))
    }

    /// Interior nodes per side.
    pub fn side(&self) -> usize {
        self.n
    }

    /// Length of a grid field.
    pub fn dim(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.h
    }

    pub fn is_outside(&self, i: usize, j: usize) -> bool {
        self.outside[j * self.n + i]
    }

    /// Upper bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        2.0f64.sqrt() / self.h + self.mass + 4.0 * self.wilson_c / self.h
    }

    /// `out = H_h v`.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        let n = self.n;
        assert_eq!(v.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let d = 0.5 / self.h;
        let w = 0.5 * self.wilson_c / self.h;
        let zeros = vec![C64::new(0.0, 0.0); 2 * n];
        let zero = C64::new(0.0, 0.0);
        out.par_chunks_mut(2 * n).enumerate().for_each(|(j, row)| {
            let here = &v[2 * j * n..2 * (j + 1) * n];
            let below = if j > 0 { &v[2 * (j - 1) * n..2 * j * n] } else { &zeros[..] };
            let above = if j + 1 < n { &v[2 * (j + 1) * n..2 * (j + 2) * n] } else { &zeros[..] };
            let mask = &self.outside[j * n..(j + 1) * n];
            for i in 0..n {
                let k = 2 * i;
                let (e0, e1) = if i + 1 < n { (here[k + 2], here[k + 3]) } else { (zero, zero) };
                let (w0, w1) = if i > 0 { (here[k - 2], here[k - 1]) } else { (zero, zero) };
                let (c0, c1) = (here[k], here[k + 1]);
                // −i(σ₁∂₁ + σ₂∂₂)
                let dx0 = (e0 - w0) * d;
                let dx1 = (e1 - w1) * d;
                let dy0 = (above[k] - below[k]) * d;
                let dy1 = (above[k + 1] - below[k + 1]) * d;
                let m = if mask[i] { self.mass } else { 0.0 };
                let lap0 = c0 * 4.0 - e0 - w0 - above[k] - below[k];
                let lap1 = c1 * 4.0 - e1 - w1 - above[k + 1] - below[k + 1];
                row[k] = C64::new(dx1.im, -dx1.re) - dy1 + c0 * m + lap0 * w;
                row[k + 1] = C64::new(dx0.im, -dx0.re) + dy0 - c1 * m - lap1 * w;
            }
        });
    }

    /// Grid inner product `h² Σ conj(u) v`, optionally restricted to `Ω`.
    pub fn inner(&self, u: &[C64], v: &[C64], interior_only: bool) -> C64 {
        let n = self.n;
        let h2 = self.h * self.h;
        let parts: Vec<C64> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    if interior_only && self.outside[j * n + i] {
                        continue;
                    }
                    let k = 2 * (j * n + i);
                    acc += u[k].conj() * v[k] + u[k + 1].conj() * v[k + 1];
                }
                acc
            })
            .collect();
        parts.into_iter().sum::<C64>() * h2
    }

    /// Sample a continuous spinor field at the nodes.
    pub fn sample<F: Fn(f64, f64) -> [C64; 2] + Sync>(&self, f: F) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        out.par_chunks_mut(2 * n).enumerate().for_each(|(j, row)| {
            let y = self.coord(j);
            for i in 0..n {
                let s = f(self.coord(i), y);
                row[2 * i] = s[0];
                row[2 * i + 1] = s[1];
            }
        });
        out
    }
}
