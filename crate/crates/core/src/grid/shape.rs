use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Disk { r: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r(φ) = r0 + c3 cos 3φ`.
    Star { r0: f64, c3: f64 },
}

/// A smooth star-shaped domain about `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub center: [f64; 2],
}

/// A point on `∂Ω` with its outward normal angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub s: f64,
    pub pos: [f64; 2],
    pub theta: f64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, center: [f64; 2]) -> Result<ShapeSpec> {
        let ok = match kind {
            ShapeKind::Disk { r } => r > 0.0,
            ShapeKind::Ellipse { a, b } => a > 0.0 && b > 0.0,
            ShapeKind::Star { r0, c3 } => r0 > 0.0 && c3.abs() < r0 / 10.0,
        };
        if !ok || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "invalid shape {kind:?} (star shapes need |c3| < r0/10 to stay smooth and convex)"
            )));
        }
        Ok(ShapeSpec { kind, center })
    }

    pub fn disk(r: f64) -> Result<ShapeSpec> {
        ShapeSpec::new(ShapeKind::Disk { r }, [0.0, 0.0])
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        match self.kind {
            ShapeKind::Disk { r } => dx * dx + dy * dy < r * r,
            ShapeKind::Ellipse { a, b } => (dx / a).powi(2) + (dy / b).powi(2) < 1.0,
            ShapeKind::Star { r0, c3 } => {
                let phi = dy.atan2(dx);
                dx.hypot(dy) < r0 + c3 * (3.0 * phi).cos()
            }
        }
    }

    /// Largest distance from the center to the boundary.
    pub fn max_radius(&self) -> f64 {
        match self.kind {
            ShapeKind::Disk { r } => r,
            ShapeKind::Ellipse { a, b } => a.max(b),
            ShapeKind::Star { r0, c3 } => r0 + c3.abs(),
        }
    }

    /// Parametrisation `X(t)` and `X'(t)`, counterclockwise for `t ∈ [0, 2π)`.
    pub fn curve(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let (s, c) = t.sin_cos();
        let (p, d) = match self.kind {
            ShapeKind::Disk { r } => ([r * c, r * s], [-r * s, r * c]),
            ShapeKind::Ellipse { a, b } => ([a * c, b * s], [-a * s, b * c]),
            ShapeKind::Star { r0, c3 } => {
                let r = r0 + c3 * (3.0 * t).cos();
                let dr = -3.0 * c3 * (3.0 * t).sin();
                ([r * c, r * s], [dr * c - r * s, dr * s + r * c])
            }
        };
        ([p[0] + self.center[0], p[1] + self.center[1]], d)
    }

    fn speed(&self, t: f64) -> f64 {
        let (_, d) = self.curve(t);
        d[0].hypot(d[1])
    }

    pub fn perimeter(&self) -> f64 {
        let rule = gauss_legendre(64).expect("fixed rule");
        let panels = 16;
        (0..panels)
            .map(|p| {
                let a = 2.0 * PI * p as f64 / panels as f64;
                rule.integrate(a, a + 2.0 * PI / panels as f64, |t| self.speed(t))
            })
            .sum()
    }

    /// `n` boundary points uniformly spaced in arclength, starting at `t = 0`.
    pub fn sample_boundary(&self, n: usize) -> Vec<BoundaryPoint> {
        let rule = gauss_legendre(32).expect("fixed rule");
        let panels = 512;
        let dt = 2.0 * PI / panels as f64;
        let mut cum = vec![0.0; panels + 1];
        for p in 0..panels {
            let a = dt * p as f64;
            cum[p + 1] = cum[p] + rule.integrate(a, a + dt, |t| self.speed(t));
        }
        let length = cum[panels];
        let mut out = Vec::with_capacity(n);
        let mut panel = 0;
        for i in 0..n {
            let s = length * i as f64 / n as f64;
            while panel + 1 < panels && cum[panel + 1] <= s {
                panel += 1;
            }
            // Newton on s(t) inside the panel
            let a = dt * panel as f64;
            let mut t = a + dt * (s - cum[panel]) / (cum[panel + 1] - cum[panel]);
            for _ in 0..30 {
                let partial = cum[panel] + rule.integrate(a, t, |u| self.speed(u));
                let step = (partial - s) / self.speed(t);
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (pos, d) = self.curve(t);
            // outward normal of a counterclockwise curve is the tangent turned clockwise
            let theta = (-d[0]).atan2(d[1]);
            out.push(BoundaryPoint { s, pos, theta });
        }
        out
    }
}

impl FromStr for ShapeSpec {
    type Err = Error;

    /// `disk:R=1.0`, `ellipse:a=1.2,b=0.8`, `star:r0=1.0,c3=0.1`; each may add
    /// `cx=..,cy=..`.
    fn from_str(spec: &str) -> Result<ShapeSpec> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut vals = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("shape parameter {item:?} is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("shape parameter {k} has non-numeric value {v:?}")))?;
            vals.insert(k.trim().to_string(), v);
        }
        let mut take = |k: &str| vals.remove(k);
        let center = [take("cx").unwrap_or(0.0), take("cy").unwrap_or(0.0)];
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| Error::InvalidArgument(format!("shape is missing {k}")));
        let kind = match kind.trim() {
            "disk" => ShapeKind::Disk { r: need(take("R").or_else(|| take("r")), "R")? },
            "ellipse" => ShapeKind::Ellipse { a: need(take("a"), "a")?, b: need(take("b"), "b")? },
            "star" => ShapeKind::Star { r0: need(take("r0"), "r0")?, c3: take("c3").unwrap_or(0.0) },
            other => return Err(Error::InvalidArgument(format!("unknown shape kind {other:?}"))),
        };
        if let Some(k) = vals.keys().next() {
            return Err(Error::InvalidArgument(format!("unknown shape parameter {k:?}")));
        }
        ShapeSpec::new(kind, center)
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ShapeKind::Disk { r } => write!(f, "disk:R={r}")?,
            ShapeKind::Ellipse { a, b } => write!(f, "ellipse:a={a},b={b}")?,
            ShapeKind::Star { r0, c3 } => write!(f, "star:r0={r0},c3={c3}")?,
        }
        if self.center != [0.0, 0.0] {
            write!(f, ",cx={},cy={}", self.center[0], self.center[1])?;
        }
        Ok(())
    }
}
