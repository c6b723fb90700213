//! Bessel-free reference for bag eigenvalues on the disk.
//!
//! The regular solution of the interior radial system is integrated with the
//! implicit midpoint (box) scheme from a Frobenius start at `r₀ = h`, and the
//! bag residual `u(R) − v(R)` is driven to zero. Two step sizes are combined by
//! Richardson extrapolation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::brent;

/// `u(R) − v(R)` for the regular interior solution at `λ`, step `h`.
pub fn shooting_residual(m: i32, lambda: f64, radius: f64, h: f64) -> f64 {
    let steps = ((radius - h) / h).round().max(1.0) as usize;
    let h = (radius - h) / steps as f64;
    let r0 = radius - h * steps as f64;
    let (mut u, mut v) = frobenius_start(m, lambda, r0);
    // normalise the start to keep the iterates O(1)
    let s = u.abs().max(v.abs());
    u /= s;
    v /= s;
    let mf = m as f64;
    for i in 0..steps {
        let rm = r0 + (i as f64 + 0.5) * h;
        // y' = A y with A = [[m/r, −λ], [λ, −(m+1)/r]]
        let a11 = mf / rm;
        let a12 = -lambda;
        let a21 = lambda;
        let a22 = -(mf + 1.0) / rm;
        let hh = 0.5 * h;
        let ru = u + hh * (a11 * u + a12 * v);
        let rv = v + hh * (a21 * u + a22 * v);
        let (m11, m12, m21, m22) = (1.0 - hh * a11, -hh * a12, -hh * a21, 1.0 - hh * a22);
        let det = m11 * m22 - m12 * m21;
        u = (m22 * ru - m12 * rv) / det;
        v = (m11 * rv - m21 * ru) / det;
        let s = u.abs().max(v.abs());
        if s > 1e100 {
            u /= s;
            v /= s;
        }
    }
    (u - v) / u.abs().max(v.abs())
}

fn frobenius_start(m: i32, lambda: f64, r: f64) -> (f64, f64) {
    let l2r2 = lambda * lambda * r * r;
    if m >= 0 {
        let n = m as f64;
        let u = r.powi(m) * (1.0 - l2r2 / (4.0 * (n + 1.0)));
        let v = lambda * r.powi(m + 1) / (2.0 * (n + 1.0));
        (u, v)
    } else {
        let k = -(m + 1);
        let n = k as f64;
        let v = r.powi(k) * (1.0 - l2r2 / (4.0 * (n + 1.0)));
        let u = -lambda * r.powi(k + 1) / (2.0 * (n + 1.0));
        (u, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdEigenvalue {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

/// Refine a bag eigenvalue guess with the shooting scheme at steps `2h` and
/// `h` and extrapolate. The bracket is `guess ± half_width`.
pub fn fd_eigenvalue(m: i32, radius: f64, guess: f64, half_width: f64, h: f64) -> Result<FdEigenvalue> {
    if !(h > 0.0) || h >= radius / 4.0 {
        return Err(Error::InvalidArgument(format!("step {h} must be in (0, R/4)")));
    }
    let solve = |step: f64| {
        brent(|l| shooting_residual(m, l, radius, step), guess - half_width, guess + half_width, 1e-14)
    };
    let fine = solve(h)?;
    let coarse = solve(2.0 * h)?;
    Ok(FdEigenvalue { coarse, fine, extrapolated: (4.0 * fine - coarse) / 3.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_mode_unit_disk() {
        let e = fd_eigenvalue(0, 1.0, 1.43, 0.2, 1e-3).unwrap();
        assert!((e.extrapolated - 1.4346956508).abs() < 1e-6);
        assert!((e.fine - 1.4346956508).abs() > (e.extrapolated - 1.4346956508).abs());
    }

    #[test]
    fn negative_channel() {
        let e = fd_eigenvalue(-1, 1.0, -1.43, 0.2, 1e-3).unwrap();
        assert!((e.extrapolated + 1.4346956508).abs() < 1e-6);
    }
}
