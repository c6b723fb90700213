//! Boundary-layer profiles in the exterior collar.
//!
//! Boundary spinors are handled in the frame `w = h₊ (1, a) + h₋ (1, −a)`
//! with `a = i e^{iθ(s)}`. In that frame `B = diag(1, −1)`, `Θ = σ₃` swaps
//! `h₊` and `h₋`, and `T − ξ` applied to a field extended constantly along
//! the normal reads
//!
//! ```text
//! [(T−ξ)w]₊ = (−i∂_s + κ/2 − ξ) h₊ − (κ/2) h₋
//! [(T−ξ)w]₋ = (κ/2) h₊ + (i∂_s − κ/2 − ξ) h₋
//! ```
//!
//! Profiles are `V^j(x, z) = Σ_k α_{j,k}(x) z^{k−1} e^{−z}` and the Duhamel
//! step is carried out exactly on that basis.

use std::f64::consts::PI;

use serde::Serialize;

use crate::disk::{DiskMode, Mass};
use crate::error::{Error, Result};
use crate::spinor::{tangent_frame_2d, Spinor2, C64};

const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const RANGE_TOL: f64 = 1e-10;

/// Uniform periodic arclength grid on `∂Ω` with normal angle and curvature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollarSpec {
    pub length: f64,
    pub s: Vec<f64>,
    /// Angle of the outward normal `n = (cos θ, sin θ)`.
    pub theta: Vec<f64>,
    /// `θ'(s)`, positive for a counterclockwise convex boundary.
    pub kappa: Vec<f64>,
    pub delta: f64,
}

impl CollarSpec {
    pub fn new(length: f64, theta: Vec<f64>, kappa: Vec<f64>, delta: f64) -> Result<CollarSpec> {
        let n = theta.len();
        if n < 16 || kappa.len() != n {
            return Err(Error::InvalidArgument(format!(
                "need at least 16 samples with matching curvature, got {n} and {}",
                kappa.len()
            )));
        }
        if !(length > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidArgument("length and delta must be positive".into()));
        }
        let ds = length / n as f64;
        let turning: f64 = kappa.iter().sum::<f64>() * ds;
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "boundary grid is not a closed periodic curve (total turning {turning})"
            )));
        }
        let kmax = kappa.iter().fold(0.0f64, |a, k| a.max(k.abs()));
        if kmax * delta >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "collar width {delta} exceeds the tubular bound 1/max|kappa| = {}",
                1.0 / kmax
            )));
        }
        let s = (0..n).map(|i| ds * i as f64).collect();
        Ok(CollarSpec { length, s, theta, kappa, delta })
    }

    /// Circle of radius `radius` traversed counterclockwise from `(R, 0)`.
    pub fn disk(radius: f64, samples: usize, delta: f64) -> Result<CollarSpec> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        let theta = (0..samples).map(|i| 2.0 * PI * i as f64 / samples as f64).collect();
        CollarSpec::new(2.0 * PI * radius, theta, vec![1.0 / radius; samples], delta)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn ds(&self) -> f64 {
        self.length / self.len() as f64
    }

    /// Smooth cutoff, 1 on `[0, δ/2]`, 0 from `δ` on.
    pub fn cutoff(&self, t: f64) -> f64 {
        let x = (t.abs() - 0.5 * self.delta) / (0.5 * self.delta);
        if x <= 0.0 {
            return 1.0;
        }
        if x >= 1.0 {
            return 0.0;
        }
        let f = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
        f(1.0 - x) / (f(1.0 - x) + f(x))
    }

    /// Periodic first derivative in `s`, eighth-order central differences.
    pub fn d_ds(&self, g: &[C64]) -> Vec<C64> {
        let n = g.len();
        let inv = 1.0 / self.ds();
        (0..n)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for (k, c) in FD8.iter().enumerate() {
                    let o = k + 1;
                    acc += (g[(i + o) % n] - g[(i + n - o) % n]) * *c;
                }
                acc * inv
            })
            .collect()
    }

    fn split_all(&self, w: &[Spinor2]) -> Result<(Vec<C64>, Vec<C64>)> {
        if w.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: w.len() });
        }
        Ok(w.iter().zip(&self.theta).map(|(v, &th)| tangent_frame_2d(th).split(v)).unzip())
    }

    fn join_all(&self, hp: &[C64], hm: &[C64]) -> Vec<Spinor2> {
        self.theta.iter().zip(hp.iter().zip(hm)).map(|(&th, (p, m))| tangent_frame_2d(th).join(*p, *m)).collect()
    }
}

fn check_plus(collar: &CollarSpec, w: &[Spinor2]) -> Result<(Vec<C64>, Vec<C64>)> {
    let (hp, hm) = collar.split_all(w)?;
    let scale = hp.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    let worst = hm.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    if worst > RANGE_TOL * scale.max(1.0) {
        return Err(Error::Precondition(format!("field has a P- component of size {worst:e}")));
    }
    Ok((hp, hm))
}

/// `(T − ξ) w` for a boundary field extended constantly along the normal,
/// returned as frame coefficients `(h₊, h₋)`.
pub fn apply_t_minus_xi_frame(collar: &CollarSpec, hp: &[C64], hm: &[C64], xi: C64) -> (Vec<C64>, Vec<C64>) {
    let dp = collar.d_ds(hp);
    let dm = collar.d_ds(hm);
    let i = C64::new(0.0, 1.0);
    let mut op = Vec::with_capacity(hp.len());
    let mut om = Vec::with_capacity(hp.len());
    for k in 0..hp.len() {
        let half = 0.5 * collar.kappa[k];
        op.push(-i * dp[k] + (half - xi) * hp[k] - half * hm[k]);
        om.push(half * hp[k] + i * dm[k] - (half + xi) * hm[k]);
    }
    (op, om)
}

/// `(T − ξ) w` in spinor form.
pub fn apply_t_minus_xi(collar: &CollarSpec, w: &[Spinor2], xi: C64) -> Result<Vec<Spinor2>> {
    let (hp, hm) = collar.split_all(w)?;
    let (op, om) = apply_t_minus_xi_frame(collar, &hp, &hm, xi);
    Ok(collar.join_all(&op, &om))
}

/// `e^{−zB} α₀` for `α₀ ∈ ran P₊`, i.e. `e^{−z} α₀`.
pub fn leading_profile(collar: &CollarSpec, alpha0: &[Spinor2], z: f64) -> Result<Vec<Spinor2>> {
    check_plus(collar, alpha0)?;
    let e = (-z).exp();
    Ok(alpha0.iter().map(|v| [v[0] * e, v[1] * e]).collect())
}

/// `e^{−zB} w = e^{−z} P₊w + e^{z} P₋w` for an arbitrary boundary field.
pub fn exp_neg_zb(collar: &CollarSpec, w: &[Spinor2], z: f64) -> Result<Vec<Spinor2>> {
    let (hp, hm) = collar.split_all(w)?;
    let a: Vec<C64> = hp.iter().map(|x| x * (-z).exp()).collect();
    let b: Vec<C64> = hm.iter().map(|x| x * z.exp()).collect();
    Ok(collar.join_all(&a, &b))
}

/// `(1, a) (−i∂_s + κ/2 − ξ) g` for `w = g (1, a)`.
pub fn tangential_operator_2d(collar: &CollarSpec, samples: &[Spinor2], xi: C64) -> Result<Vec<Spinor2>> {
    let (hp, _) = check_plus(collar, samples)?;
    let d = collar.d_ds(&hp);
    let i = C64::new(0.0, 1.0);
    let out: Vec<C64> = (0..hp.len()).map(|k| -i * d[k] + (0.5 * collar.kappa[k] - xi) * hp[k]).collect();
    let zero = vec![C64::new(0.0, 0.0); out.len()];
    Ok(collar.join_all(&out, &zero))
}

/// Profile coefficients `alpha[j][k-1][sample]`, `0 ≤ j ≤ order`, `1 ≤ k ≤ j+1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileStack {
    pub collar: CollarSpec,
    pub xi: C64,
    pub alpha: Vec<Vec<Vec<Spinor2>>>,
}

impl ProfileStack {
    pub fn new(collar: CollarSpec, alpha0: Vec<Spinor2>, xi: C64) -> Result<ProfileStack> {
        check_plus(&collar, &alpha0)?;
        Ok(ProfileStack { collar, xi, alpha: vec![vec![alpha0]] })
    }

    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    /// `V^j(x_i, z)`.
    pub fn eval(&self, j: usize, sample: usize, z: f64) -> Spinor2 {
        let e = (-z).exp();
        let mut out = [C64::new(0.0, 0.0); 2];
        let mut zp = 1.0;
        for coeff in &self.alpha[j] {
            let c = coeff[sample];
            out[0] += c[0] * (zp * e);
            out[1] += c[1] * (zp * e);
            zp *= z;
        }
        out
    }

    /// `Σ_{j ≤ upto} M^{−j} V^j(x_i, z)`.
    pub fn sum(&self, upto: usize, mass: f64, sample: usize, z: f64) -> Spinor2 {
        let mut out = [C64::new(0.0, 0.0); 2];
        let mut w = 1.0;
        for j in 0..=upto.min(self.order()) {
            let v = self.eval(j, sample, z);
            out[0] += v[0] * w;
            out[1] += v[1] * w;
            w /= mass;
        }
        out
    }

    /// The boundedness conditions on `P₋ α_{j,·}`: largest deviation of the
    /// stored `P₋` parts from the values forced by the previous order.
    pub fn forcing_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 1..self.alpha.len() {
            let (_, forced_minus) = duhamel_step(&self.collar, &self.alpha[j - 1], self.xi);
            for (k, coeff) in self.alpha[j].iter().enumerate() {
                let (_, hm) = self.collar.split_all(coeff).expect("stack dimensions");
                for (a, b) in hm.iter().zip(&forced_minus[k]) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r *= (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// One Duhamel step from `α_{j,·}`: returns the frame coefficients
/// `(h₊, h₋)` of `α_{j+1,k}` for `k = 1..=j+2`, with `h₊` of `k = 1` left
/// at zero (it is free data).
fn duhamel_step(collar: &CollarSpec, prev: &[Vec<Spinor2>], xi: C64) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let n = collar.len();
    let kmax = prev.len() + 1;
    let mut plus = vec![vec![C64::new(0.0, 0.0); n]; kmax];
    let mut minus = vec![vec![C64::new(0.0, 0.0); n]; kmax];
    for (idx, coeff) in prev.iter().enumerate() {
        let k = idx + 1;
        let (hp, hm) = collar.split_all(coeff).expect("stack dimensions");
        let (gp, gm) = apply_t_minus_xi_frame(collar, &hp, &hm, xi);
        for s in 0..n {
            plus[k][s] -= gm[s] / k as f64;
        }
        for i in 0..k {
            let c = binom(k - 1, i) * factorial(i) / 2f64.powi(i as i32 + 1);
            let target = k - 1 - i;
            for s in 0..n {
                minus[target][s] -= gp[s] * c;
            }
        }
    }
    (plus, minus)
}

/// Extend `stack` to order `target`. `plus_inputs[j]` (if present) is the
/// free `P₊ α_{j+1,1}` datum; missing entries are taken as zero.
pub fn profile_recursion(stack: &ProfileStack, target: usize, plus_inputs: &[Vec<Spinor2>]) -> Result<ProfileStack> {
    if target > 12 {
        return Err(Error::IllConditioned(format!(
            "order {target} needs {target} repeated boundary derivatives"
        )));
    }
    let mut out = stack.clone();
    let collar = &stack.collar;
    let base = out.alpha[0][0].iter().fold(0.0f64, |a, v| a.max(v[0].norm().max(v[1].norm())));
    while out.order() < target {
        let j = out.order();
        let (mut plus, minus) = duhamel_step(collar, &out.alpha[j], out.xi);
        if let Some(p) = plus_inputs.get(j) {
            let (hp, _) = check_plus(collar, p)?;
            plus[0] = hp;
        }
        let next: Vec<Vec<Spinor2>> = plus.iter().zip(&minus).map(|(p, m)| collar.join_all(p, m)).collect();
        let size = next.iter().flatten().fold(0.0f64, |a, v| a.max(v[0].norm().max(v[1].norm())));
        if !size.is_finite() || (base > 0.0 && size > 1e12 * base * (1.0 + 1.0 / collar.ds()).powi(j as i32 + 1)) {
            return Err(Error::IllConditioned(format!("profile coefficients blew up at order {}", j + 1)));
        }
        out.alpha.push(next);
    }
    Ok(out)
}

/// The order-one stack: `α_{1,1} = P₊α₁ − ½ P₋Θ(T−ξ)α₀`,
/// `α_{1,2} = −P₊Θ(T−ξ)α₀`.
pub fn first_profile(collar: &CollarSpec, alpha0: &[Spinor2], alpha1_plus: &[Spinor2], xi: C64) -> Result<ProfileStack> {
    let stack = ProfileStack::new(collar.clone(), alpha0.to_vec(), xi)?;
    profile_recursion(&stack, 1, &[alpha1_plus.to_vec()])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExteriorComparison {
    pub mass: f64,
    /// Sup error of `V⁰` against the exact exterior mode over `z ∈ [0, z_max]`.
    pub err0: f64,
    /// Same with `V⁰ + V¹/M`; `None` when the stack has order 0.
    pub err1: Option<f64>,
    /// `P₊` mismatch at `z = 0`.
    pub err_plus_at_zero: f64,
    /// Sup of `|f|` on the boundary, the scale of the errors.
    pub scale: f64,
}

/// Boundary trace of a disk mode sampled on `collar`.
pub fn disk_trace(mode: &DiskMode, collar: &CollarSpec) -> Result<Vec<Spinor2>> {
    collar.theta.iter().map(|&th| mode.boundary_trace(th)).collect()
}

/// `P₊` part of a boundary field.
pub fn plus_part(collar: &CollarSpec, w: &[Spinor2]) -> Result<Vec<Spinor2>> {
    let (hp, _) = collar.split_all(w)?;
    let zero = vec![C64::new(0.0, 0.0); hp.len()];
    Ok(collar.join_all(&hp, &zero))
}

/// Seed stack for a finite-mass disk mode: `α₀ = P₊ f|∂Ω`, `ξ = λ`,
/// `P₊α₁ = 0`, carried to `order`.
pub fn disk_stack(mode: &DiskMode, collar: &CollarSpec, order: usize) -> Result<ProfileStack> {
    let alpha0 = plus_part(collar, &disk_trace(mode, collar)?)?;
    let stack = ProfileStack::new(collar.clone(), alpha0, C64::new(mode.lambda, 0.0))?;
    profile_recursion(&stack, order, &[])
}

/// Compare the profile expansion with the exact exterior eigenfunction at
/// `t = z/M`, `z ∈ [0, z_max]`.
pub fn compare_exterior(mode: &DiskMode, stack: &ProfileStack, z_max: f64, nz: usize) -> Result<ExteriorComparison> {
    let mass = match mode.problem.mass {
        Mass::Finite(m) => m,
        Mass::Infinite => return Err(Error::Precondition("exterior comparison needs a finite-mass mode".into())),
    };
    let collar = &stack.collar;
    let radius = mode.problem.radius;
    if (collar.length - 2.0 * PI * radius).abs() > 1e-9 * radius || collar.kappa.iter().any(|k| (k * radius - 1.0).abs() > 1e-9) {
        return Err(Error::Precondition("collar does not describe the mode's disk".into()));
    }
    if nz < 2 || !(z_max > 0.0) {
        return Err(Error::InvalidArgument("need nz >= 2 and z_max > 0".into()));
    }
    let mm = mode.problem.m as f64;
    let mut err0: f64 = 0.0;
    let mut err1: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut err_plus_at_zero: f64 = 0.0;
    for iz in 0..nz {
        let z = z_max * iz as f64 / (nz - 1) as f64;
        let st = mode.radial(radius + z / mass)?;
        for (k, &th) in collar.theta.iter().enumerate() {
            let exact = [
                C64::from_polar(st.u, mm * th),
                C64::new(0.0, 1.0) * C64::from_polar(st.v, (mm + 1.0) * th),
            ];
            if iz == 0 {
                scale = scale.max((exact[0].norm_sqr() + exact[1].norm_sqr()).sqrt());
            }
            let v0 = stack.sum(0, mass, k, z);
            let d0 = [exact[0] - v0[0], exact[1] - v0[1]];
            err0 = err0.max((d0[0].norm_sqr() + d0[1].norm_sqr()).sqrt());
            if iz == 0 {
                let (gp, _) = tangent_frame_2d(th).split(&d0);
                err_plus_at_zero = err_plus_at_zero.max(2f64.sqrt() * gp.norm());
            }
            if stack.order() >= 1 {
                let v1 = stack.sum(1, mass, k, z);
                let d1 = [exact[0] - v1[0], exact[1] - v1[1]];
                err1 = err1.max((d1[0].norm_sqr() + d1[1].norm_sqr()).sqrt());
            }
        }
    }
    Ok(ExteriorComparison {
        mass,
        err0,
        err1: (stack.order() >= 1).then_some(err1),
        err_plus_at_zero,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub z: f64,
    pub exact: Spinor2,
    pub profile: Spinor2,
}

/// Exact exterior mode against `Σ_{j ≤ upto} M^{−j} V^j` along the normal
/// through the first collar sample.
pub fn exterior_profile(mode: &DiskMode, stack: &ProfileStack, upto: usize, z_max: f64, nz: usize) -> Result<Vec<ProfileSample>> {
    let mass = match mode.problem.mass {
        Mass::Finite(m) => m,
        Mass::Infinite => return Err(Error::Precondition("exterior comparison needs a finite-mass mode".into())),
    };
    if upto > stack.order() {
        return Err(Error::InvalidArgument(format!("stack has order {}, asked for {upto}", stack.order())));
    }
    if nz < 2 || !(z_max > 0.0) {
        return Err(Error::InvalidArgument("need nz >= 2 and z_max > 0".into()));
    }
    let th = stack.collar.theta[0];
    let mm = mode.problem.m as f64;
    (0..nz)
        .map(|iz| {
            let z = z_max * iz as f64 / (nz - 1) as f64;
            let st = mode.radial(mode.problem.radius + z / mass)?;
            let exact = [C64::from_polar(st.u, mm * th), C64::new(0.0, 1.0) * C64::from_polar(st.v, (mm + 1.0) * th)];
            Ok(ProfileSample { z, exact, profile: stack.sum(upto, mass, 0, z) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub kappa: f64,
    pub r_min: f64,
    pub r_max: f64,
}

/// Least-squares slope of `−log|f(r)|` on `[R + 1/M, R + 5/M]`.
pub fn decay_rate_fit(mode: &DiskMode) -> Result<DecayFit> {
    let (mass, kappa) = match (mode.problem.mass, mode.kappa) {
        (Mass::Finite(m), Some(k)) => (m, k),
        _ => return Err(Error::Precondition("decay fit needs a finite-mass mode".into())),
    };
    let radius = mode.problem.radius;
    let mut hi = 5.0;
    loop {
        let lo_r = radius + 1.0 / mass;
        let hi_r = radius + hi / mass;
        let n = 41;
        let mut pts = Vec::with_capacity(n);
        let mut ok = true;
        for i in 0..n {
            let r = lo_r + (hi_r - lo_r) * i as f64 / (n - 1) as f64;
            let s = mode.radial(r)?;
            let a = s.u.hypot(s.v);
            if !(a > 1e-300) {
                ok = false;
                break;
            }
            pts.push((r, a.ln()));
        }
        if ok {
            let nf = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            return Ok(DecayFit { rate: -sxy / sxx, kappa, r_min: lo_r, r_max: hi_r });
        }
        hi = 1.0 + 0.5 * (hi - 1.0);
        if hi < 1.5 {
            return Err(Error::NoConvergence("exterior mode underflows right at the boundary".into()));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryIdentityReport {
    /// `sup |P₊(T−ξ)α₀ − P₊f| / sup |f|` with `α₀ = f/(λ−ξ)` on `∂Ω`.
    pub residual: f64,
    /// Ratio of the two sides, constant along the boundary for disk modes.
    pub ratio: C64,
    /// `((m+½)/R − ξ)/(λ − ξ)`, the ratio predicted by separation of variables.
    pub predicted_ratio: C64,
}

/// Tests `P₊(T−ξ)α₀ = P₊f` on the disk boundary, where `α₀ = P₊U⁰` and
/// `U⁰ = f/(λ−ξ)` solves `(T−ξ)U⁰ = f`, `P₋U⁰ = 0`, for a bag mode `f`.
pub fn boundary_identity_check(mode: &DiskMode, collar: &CollarSpec, xi: C64) -> Result<BoundaryIdentityReport> {
    if mode.problem.mass != Mass::Infinite {
        return Err(Error::Precondition("boundary identity check needs a bag mode".into()));
    }
    let lam = C64::new(mode.lambda, 0.0);
    if (lam - xi).norm() < 1e-12 {
        return Err(Error::InvalidArgument("xi must differ from the eigenvalue".into()));
    }
    let f = disk_trace(mode, collar)?;
    let alpha0: Vec<Spinor2> = f.iter().map(|v| [v[0] / (lam - xi), v[1] / (lam - xi)]).collect();
    let lhs = tangential_operator_2d(collar, &alpha0, xi)?;
    let (lp, _) = collar.split_all(&lhs)?;
    let (fp, _) = collar.split_all(&f)?;
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut best = 0;
    for k in 0..fp.len() {
        residual = residual.max(2f64.sqrt() * (lp[k] - fp[k]).norm());
        scale = scale.max(2f64.sqrt() * fp[k].norm());
        if fp[k].norm() > fp[best].norm() {
            best = k;
        }
    }
    let m = mode.problem.m as f64;
    let radius = mode.problem.radius;
    Ok(BoundaryIdentityReport {
        residual: residual / scale,
        ratio: lp[best] / fp[best],
        predicted_ratio: (C64::new((m + 0.5) / radius, 0.0) - xi) / (lam - xi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> CollarSpec {
        CollarSpec::disk(1.0, 256, 0.2).unwrap()
    }

    #[test]
    fn constant_scalar_on_circle() {
        let c = circle();
        let xi = C64::new(0.3, 0.0);
        let w: Vec<Spinor2> = c.theta.iter().map(|&t| tangent_frame_2d(t).join(C64::new(2.0, 0.0), C64::new(0.0, 0.0))).collect();
        let out = tangential_operator_2d(&c, &w, xi).unwrap();
        let (hp, _) = c.split_all(&out).unwrap();
        for h in hp {
            assert!((h - C64::new(2.0 * (0.5 - 0.3), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_mode_eigenvalue() {
        let c = circle();
        let xi = C64::new(0.0, 0.0);
        let p = 3.0;
        let w: Vec<Spinor2> = c.s.iter().zip(&c.theta).map(|(&s, &t)| tangent_frame_2d(t).join(C64::from_polar(1.0, 2.0 * PI * p * s / c.length), C64::new(0.0, 0.0))).collect();
        let out = tangential_operator_2d(&c, &w, xi).unwrap();
        let (hp, _) = c.split_all(&out).unwrap();
        let (gp, _) = c.split_all(&w).unwrap();
        for (a, b) in hp.iter().zip(&gp) {
            assert!((a - b * (2.0 * PI * p / c.length + 0.5)).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_minus_component() {
        let c = circle();
        let w: Vec<Spinor2> = c.theta.iter().map(|&t| tangent_frame_2d(t).join(C64::new(1.0, 0.0), C64::new(0.1, 0.0))).collect();
        assert!(leading_profile(&c, &w, 1.0).is_err());
        assert!(tangential_operator_2d(&c, &w, C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn open_curve_rejected() {
        assert!(CollarSpec::new(1.0, vec![0.0; 32], vec![1.0; 32], 0.1).is_err());
    }

    #[test]
    fn zero_seed_gives_zero_stack() {
        let c = circle();
        let zero = vec![[C64::new(0.0, 0.0); 2]; c.len()];
        let st = ProfileStack::new(c, zero, C64::new(1.0, 0.0)).unwrap();
        let st = profile_recursion(&st, 3, &[]).unwrap();
        assert!(st.alpha.iter().flatten().flatten().all(|v| v[0].norm() == 0.0 && v[1].norm() == 0.0));
    }
}
