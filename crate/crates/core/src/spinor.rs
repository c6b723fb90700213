//! Pauli and Dirac matrices, the boundary matrix `B = -i Θ (Λ·n)`, its
//! spectral projectors and the small algebraic identities everything else
//! relies on.
//!
//! Matrices are at most 4×4, so products and the exponential `e^{zB}` are
//! written out in closed form instead of going through a linear-algebra
//! crate. Inner products are conjugate-linear in the first argument.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A two-component spinor value.
pub type Spinor2 = [C64; 2];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used when validating unit normals and involutions.
pub const VALIDATION_TOL: f64 = 1e-12;

/// Dense complex square matrix of dimension 2 or 4.
#[derive(Clone, Copy, PartialEq)]
pub struct SpinorMatrix {
    dim: usize,
    data: [C64; 16],
}

impl fmt::Debug for SpinorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SpinorMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.3}{:+.3}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl SpinorMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "spinor dimension must be 2 or 4");
        SpinorMatrix { dim, data: [ZERO; 16] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.set(k, k, ONE);
        }
        m
    }

    /// Builds a matrix from row-major entries; `rows.len()` fixes the dimension.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    /// Block matrix `[[a, b], [c, d]]` from four 2×2 blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert!(a.dim == 2 && b.dim == 2 && c.dim == 2 && d.dim == 2);
        let mut m = Self::zeros(4);
        for r in 0..2 {
            for col in 0..2 {
                m.set(r, col, a.get(r, col));
                m.set(r, col + 2, b.get(r, col));
                m.set(r + 2, col, c.get(r, col));
                m.set(r + 2, col + 2, d.get(r, col));
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * 4 + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * 4 + c] = v;
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(r, c, self.get(r, c) * s);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(r, c, self.get(c, r).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                m = m.max(self.get(r, c).norm());
            }
        }
        m
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (*self * self.adjoint() - Self::identity(self.dim)).max_abs() <= tol
    }

    /// Matrix-vector product for 2-spinors.
    pub fn apply2(&self, v: &Spinor2) -> Spinor2 {
        assert_eq!(self.dim, 2);
        [
            self.get(0, 0) * v[0] + self.get(0, 1) * v[1],
            self.get(1, 0) * v[0] + self.get(1, 1) * v[1],
        ]
    }

    /// Matrix-vector product for arbitrary-length slices matching `dim`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }
}

impl Mul for SpinorMatrix {
    type Output = SpinorMatrix;
    fn mul(self, rhs: SpinorMatrix) -> SpinorMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = SpinorMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.get(r, k) * rhs.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

impl Add for SpinorMatrix {
    type Output = SpinorMatrix;
    fn add(self, rhs: SpinorMatrix) -> SpinorMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for k in 0..16 {
            out.data[k] += rhs.data[k];
        }
        out
    }
}

impl Sub for SpinorMatrix {
    type Output = SpinorMatrix;
    fn sub(self, rhs: SpinorMatrix) -> SpinorMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for k in 0..16 {
            out.data[k] -= rhs.data[k];
        }
        out
    }
}

impl Neg for SpinorMatrix {
    type Output = SpinorMatrix;
    fn neg(self) -> SpinorMatrix {
        self.scale(-ONE)
    }
}

/// Pauli matrix `σ_k`, `k ∈ {1, 2, 3}`.
pub fn pauli(k: usize) -> Result<SpinorMatrix> {
    let m = match k {
        1 => SpinorMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]]),
        2 => SpinorMatrix::from_rows([[ZERO, -I], [I, ZERO]]),
        3 => SpinorMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]]),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Pauli index must be 1, 2 or 3, got {k}"
            )))
        }
    };
    Ok(m)
}

fn sigma(k: usize) -> SpinorMatrix {
    pauli(k).expect("static index")
}

/// The 4×4 Dirac matrices in block form.
#[derive(Debug, Clone, Copy)]
pub struct DiracMatrices {
    pub alpha: [SpinorMatrix; 3],
    pub beta: SpinorMatrix,
}

/// `α_k = [[0, σ_k], [σ_k, 0]]`, `β = diag(1, 1, -1, -1)`.
pub fn dirac_matrices() -> DiracMatrices {
    let z = SpinorMatrix::zeros(2);
    let id = SpinorMatrix::identity(2);
    let alpha = [1, 2, 3].map(|k| {
        let s = sigma(k);
        SpinorMatrix::from_blocks(&z, &s, &s, &z)
    });
    let beta = SpinorMatrix::from_blocks(&id, &z, &z, &(-id));
    DiracMatrices { alpha, beta }
}

/// `Θ_n`: `σ_3` in 2D, `β` in 3D (dim 4).
pub fn theta_matrix(dim: usize) -> Result<SpinorMatrix> {
    match dim {
        2 => Ok(sigma(3)),
        4 => Ok(dirac_matrices().beta),
        _ => Err(Error::InvalidArgument(format!("spinor dimension must be 2 or 4, got {dim}"))),
    }
}

/// Unit normal in R² or R³.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalVector {
    components: Vec<f64>,
}

impl NormalVector {
    /// Validates that `components` has length 2 or 3 and unit norm (1e-12).
    pub fn new(components: &[f64]) -> Result<Self> {
        if components.len() != 2 && components.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "normal must live in R^2 or R^3, got length {}",
                components.len()
            )));
        }
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::Precondition(format!("normal is not unit length (|n| = {norm})")));
        }
        Ok(NormalVector { components: components.to_vec() })
    }

    /// Rescales an arbitrary non-zero vector to unit length.
    pub fn normalized(components: &[f64]) -> Result<Self> {
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        let v: Vec<f64> = components.iter().map(|x| x / norm).collect();
        Self::new(&v)
    }

    /// `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        NormalVector { components: vec![theta.cos(), theta.sin()] }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    /// Spinor dimension that goes with this normal's ambient space.
    pub fn spinor_dim(&self) -> usize {
        if self.components.len() == 2 {
            2
        } else {
            4
        }
    }
}

/// `Λ·n`: `σ·n` in 2D, `α·n` in 3D.
pub fn lambda_dot(n: &NormalVector) -> SpinorMatrix {
    let c = n.components();
    if c.len() == 2 {
        sigma(1).scale(C64::from(c[0])) + sigma(2).scale(C64::from(c[1]))
    } else {
        let d = dirac_matrices();
        d.alpha[0].scale(C64::from(c[0]))
            + d.alpha[1].scale(C64::from(c[1]))
            + d.alpha[2].scale(C64::from(c[2]))
    }
}

/// Boundary matrix `B = -i Θ (Λ·n)`.
pub fn boundary_matrix(dim: usize, n: &NormalVector) -> Result<SpinorMatrix> {
    if dim != n.spinor_dim() {
        return Err(Error::InvalidArgument(format!(
            "spinor dimension {dim} does not match a normal in R^{}",
            n.ambient_dim()
        )));
    }
    let c = n.components();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > VALIDATION_TOL {
        return Err(Error::Precondition(format!("normal is not unit length (|n| = {norm})")));
    }
    Ok((theta_matrix(dim)? * lambda_dot(n)).scale(-I))
}

/// Orthogonal projectors `P± = (I ± B)/2`.
#[derive(Debug, Clone, Copy)]
pub struct Projectors {
    pub plus: SpinorMatrix,
    pub minus: SpinorMatrix,
}

pub fn projectors(b: &SpinorMatrix) -> Result<Projectors> {
    let id = SpinorMatrix::identity(b.dim());
    let inv = (*b * *b - id).max_abs();
    if inv > VALIDATION_TOL {
        return Err(Error::Precondition(format!("B^2 != I (residual {inv:.3e})")));
    }
    if !b.is_hermitian(VALIDATION_TOL) {
        return Err(Error::Precondition("B is not Hermitian".into()));
    }
    let half = C64::from(0.5);
    Ok(Projectors { plus: (id + *b).scale(half), minus: (id - *b).scale(half) })
}

/// `e^{zB}` for an involution `B`: `cosh(z) I + sinh(z) B`.
pub fn exp_involution(b: &SpinorMatrix, z: f64) -> SpinorMatrix {
    SpinorMatrix::identity(b.dim()).scale(C64::from(z.cosh())) + b.scale(C64::from(z.sinh()))
}

/// Residual of one matrix identity.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
}

/// Max-entry residuals of the projector/boundary-matrix identity set.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IdentityReport {
    pub dim: usize,
    pub residuals: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Names of the checked identities, in report order.
pub const IDENTITY_NAMES: [&str; 10] = [
    "theta_pminus_eq_pplus_theta",
    "theta_pplus_eq_pminus_theta",
    "b_pplus_eq_pplus",
    "b_pminus_eq_neg_pminus",
    "theta_b_eq_neg_i_lambda_n",
    "b_theta_anticommute",
    "b_squared_eq_identity",
    "b_hermitian_traceless",
    "pplus_exp_zb_eq_exp_z_pplus",
    "pminus_exp_zb_eq_exp_neg_z_pminus",
];

/// Evaluates every identity for one normal and one exponent `z`.
///
/// The two exponential identities are reported relative to `e^{|z|}`.
pub fn verify_identities(dim: usize, n: &NormalVector, z: f64) -> Result<IdentityReport> {
    let b = boundary_matrix(dim, n)?;
    let p = projectors(&b)?;
    let theta = theta_matrix(dim)?;
    let id = SpinorMatrix::identity(dim);
    let ln = lambda_dot(n);
    let e = exp_involution(&b, z);
    let scale = z.abs().exp();

    let values = [
        (theta * p.minus - p.plus * theta).max_abs(),
        (theta * p.plus - p.minus * theta).max_abs(),
        (b * p.plus - p.plus).max_abs(),
        (b * p.minus + p.minus).max_abs(),
        (theta * b - ln.scale(-I)).max_abs(),
        b.anticommutator(&theta).max_abs(),
        (b * b - id).max_abs(),
        (b - b.adjoint()).max_abs().max(b.trace().norm()),
        (p.plus * e - p.plus.scale(C64::from(z.exp()))).max_abs() / scale,
        (p.minus * e - p.minus.scale(C64::from((-z).exp()))).max_abs() / scale,
    ];
    let residuals = IDENTITY_NAMES
        .iter()
        .zip(values)
        .map(|(&name, residual)| IdentityResidual { name, residual })
        .collect();
    Ok(IdentityReport { dim, residuals })
}

/// Worst residual per identity over `samples` random normals and exponents
/// `z ∈ [-z_max, z_max]`, drawn from a ChaCha stream seeded with `seed`.
pub fn sample_identity_residuals(
    dim: usize,
    samples: usize,
    seed: u64,
    z_max: f64,
) -> Result<IdentityReport> {
    if dim != 2 && dim != 4 {
        return Err(Error::InvalidArgument(format!("dim must be 2 or 4, got {dim}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = vec![0.0f64; IDENTITY_NAMES.len()];
    for _ in 0..samples {
        let n = random_normal(dim, &mut rng);
        let z = rng.gen_range(-z_max..=z_max);
        let rep = verify_identities(dim, &n, z)?;
        for (w, r) in worst.iter_mut().zip(&rep.residuals) {
            *w = w.max(r.residual);
        }
    }
    let residuals = IDENTITY_NAMES
        .iter()
        .zip(worst)
        .map(|(&name, residual)| IdentityResidual { name, residual })
        .collect();
    Ok(IdentityReport { dim, residuals })
}

/// Uniform random unit normal for the given spinor dimension.
pub fn random_normal<R: Rng>(dim: usize, rng: &mut R) -> NormalVector {
    if dim == 2 {
        NormalVector::from_angle(rng.gen_range(0.0..std::f64::consts::TAU))
    } else {
        // uniform on S^2 via cos(polar) uniform
        let u: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - u * u).max(0.0).sqrt();
        NormalVector::normalized(&[s * phi.cos(), s * phi.sin(), u]).expect("non-zero")
    }
}

/// Local boundary frame at a point of a planar curve with outward normal
/// angle `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame2D {
    pub theta: f64,
    /// `a = i e^{iθ}`; `B = [[0, ā], [a, 0]]`.
    pub a: C64,
    pub plus_dir: Spinor2,
    pub minus_dir: Spinor2,
}

pub fn tangent_frame_2d(theta: f64) -> BoundaryFrame2D {
    let a = I * C64::from_polar(1.0, theta);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    BoundaryFrame2D {
        theta,
        a,
        plus_dir: [C64::from(r), a * r],
        minus_dir: [C64::from(r), -a * r],
    }
}

impl BoundaryFrame2D {
    /// Coefficients `(g₊, g₋)` with `w = g₊ (1, a) + g₋ (1, -a)`.
    #[inline]
    pub fn split(&self, w: &Spinor2) -> (C64, C64) {
        let aw = self.a.conj() * w[1];
        ((w[0] + aw) * 0.5, (w[0] - aw) * 0.5)
    }

    /// Inverse of [`split`](Self::split).
    #[inline]
    pub fn join(&self, g_plus: C64, g_minus: C64) -> Spinor2 {
        [g_plus + g_minus, self.a * (g_plus - g_minus)]
    }
}

/// `⟨u, v⟩` for 2-spinors, conjugate-linear in `u`.
#[inline]
pub fn inner2(u: &Spinor2, v: &Spinor2) -> C64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

#[inline]
pub fn norm2_sq(u: &Spinor2) -> f64 {
    u[0].norm_sqr() + u[1].norm_sqr()
}
