//! Interior eigenpairs of the grid operator by block preconditioned iteration
//! on the folded operator `(H − σ)²`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::operator::GridOperator;
use crate::error::{Error, Result};
use crate::spinor::C64;

const CHUNK: usize = 1 << 12;
const MAX_K: usize = 12;

/// Preconditioner applied to the folded residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    /// Inverse of the constant-coefficient folded symbol with a uniform mass
    /// `mass_weight·M`, plus `shift`.
    Fourier { mass_weight: f64, shift: f64 },
    /// Massive Fourier solve restricted to the exterior plus a massless one
    /// on a patch around the shape.
    Split { shift: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSettings {
    pub sigma: f64,
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl EigenSettings {
    pub fn new(sigma: f64, k: usize, tol: f64, seed: u64) -> EigenSettings {
        EigenSettings {
            sigma,
            k,
            tol,
            seed,
            max_iter: None,
            preconditioner: Preconditioner::Split { shift: 1.0 },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// `‖H v − λ v‖ / ‖v‖`.
    pub residual: f64,
    #[serde(skip)]
    pub vector: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSolution {
    pub sigma: f64,
    pub pairs: Vec<EigenPair>,
    pub iterations: usize,
    pub matvecs: usize,
    pub converged: bool,
    /// Final Ritz vectors of the whole search block, nearest the shift first.
    #[serde(skip)]
    pub block: Vec<Vec<C64>>,
}

impl EigenSolution {
    pub fn require_converged(self) -> Result<EigenSolution> {
        if self.converged {
            Ok(self)
        } else {
            let worst = self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
            Err(Error::NoConvergence(format!(
                "eigensolver stopped after {} iterations with residual {worst:.3e}",
                self.iterations
            )))
        }
    }
}

/// The `k` eigenpairs of `H_h` nearest `σ`.
///
/// Unconverged runs return the current Ritz pairs with `converged = false`.
pub fn folded_spectrum_eigs(op: &GridOperator, settings: &EigenSettings) -> Result<EigenSolution> {
    validate(op, settings)?;
    let prec = FoldedPreconditioner::new(op, settings.preconditioner, settings.sigma);
    let start = random_start(op, block_size(settings.k), settings.seed, &prec);
    iterate(op, settings, &prec, start)
}

/// As [`folded_spectrum_eigs`], started from Ritz vectors on successively
/// coarser grids (spacing doubled while the grid stays reasonably resolved).
pub fn folded_spectrum_eigs_multilevel(op: &GridOperator, settings: &EigenSettings) -> Result<EigenSolution> {
    validate(op, settings)?;
    let prec = FoldedPreconditioner::new(op, settings.preconditioner, settings.sigma);
    let b = block_size(settings.k);
    let start = match op.coarsened() {
        Some(coarse) if coarse.side() >= COARSEST_SIDE && coarse.mass * coarse.h <= COARSE_RESOLUTION => {
            let mut coarse_settings = settings.clone();
            coarse_settings.tol = settings.tol.max(COARSE_TOL);
            coarse_settings.max_iter = None;
            let sol = folded_spectrum_eigs_multilevel(&coarse, &coarse_settings)?;
            sol.block.iter().map(|v| coarse.prolongate(v, op)).collect()
        }
        _ => random_start(op, b, settings.seed, &prec),
    };
    iterate(op, settings, &prec, start)
}

const COARSEST_SIDE: usize = 63;
const COARSE_RESOLUTION: f64 = 2.0;
const COARSE_TOL: f64 = 1e-3;

fn block_size(k: usize) -> usize {
    k + 1
}

fn validate(op: &GridOperator, settings: &EigenSettings) -> Result<()> {
    let k = settings.k;
    let sigma = settings.sigma;
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={MAX_K}")));
    }
    if op.mass > 0.0 && sigma.abs() >= op.mass {
        return Err(Error::InvalidArgument(format!("shift {sigma} lies outside the gap (−{0}, {0})", op.mass)));
    }
    if !(settings.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    Ok(())
}

/// Random block supported around the shape, smoothed by the preconditioner.
fn random_start(op: &GridOperator, b: usize, seed: u64, prec: &FoldedPreconditioner) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = op.shape.max_radius() * 1.5;
    let n = op.side();
    (0..b)
        .map(|_| {
            let mut v = vec![C64::new(0.0, 0.0); op.dim()];
            for j in 0..n {
                for i in 0..n {
                    let dx = op.coord(i) - op.shape.center[0];
                    let dy = op.coord(j) - op.shape.center[1];
                    let w = (-(dx * dx + dy * dy) / (reach * reach)).exp();
                    for c in 0..2 {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        v[2 * (j * n + i) + c] = C64::new(re, im) * w;
                    }
                }
            }
            let s = prec.apply(&v);
            prec.apply(&s)
        })
        .collect()
}

fn iterate(
    op: &GridOperator,
    settings: &EigenSettings,
    prec: &FoldedPreconditioner,
    start: Vec<Vec<C64>>,
) -> Result<EigenSolution> {
    let k = settings.k;
    let sigma = settings.sigma;
    let b = start.len();
    let rho = op.spectral_bound() + sigma.abs();
    let cap = settings
        .max_iter
        .unwrap_or_else(|| (20.0 * k as f64 * rho * op.half_width).ceil() as usize);
    let mut work = Work { op, sigma, matvecs: 0 };

    let mut x = start;
    let mut ax = work.folded(&x);
    svqb(&mut [&mut x, &mut ax], 1e-14)?;
    if x.len() < b {
        return Err(Error::IllConditioned("starting block is rank deficient".into()));
    }
    let mut p: Option<(Vec<Vec<C64>>, Vec<Vec<C64>>)> = None;
    let mut theta = vec![0.0; b];
    {
        let (vals, vecs) = hermitian_eig(&gram_hermitian(&x, &ax));
        rotate(&mut x, &vecs, b);
        rotate(&mut ax, &vecs, b);
        theta.copy_from_slice(&vals[..b]);
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        iterations += 1;
        let r: Vec<Vec<C64>> = (0..b).map(|i| axpy_new(&ax[i], -theta[i], &x[i])).collect();
        if iterations % 5 == 1 {
            let y: Vec<Vec<C64>> = x.iter().map(|v| work.shifted(v)).collect();
            if h_ritz(&x, &y, sigma).iter().take(k).all(|p| p.residual <= settings.tol) {
                converged = true;
                break;
            }
        }
        let mut w: Vec<Vec<C64>> = r.iter().map(|ri| prec.apply(ri)).collect();
        project_out(&x, &mut w);
        let mut aw = work.folded(&w);
        svqb(&mut [&mut w, &mut aw], 1e-12)?;

        let mut s = x.clone();
        let mut as_ = ax.clone();
        s.extend(w);
        as_.extend(aw);
        if let Some((mut pp, mut ap)) = p.take() {
            // projection is linear, so the images follow with the same coefficients
            let coeffs = gram(&s, &pp);
            subtract_combination(&s, &coeffs, &mut pp);
            subtract_combination(&as_, &coeffs, &mut ap);
            svqb(&mut [&mut pp, &mut ap], 1e-12)?;
            s.extend(pp);
            as_.extend(ap);
        }
        let (vals, vecs) = hermitian_eig(&gram_hermitian(&s, &as_));
        let c = vecs.columns(0, b).into_owned();
        let mut cp = c.clone();
        cp.rows_mut(0, b).fill(C64::new(0.0, 0.0));
        let mut outs = combine(&s, &DMatrix::from_fn(s.len(), 2 * b, |r, col| {
            if col < b { c[(r, col)] } else { cp[(r, col - b)] }
        }));
        let mut aouts = combine(&as_, &DMatrix::from_fn(s.len(), 2 * b, |r, col| {
            if col < b { c[(r, col)] } else { cp[(r, col - b)] }
        }));
        p = Some((outs.split_off(b), aouts.split_off(b)));
        x = outs;
        ax = aouts;
        theta.copy_from_slice(&vals.as_slice()[..b]);
    }

    let y: Vec<Vec<C64>> = x.iter().map(|v| work.shifted(v)).collect();
    let pairs = h_ritz(&x, &y, sigma);
    if converged && pairs.len() > k {
        let gap = (pairs[k].lambda - sigma).abs() - (pairs[k - 1].lambda - sigma).abs();
        if gap < settings.tol {
            return Err(Error::IllConditioned(format!(
                "cluster spill: Ritz values {} and {} are equidistant from the shift",
                pairs[k - 1].lambda, pairs[k].lambda
            )));
        }
    }
    let block = pairs.iter().map(|p| p.vector.clone()).collect();
    let mut pairs = pairs;
    pairs.truncate(k);
    Ok(EigenSolution { sigma, pairs, iterations, matvecs: work.matvecs, converged, block })
}

struct Work<'a> {
    op: &'a GridOperator,
    sigma: f64,
    matvecs: usize,
}

impl Work<'_> {
    /// `(H − σ)²v` for each vector.
    fn folded(&mut self, vs: &[Vec<C64>]) -> Vec<Vec<C64>> {
        vs.iter()
            .map(|v| {
                let y = self.shifted(v);
                self.shifted(&y)
            })
            .collect()
    }

    fn shifted(&mut self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        self.op.apply(v, &mut out);
        self.matvecs += 1;
        let s = self.sigma;
        out.par_chunks_mut(CHUNK)
            .zip(v.par_chunks(CHUNK))
            .for_each(|(o, v)| o.iter_mut().zip(v).for_each(|(o, v)| *o -= v * s));
        out
    }
}

/// Ritz pairs of `H` on the span of the orthonormal block `x`, nearest `σ` first.
fn h_ritz(x: &[Vec<C64>], y: &[Vec<C64>], sigma: f64) -> Vec<EigenPair> {
    let g = gram_hermitian(x, y);
    let (vals, vecs) = hermitian_eig(&g);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()));
    let c = DMatrix::from_fn(x.len(), order.len(), |r, col| vecs[(r, order[col])]);
    let vs = combine(x, &c);
    let hvs = combine(y, &c);
    order
        .iter()
        .zip(vs.into_iter().zip(hvs))
        .map(|(&i, (v, hv))| {
            let t = vals[i];
            let res = axpy_new(&hv, -t, &v);
            let num = dot(&res, &res).re;
            let den = dot(&v, &v).re;
            EigenPair { lambda: sigma + t, residual: (num / den).sqrt(), vector: v }
        })
        .collect()
}

fn axpy_new(a: &[C64], s: f64, x: &[C64]) -> Vec<C64> {
    let mut out = a.to_vec();
    out.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(o, x)| o.iter_mut().zip(x).for_each(|(o, x)| *o += x * s));
    out
}

/// `G[i][j] = aᵢᴴ bⱼ`, summed chunk by chunk in a fixed order.
fn gram(a: &[Vec<C64>], b: &[Vec<C64>]) -> DMatrix<C64> {
    let len = a[0].len();
    let chunks = len.div_ceil(CHUNK);
    let (na, nb) = (a.len(), b.len());
    let parts: Vec<Vec<C64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let mut acc = vec![C64::new(0.0, 0.0); na * nb];
            for i in 0..na {
                for j in 0..nb {
                    acc[i * nb + j] = dot(&a[i][lo..hi], &b[j][lo..hi]);
                }
            }
            acc
        })
        .collect();
    let mut g = DMatrix::from_element(na, nb, C64::new(0.0, 0.0));
    for part in parts {
        for i in 0..na {
            for j in 0..nb {
                g[(i, j)] += part[i * nb + j];
            }
        }
    }
    g
}

/// `aᴴ b` for a Hermitian product, computing the upper triangle only.
fn gram_hermitian(a: &[Vec<C64>], b: &[Vec<C64>]) -> DMatrix<C64> {
    let len = a[0].len();
    let chunks = len.div_ceil(CHUNK);
    let n = a.len();
    let parts: Vec<Vec<C64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let mut acc = vec![C64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in i..n {
                    acc[i * n + j] = dot(&a[i][lo..hi], &b[j][lo..hi]);
                }
            }
            acc
        })
        .collect();
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for part in parts {
        for i in 0..n {
            for j in i..n {
                g[(i, j)] += part[i * n + j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[(i, j)] = g[(j, i)].conj();
        }
    }
    g
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let mut ac = a.chunks_exact(4);
    let mut bc = b.chunks_exact(4);
    for (x, y) in (&mut ac).zip(&mut bc) {
        for l in 0..4 {
            re[l] += x[l].re * y[l].re + x[l].im * y[l].im;
            im[l] += x[l].re * y[l].im - x[l].im * y[l].re;
        }
    }
    let mut tail = C64::new(0.0, 0.0);
    for (x, y) in ac.remainder().iter().zip(bc.remainder()) {
        tail += x.conj() * y;
    }
    C64::new(re.iter().sum(), im.iter().sum()) + tail
}

/// `outs[col] += Σ_row vs[row] · c[row, col]`, one pass over the inputs.
fn accumulate(vs: &[Vec<C64>], c: &DMatrix<C64>, outs: &mut [Vec<C64>]) {
    let mut per_chunk: Vec<Vec<&mut [C64]>> = Vec::new();
    for out in outs.iter_mut() {
        for (ci, piece) in out.chunks_mut(CHUNK).enumerate() {
            if per_chunk.len() <= ci {
                per_chunk.push(Vec::new());
            }
            per_chunk[ci].push(piece);
        }
    }
    per_chunk.into_par_iter().enumerate().for_each(|(ci, mut pieces)| {
        let lo = ci * CHUNK;
        for (row, v) in vs.iter().enumerate() {
            let hi = lo + pieces[0].len();
            let src = &v[lo..hi];
            for (col, piece) in pieces.iter_mut().enumerate() {
                let w = c[(row, col)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                piece.iter_mut().zip(src).for_each(|(o, v)| *o += v * w);
            }
        }
    });
}

/// Columns of `vs · c`.
fn combine(vs: &[Vec<C64>], c: &DMatrix<C64>) -> Vec<Vec<C64>> {
    let mut outs = vec![vec![C64::new(0.0, 0.0); vs[0].len()]; c.ncols()];
    accumulate(vs, c, &mut outs);
    outs
}

fn rotate(vs: &mut Vec<Vec<C64>>, c: &DMatrix<C64>, cols: usize) {
    *vs = combine(vs, &c.columns(0, cols).into_owned());
}

/// `vs −= basis · coeffs`.
fn subtract_combination(basis: &[Vec<C64>], coeffs: &DMatrix<C64>, vs: &mut [Vec<C64>]) {
    accumulate(basis, &(-coeffs), vs);
}

fn project_out(basis: &[Vec<C64>], vs: &mut [Vec<C64>]) {
    let coeffs = gram(basis, vs);
    subtract_combination(basis, &coeffs, vs);
}

/// Orthonormalise the first set in place by eigen-decomposition of its Gram
/// matrix, dropping directions below `drop` relative; the other sets receive
/// the same linear map.
fn svqb(sets: &mut [&mut Vec<Vec<C64>>], drop: f64) -> Result<()> {
    for _ in 0..2 {
        let g = gram_hermitian(sets[0], sets[0]);
        let n = g.nrows();
        let d: Vec<f64> = (0..n).map(|i| 1.0 / g[(i, i)].re.max(1e-300).sqrt()).collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * d[i] * d[j]);
        let (vals, vecs) = hermitian_eig(&scaled);
        let top = vals.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > drop * top).collect();
        if keep.is_empty() {
            return Err(Error::IllConditioned("search block collapsed to zero".into()));
        }
        let t = DMatrix::from_fn(n, keep.len(), |i, c| vecs[(i, keep[c])] * d[i] / vals[keep[c]].sqrt());
        for set in sets.iter_mut() {
            let rotated = combine(set, &t);
            **set = rotated;
        }
        let low = vals[keep[0]];
        if low > 1e-4 * top {
            break;
        }
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix, ascending.
fn hermitian_eig(g: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = g.nrows();
    let sym = DMatrix::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Inverse of a constant-coefficient folded symbol on a square Dirichlet
/// patch, diagonal in the sine basis.
struct SineSolver {
    n: usize,
    symbol: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl SineSolver {
    fn new(n: usize, h: f64, mass: f64, wilson_c: f64, shift: f64) -> SineSolver {
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        let wc = 2.0 * wilson_c / h;
        // normalisation of the forward and inverse sine transforms folded in
        let scale = (2.0 / (n + 1) as f64).powi(2);
        let mut symbol = vec![0.0; n * n];
        for q in 0..n {
            let kq = std::f64::consts::PI * (q + 1) as f64 / (n + 1) as f64;
            for p in 0..n {
                let kp = std::f64::consts::PI * (p + 1) as f64 / (n + 1) as f64;
                let s2 = (kp.sin().powi(2) + kq.sin().powi(2)) / (h * h);
                let w = mass + wc * ((kp / 2.0).sin().powi(2) + (kq / 2.0).sin().powi(2));
                symbol[q * n + p] = scale / (s2 + w * w + shift);
            }
        }
        SineSolver { n, symbol, fft }
    }

    fn solve(&self, grid: &mut [C64]) {
        self.dst_2d(grid);
        grid.par_iter_mut().zip(&self.symbol).for_each(|(g, s)| *g *= s);
        self.dst_2d(grid);
    }

    /// Unnormalised DST-I along both axes of an `n × n` row-major array.
    fn dst_2d(&self, grid: &mut [C64]) {
        let n = self.n;
        self.dst_rows(grid);
        let mut t = vec![C64::new(0.0, 0.0); n * n];
        transpose::transpose(grid, &mut t, n, n);
        self.dst_rows(&mut t);
        transpose::transpose(&t, grid, n, n);
    }

    /// DST-I of every row; the FFT of the odd extension is −2i times the
    /// sine transform.
    fn dst_rows(&self, grid: &mut [C64]) {
        let n = self.n;
        let len = 2 * (n + 1);
        let rows_per_job = 32;
        grid.par_chunks_mut(n * rows_per_job).for_each(|block| {
            let rows = block.len() / n;
            let mut buf = vec![C64::new(0.0, 0.0); rows * len];
            for (line, ext) in block.chunks(n).zip(buf.chunks_mut(len)) {
                for (j, x) in line.iter().enumerate() {
                    ext[j + 1] = *x;
                    ext[len - 1 - j] = -*x;
                }
            }
            let mut scratch = vec![C64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (line, ext) in block.chunks_mut(n).zip(buf.chunks(len)) {
                for (k, x) in line.iter_mut().enumerate() {
                    *x = ext[k + 1] * C64::new(0.0, 0.5);
                }
            }
        });
    }
}

enum FoldedPreconditioner {
    None,
    Fourier(SineSolver),
    /// Massive solve on the exterior nodes plus a massless solve on a patch
    /// covering the shape.
    Split { n: usize, outside: Vec<bool>, exterior: SineSolver, patch: SineSolver, offset: usize },
}

impl FoldedPreconditioner {
    fn new(op: &GridOperator, kind: Preconditioner, sigma: f64) -> FoldedPreconditioner {
        let n = op.side();
        match kind {
            Preconditioner::None => FoldedPreconditioner::None,
            Preconditioner::Fourier { mass_weight, shift } => FoldedPreconditioner::Fourier(SineSolver::new(
                n,
                op.h,
                mass_weight * op.mass,
                op.wilson_c,
                sigma * sigma + shift,
            )),
            Preconditioner::Split { shift } => {
                let outside = (0..n * n).map(|k| op.is_outside(k % n, k / n)).collect::<Vec<_>>();
                let (lo, hi) = inside_bounds(op);
                let offset = lo.saturating_sub(2);
                let end = (hi + 3).min(n);
                let m = end - offset;
                FoldedPreconditioner::Split {
                    n,
                    outside,
                    exterior: SineSolver::new(n, op.h, op.mass, op.wilson_c, sigma * sigma + shift),
                    patch: SineSolver::new(m, op.h, 0.0, op.wilson_c, sigma * sigma + shift),
                    offset,
                }
            }
        }
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            FoldedPreconditioner::None => v.to_vec(),
            FoldedPreconditioner::Fourier(solver) => {
                let mut out = vec![C64::new(0.0, 0.0); v.len()];
                for comp in 0..2 {
                    let mut grid: Vec<C64> = (0..v.len() / 2).map(|k| v[2 * k + comp]).collect();
                    solver.solve(&mut grid);
                    for (k, g) in grid.into_iter().enumerate() {
                        out[2 * k + comp] = g;
                    }
                }
                out
            }
            FoldedPreconditioner::Split { n, outside, exterior, patch, offset } => {
                let n = *n;
                let m = patch.n;
                let mut out = vec![C64::new(0.0, 0.0); v.len()];
                for comp in 0..2 {
                    let mut grid: Vec<C64> = (0..n * n)
                        .map(|k| if outside[k] { v[2 * k + comp] } else { C64::new(0.0, 0.0) })
                        .collect();
                    exterior.solve(&mut grid);
                    let mut local = vec![C64::new(0.0, 0.0); m * m];
                    for b in 0..m {
                        for a in 0..m {
                            let k = (b + offset) * n + a + offset;
                            if !outside[k] {
                                local[b * m + a] = v[2 * k + comp];
                            }
                        }
                    }
                    patch.solve(&mut local);
                    for k in 0..n * n {
                        if outside[k] {
                            out[2 * k + comp] = grid[k];
                        }
                    }
                    for b in 0..m {
                        for a in 0..m {
                            let k = (b + offset) * n + a + offset;
                            if !outside[k] {
                                out[2 * k + comp] += local[b * m + a];
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

/// Smallest and largest node index (either axis) inside the shape.
fn inside_bounds(op: &GridOperator) -> (usize, usize) {
    let n = op.side();
    let mut lo = n;
    let mut hi = 0;
    for j in 0..n {
        for i in 0..n {
            if !op.is_outside(i, j) {
                lo = lo.min(i).min(j);
                hi = hi.max(i).max(j);
            }
        }
    }
    (lo, hi)
}
