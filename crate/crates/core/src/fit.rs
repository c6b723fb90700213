//! Mass sweeps and expansions of eigenvalues in powers of `1/M`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::disk::{eigenvalue_finite_near, eigenvalues_infinite, infinite_roots_upto, Sign};
use crate::error::{Error, Result};
use crate::grid::{folded_spectrum_eigs_multilevel, CorrectionMatrix, EigenSettings, GridOperator, ShapeSpec};

/// Fraction of the distance to the nearest other eigenvalue used as `η`.
pub const ETA_FRACTION: f64 = 0.45;
pub const MAX_FIT_ORDER: usize = 4;
pub const CONDITION_WARN: f64 = 1e8;
pub const CONDITION_LIMIT: f64 = 1e12;
const SAME_EIGENVALUE: f64 = 1e-9;

/// An isolated eigenvalue `λ∞` of multiplicity `l` and its isolation radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub lambda_inf: f64,
    pub eta: f64,
    pub l: usize,
}

impl ClusterSpec {
    /// Checks that no other entry of `spectrum` lies in `(λ∞ − η, λ∞ + η)`.
    pub fn new(lambda_inf: f64, eta: f64, l: usize, spectrum: &[f64]) -> Result<ClusterSpec> {
        if !(eta > 0.0) || l == 0 || !lambda_inf.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cluster needs η > 0 and l ≥ 1 (got η={eta}, l={l})"
            )));
        }
        if let Some(x) = spectrum
            .iter()
            .find(|x| (*x - lambda_inf).abs() > SAME_EIGENVALUE && (*x - lambda_inf).abs() < eta)
        {
            return Err(Error::Precondition(format!(
                "eigenvalue {x} lies within η = {eta} of λ∞ = {lambda_inf}"
            )));
        }
        Ok(ClusterSpec { lambda_inf, eta, l })
    }

    /// Cluster of the `index`-th (from 1) bag eigenvalue of channel `m` on
    /// the given branch, with `η` from the neighbours over all channels.
    pub fn disk(radius: f64, m: i32, index: usize, sign: Sign) -> Result<ClusterSpec> {
        if index == 0 {
            return Err(Error::InvalidArgument("mode index starts at 1".into()));
        }
        let lambda_inf = eigenvalues_infinite(m, index, radius, sign)?[index - 1];
        let spectrum = disk_spectrum_near(radius, lambda_inf)?;
        let l = spectrum.iter().filter(|x| (*x - lambda_inf).abs() <= SAME_EIGENVALUE).count();
        let gap = spectrum
            .iter()
            .filter(|x| (*x - lambda_inf).abs() > SAME_EIGENVALUE)
            .map(|x| (x - lambda_inf).abs())
            .fold(f64::INFINITY, f64::min);
        ClusterSpec::new(lambda_inf, ETA_FRACTION * gap, l.max(1), &spectrum)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        (lambda - self.lambda_inf).abs() < self.eta
    }
}

/// All bag eigenvalues of the disk with `|λ| ≤ |λ0| + 2(π+2)/R`, every
/// channel that can reach that range.
pub fn disk_spectrum_near(radius: f64, lambda0: f64) -> Result<Vec<f64>> {
    let limit = lambda0.abs() + 2.0 * (std::f64::consts::PI + 2.0) / radius;
    // |λ|R ≥ |m + ½| for every eigenvalue of channel m
    let channels = (limit * radius).ceil() as i32 + 1;
    let mut out = Vec::new();
    for m in -channels - 1..=channels {
        out.extend(infinite_roots_upto(m, radius, limit)?);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepSource {
    DiskAnalytic,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mass: f64,
    pub lambdas: Vec<f64>,
    /// The solver lost the cluster at this mass; `lambdas` is empty.
    pub gap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub source: SweepSource,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Sorts rows by mass and rejects repeated masses.
    pub fn new(source: SweepSource, mut rows: Vec<SweepRow>) -> Result<SweepTable> {
        rows.sort_by(|a, b| a.mass.total_cmp(&b.mass));
        if rows.windows(2).any(|w| w[0].mass == w[1].mass) {
            return Err(Error::InvalidArgument("sweep masses must be distinct".into()));
        }
        Ok(SweepTable { source, rows })
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| !r.gap)
    }

    /// Rows without gaps.
    pub fn complete_rows(&self) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| !r.gap).collect()
    }

    /// Checks every complete row against the cluster bounds.
    pub fn validate(&self, cluster: &ClusterSpec) -> Result<()> {
        for row in self.complete_rows() {
            if row.lambdas.len() != cluster.l {
                return Err(Error::DimensionMismatch { expected: cluster.l, got: row.lambdas.len() });
            }
            if let Some(l) = row.lambdas.iter().find(|l| !cluster.contains(**l)) {
                return Err(Error::Precondition(format!(
                    "eigenvalue {l} at M = {} lies outside (λ∞ − η, λ∞ + η)",
                    row.mass
                )));
            }
        }
        Ok(())
    }
}

fn check_masses(masses: &[f64], cluster: &ClusterSpec) -> Result<()> {
    if masses.is_empty() {
        return Err(Error::InvalidArgument("no masses given".into()));
    }
    if masses.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("masses must be strictly increasing".into()));
    }
    if masses[0] < 10.0 * cluster.lambda_inf.abs() {
        return Err(Error::InvalidArgument(format!(
            "smallest mass {} is below 10·|λ∞| = {}",
            masses[0],
            10.0 * cluster.lambda_inf.abs()
        )));
    }
    Ok(())
}

/// Finite-mass disk eigenvalues of channel `m` tracked from `λ∞` through
/// increasing masses, each solve seeded with the previous one.
pub fn mass_sweep_disk(radius: f64, m: i32, cluster: &ClusterSpec, masses: &[f64]) -> Result<SweepTable> {
    check_masses(masses, cluster)?;
    if cluster.l != 1 {
        return Err(Error::InvalidArgument("disk channels carry nondegenerate clusters".into()));
    }
    let mut rows = Vec::with_capacity(masses.len());
    let mut target = cluster.lambda_inf;
    for &mass in masses {
        match eigenvalue_finite_near(m, mass, radius, target) {
            Ok(l) if cluster.contains(l) => {
                rows.push(SweepRow { mass, lambdas: vec![l], gap: false });
                target = l;
            }
            _ => rows.push(SweepRow { mass, lambdas: Vec::new(), gap: true }),
        }
    }
    SweepTable::new(SweepSource::DiskAnalytic, rows)
}

/// Grid discretisation parameters shared by every mass of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSweepParams {
    pub half_width: f64,
    pub h: f64,
    pub wilson_c: f64,
    pub tol: f64,
    pub seed: u64,
}

/// Grid eigenvalues of the cluster for each mass.
pub fn mass_sweep_grid(
    shape: &ShapeSpec,
    cluster: &ClusterSpec,
    masses: &[f64],
    params: &GridSweepParams,
) -> Result<SweepTable> {
    check_masses(masses, cluster)?;
    let mut rows = Vec::with_capacity(masses.len());
    let mut sigma = cluster.lambda_inf;
    for &mass in masses {
        let op = GridOperator::new(*shape, mass, params.half_width, params.h, params.wilson_c)?;
        let settings = EigenSettings::new(sigma, cluster.l, params.tol, params.seed);
        let solved = folded_spectrum_eigs_multilevel(&op, &settings).and_then(|s| s.require_converged());
        match solved {
            Ok(sol) => {
                let mut lambdas: Vec<f64> = sol.pairs.iter().map(|p| p.lambda).collect();
                lambdas.sort_by(f64::total_cmp);
                if lambdas.iter().all(|l| cluster.contains(*l)) {
                    sigma = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
                    rows.push(SweepRow { mass, lambdas, gap: false });
                } else {
                    rows.push(SweepRow { mass, lambdas: Vec::new(), gap: true });
                }
            }
            Err(_) => rows.push(SweepRow { mass, lambdas: Vec::new(), gap: true }),
        }
    }
    SweepTable::new(SweepSource::Grid, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub order: usize,
    pub lambda_inf: f64,
    pub masses: Vec<f64>,
    /// `mu_hat[j][k]`: coefficient of `M^{−(j+1)}` for branch `k`.
    pub mu_hat: Vec<Vec<f64>>,
    /// Largest `|λ^M − model|` per branch.
    pub residual_max: Vec<f64>,
    /// `M(λ^M − λ∞) − μ̂₁` per branch and row.
    pub diagnostic: Vec<Vec<f64>>,
    /// Spectral condition number of the weighted, scaled design matrix.
    pub condition: f64,
    pub condition_warning: bool,
    /// Largest change of each coefficient when one row is dropped,
    /// `[j][k]` as in `mu_hat`.
    pub leave_one_out: Option<Vec<Vec<f64>>>,
}

/// First-order fit `λ^M ≈ λ∞ + μ/M`.
///
/// Least squares on the scaled residual `M(λ^M − λ∞) − μ` with weights `M²`,
/// so the largest masses dominate.
pub fn fit_first_order(table: &SweepTable, cluster: &ClusterSpec) -> Result<FitResult> {
    fit_any_order(table, cluster, 1)
}

/// Order-`N` fit `λ^M ≈ λ∞ + Σ_{j≤N} μ_j M^{−j}`, the first-order weighting
/// extended to a polynomial in `1/M` for the scaled residual.
pub fn fit_any_order(table: &SweepTable, cluster: &ClusterSpec, order: usize) -> Result<FitResult> {
    if order == 0 || order > MAX_FIT_ORDER {
        return Err(Error::InvalidArgument(format!("order must be in 1..={MAX_FIT_ORDER}")));
    }
    table.validate(cluster)?;
    let rows = table.complete_rows();
    let needed = if order == 1 { 4 } else { order + 3 };
    if rows.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "order-{order} fit needs at least {needed} complete rows, got {}",
            rows.len()
        )));
    }
    let masses: Vec<f64> = rows.iter().map(|r| r.mass).collect();
    let l = cluster.l;
    let mut mu_hat = vec![vec![0.0; l]; order];
    let mut residual_max = vec![0.0; l];
    let mut diagnostic = vec![Vec::new(); l];
    let mut condition: f64 = 0.0;
    let mut loo = vec![vec![0.0f64; l]; order];
    for k in 0..l {
        let ys: Vec<f64> = rows.iter().map(|r| r.lambdas[k] - cluster.lambda_inf).collect();
        let (coef, cond) = solve_weighted(&masses, &ys, order)?;
        condition = condition.max(cond);
        for j in 0..order {
            mu_hat[j][k] = coef[j];
        }
        for (m, y) in masses.iter().zip(&ys) {
            let model: f64 = (0..order).map(|j| coef[j] * m.powi(-(j as i32 + 1))).sum();
            residual_max[k] = f64::max(residual_max[k], (y - model).abs());
            diagnostic[k].push(m * y - coef[0]);
        }
        if masses.len() > order + 1 {
            for drop in 0..masses.len() {
                let ms: Vec<f64> = masses.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, m)| *m).collect();
                let yy: Vec<f64> = ys.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, y)| *y).collect();
                let (c, _) = solve_weighted(&ms, &yy, order)?;
                for j in 0..order {
                    loo[j][k] = loo[j][k].max((c[j] - coef[j]).abs());
                }
            }
        }
    }
    let leave_one_out = if masses.len() > order + 1 { Some(loo) } else { None };
    Ok(FitResult {
        order,
        lambda_inf: cluster.lambda_inf,
        masses,
        mu_hat,
        residual_max,
        diagnostic,
        condition,
        condition_warning: condition > CONDITION_WARN,
        leave_one_out,
    })
}

/// Minimise `Σ M² (M y − Σ_j c_j M^{−j+1})²` by QR of the design matrix in
/// the scaled variable `t = M_min/M`. Returns the coefficients and the
/// condition number.
fn solve_weighted(masses: &[f64], ys: &[f64], order: usize) -> Result<(Vec<f64>, f64)> {
    let m0 = masses.iter().cloned().fold(f64::INFINITY, f64::min);
    let mtop = masses.iter().cloned().fold(0.0, f64::max);
    let n = masses.len();
    // weights normalised by the largest mass to keep entries O(1)
    let a = DMatrix::from_fn(n, order, |i, j| {
        let w = masses[i] / mtop;
        w * (m0 / masses[i]).powi(j as i32)
    });
    let b = DVector::from_fn(n, |i, _| {
        let w = masses[i] / mtop;
        w * masses[i] * ys[i]
    });
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned(format!(
            "design matrix condition {cond:.3e} exceeds {CONDITION_LIMIT:.0e}; spread the masses further apart or lower the order"
        )));
    }
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    let r = qr.r();
    let scaled = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::IllConditioned("singular design matrix".into()))?;
    // undo t = M_min/M: c_j t^j = (c_j M_min^j) M^{−j}
    Ok(((0..order).map(|j| scaled[j] * m0.powi(j as i32)).collect(), cond))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchMatch {
    pub fitted: f64,
    pub predicted: f64,
    pub abs_error: f64,
    /// `None` when the prediction is zero.
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub branches: Vec<BranchMatch>,
    pub max_rel_error: Option<f64>,
}

/// Match fitted first-order coefficients to the eigenvalues of a
/// correction matrix, both sorted ascending.
pub fn compare_prediction(fit: &FitResult, correction: &CorrectionMatrix) -> Result<MatchReport> {
    let l = fit.mu_hat[0].len();
    if correction.dim != l {
        return Err(Error::DimensionMismatch { expected: l, got: correction.dim });
    }
    let predicted = correction.eigenvalues();
    let mut fitted = fit.mu_hat[0].clone();
    fitted.sort_by(f64::total_cmp);
    let mut pred = predicted.to_vec();
    pred.sort_by(f64::total_cmp);
    let branches: Vec<BranchMatch> = fitted
        .iter()
        .zip(&pred)
        .map(|(&f, &p)| {
            let abs_error = (f - p).abs();
            BranchMatch { fitted: f, predicted: p, abs_error, rel_error: (p != 0.0).then(|| abs_error / p.abs()) }
        })
        .collect();
    let rels: Vec<f64> = branches.iter().filter_map(|b| b.rel_error).collect();
    let max_rel_error = if rels.len() == branches.len() { rels.iter().cloned().reduce(f64::max) } else { None };
    Ok(MatchReport { branches, max_rel_error })
}

/// Least-squares slope of `log|y|` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::C64;

    fn synthetic(f: impl Fn(f64) -> f64) -> SweepTable {
        let rows = [100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0]
            .iter()
            .map(|&m| SweepRow { mass: m, lambdas: vec![1.0 + f(m)], gap: false })
            .collect();
        SweepTable::new(SweepSource::DiskAnalytic, rows).unwrap()
    }

    fn cluster() -> ClusterSpec {
        ClusterSpec::new(1.0, 0.5, 1, &[]).unwrap()
    }

    #[test]
    fn exact_first_order() {
        let fit = fit_first_order(&synthetic(|m| 3.0 / m), &cluster()).unwrap();
        assert!((fit.mu_hat[0][0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn second_order_bias_is_small() {
        let fit = fit_first_order(&synthetic(|m| 3.0 / m - 5.0 / (m * m)), &cluster()).unwrap();
        assert!((2.9..=3.1).contains(&fit.mu_hat[0][0]));
    }

    #[test]
    fn cubic_recovered() {
        let fit = fit_any_order(&synthetic(|m| 3.0 / m - 5.0 / m.powi(2) + 40.0 / m.powi(3)), &cluster(), 3).unwrap();
        for (got, want) in fit.mu_hat.iter().zip([3.0, -5.0, 40.0]) {
            assert!((got[0] - want).abs() < 1e-8 * want.abs(), "{got:?} vs {want}");
        }
        assert!(fit.leave_one_out.unwrap().iter().all(|c| c[0] < 1e-6));
    }

    #[test]
    fn too_few_rows() {
        let mut t = synthetic(|m| 1.0 / m);
        t.rows.truncate(3);
        assert!(fit_first_order(&t, &cluster()).is_err());
        let t = synthetic(|m| 1.0 / m);
        assert!(fit_any_order(&t, &cluster(), 4).is_err());
        assert!(fit_any_order(&t, &cluster(), 5).is_err());
    }

    #[test]
    fn row_order_does_not_matter() {
        let t = synthetic(|m| 2.0 / m + 1.0 / (m * m));
        let mut rows = t.rows.clone();
        rows.reverse();
        rows.swap(1, 4);
        let u = SweepTable::new(SweepSource::DiskAnalytic, rows).unwrap();
        let a = fit_any_order(&t, &cluster(), 2).unwrap();
        let b = fit_any_order(&u, &cluster(), 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rows_outside_cluster_rejected() {
        let t = synthetic(|_| 0.7);
        assert!(fit_first_order(&t, &cluster()).is_err());
    }

    #[test]
    fn prediction_report() {
        let fit = fit_first_order(&synthetic(|m| 3.0 / m), &cluster()).unwrap();
        let one = |x: f64| CorrectionMatrix::from_entries(vec![vec![C64::new(x, 0.0)]]).unwrap();
        let r = compare_prediction(&fit, &one(3.0)).unwrap();
        assert!(r.max_rel_error.unwrap() < 1e-12);
        let doubled = compare_prediction(&fit, &one(3.0).scaled(2.0)).unwrap();
        assert!((doubled.branches[0].predicted - 6.0).abs() < 1e-12);
        let r = compare_prediction(&fit, &one(0.0)).unwrap();
        assert!(r.max_rel_error.is_none());
        assert!((r.branches[0].abs_error - 3.0).abs() < 1e-12);
        let two = CorrectionMatrix::from_entries(vec![vec![C64::new(1.0, 0.0); 2]; 2]).unwrap();
        assert!(compare_prediction(&fit, &two).is_err());
    }

    #[test]
    fn cluster_isolation() {
        assert!(ClusterSpec::new(1.0, 0.5, 1, &[0.0, 1.0, 1.4]).is_err());
        assert!(ClusterSpec::new(1.0, 0.5, 1, &[0.0, 1.0, 1.6]).is_ok());
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }
}
