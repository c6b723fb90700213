//! Python bindings for the disk solvers, the mass-sweep fits and the grid
//! eigensolver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dirac_bag::bessel;
use dirac_bag::disk::{self, DiskProblem, Mass, Sign};
use dirac_bag::fit::{self, ClusterSpec, SweepRow, SweepSource, SweepTable};
use dirac_bag::grid::{self, EigenSettings, GridOperator, ShapeSpec};
use dirac_bag::spinor::{sample_identity_residuals, C64};
use dirac_bag::verify::{self, VerifyConfig};

create_exception!(dirac_bag_py, ValidationError, PyValueError);
create_exception!(dirac_bag_py, NumericalError, PyRuntimeError);

fn to_py(e: dirac_bag::Error) -> PyErr {
    if e.is_validation() {
        ValidationError::new_err(e.to_string())
    } else {
        NumericalError::new_err(e.to_string())
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for dirac_bag::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn sign(s: &str) -> PyResult<Sign> {
    s.parse().py()
}

/// Normalised eigenmode of the disk, bag (`mass=None`) or finite mass.
#[pyclass(name = "DiskMode", frozen)]
struct PyDiskMode {
    inner: disk::DiskMode,
}

#[pymethods]
impl PyDiskMode {
    #[new]
    #[pyo3(signature = (radius, m, lam, mass=None))]
    fn new(radius: f64, m: i32, lam: f64, mass: Option<f64>) -> PyResult<Self> {
        let problem = DiskProblem::new(radius, m, mass.map_or(Mass::Infinite, Mass::Finite)).py()?;
        Ok(PyDiskMode { inner: disk::normalize_mode(&problem, lam).py()? })
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.problem.radius
    }

    #[getter]
    fn m(&self) -> i32 {
        self.inner.problem.m
    }

    #[getter]
    fn mass(&self) -> Option<f64> {
        match self.inner.problem.mass {
            Mass::Infinite => None,
            Mass::Finite(m) => Some(m),
        }
    }

    #[getter]
    fn mu_pred(&self) -> f64 {
        self.inner.mu_pred
    }

    #[getter]
    fn mu_tangential(&self) -> f64 {
        self.inner.mu_tangential
    }

    #[getter]
    fn boundary_density(&self) -> f64 {
        self.inner.boundary_density
    }

    /// `(u, v)` at radius `r`.
    fn radial(&self, r: f64) -> PyResult<(f64, f64)> {
        let s = self.inner.radial(r).py()?;
        Ok((s.u, s.v))
    }

    fn spinor_at(&self, x: f64, y: f64) -> PyResult<(C64, C64)> {
        let s = self.inner.spinor_at(x, y).py()?;
        Ok((s[0], s[1]))
    }

    fn boundary_trace(&self, theta: f64) -> PyResult<(C64, C64)> {
        let s = self.inner.boundary_trace(theta).py()?;
        Ok((s[0], s[1]))
    }

    fn __repr__(&self) -> String {
        format!(
            "DiskMode(radius={}, m={}, lam={}, mass={:?})",
            self.inner.problem.radius, self.inner.problem.m, self.inner.lambda, self.mass()
        )
    }
}

#[pyfunction]
fn bessel_j(m: i32, x: f64) -> PyResult<f64> {
    bessel::bessel_j_int(m, x).py()
}

#[pyfunction]
fn bessel_k(m: i32, x: f64) -> PyResult<f64> {
    bessel::bessel_k_int(m, x).py()
}

/// First `count` bag eigenvalues of channel `m` on one sign branch.
#[pyfunction]
#[pyo3(signature = (radius, m, count, sign="+"))]
fn disk_eigenvalues(radius: f64, m: i32, count: usize, sign: &str) -> PyResult<Vec<f64>> {
    disk::eigenvalues_infinite(m, count, radius, self::sign(sign)?).py()
}

/// Finite-mass eigenvalue of channel `m` nearest to `target`.
#[pyfunction]
fn disk_eigenvalue_finite(radius: f64, m: i32, mass: f64, target: f64) -> PyResult<f64> {
    disk::eigenvalue_finite_near(m, mass, radius, target).py()
}

/// `(λ∞, [λ_M or None for each mass])`.
#[pyfunction]
#[pyo3(signature = (radius, m, masses, mode_index=1, sign="+"))]
fn disk_sweep(
    py: Python<'_>,
    radius: f64,
    m: i32,
    masses: Vec<f64>,
    mode_index: usize,
    sign: &str,
) -> PyResult<(f64, Vec<Option<f64>>)> {
    let sign = self::sign(sign)?;
    py.detach(|| {
        let cluster = ClusterSpec::disk(radius, m, mode_index, sign)?;
        let table = fit::mass_sweep_disk(radius, m, &cluster, &masses)?;
        Ok((cluster.lambda_inf, table.rows.iter().map(|r| r.lambdas.first().copied()).collect()))
    })
    .py()
}

/// Fits `λ^M ≈ λ∞ + Σ μ_j M^{−j}`. `lambdas[i]` lists the cluster
/// eigenvalues at `masses[i]`; an empty list marks a gap.
#[pyfunction]
#[pyo3(signature = (masses, lambdas, lambda_inf, eta=None, order=1))]
fn fit_sweep<'py>(
    py: Python<'py>,
    masses: Vec<f64>,
    lambdas: Vec<Vec<f64>>,
    lambda_inf: f64,
    eta: Option<f64>,
    order: usize,
) -> PyResult<Bound<'py, PyDict>> {
    if masses.len() != lambdas.len() {
        return Err(ValidationError::new_err("masses and lambdas differ in length"));
    }
    let rows = masses
        .iter()
        .zip(lambdas)
        .map(|(&mass, mut l)| {
            l.sort_by(f64::total_cmp);
            SweepRow { mass, gap: l.is_empty(), lambdas: l }
        })
        .collect();
    let table = SweepTable::new(SweepSource::DiskAnalytic, rows).py()?;
    let l = table.complete_rows().first().map_or(1, |r| r.lambdas.len());
    let cluster = ClusterSpec::new(lambda_inf, eta.unwrap_or(f64::INFINITY), l, &[]).py()?;
    let res = fit::fit_any_order(&table, &cluster, order).py()?;
    let d = PyDict::new(py);
    d.set_item("order", res.order)?;
    d.set_item("lambda_inf", res.lambda_inf)?;
    d.set_item("masses", res.masses)?;
    d.set_item("mu_hat", res.mu_hat)?;
    d.set_item("residual_max", res.residual_max)?;
    d.set_item("diagnostic", res.diagnostic)?;
    d.set_item("condition", res.condition)?;
    d.set_item("condition_warning", res.condition_warning)?;
    d.set_item("leave_one_out", res.leave_one_out)?;
    Ok(d)
}

/// Worst residual per projector identity.
#[pyfunction]
#[pyo3(signature = (dim=2, samples=1000, seed=0, z_max=10.0))]
fn identities<'py>(py: Python<'py>, dim: usize, samples: usize, seed: u64, z_max: f64) -> PyResult<Bound<'py, PyDict>> {
    let rep = sample_identity_residuals(dim, samples, seed, z_max).py()?;
    let d = PyDict::new(py);
    for r in rep.residuals {
        d.set_item(r.name, r.residual)?;
    }
    Ok(d)
}

/// Grid eigenpairs near `sigma` and the boundary Gram matrix of the cluster.
#[pyfunction]
#[pyo3(signature = (shape, mass, h, half_width=2.0, sigma=None, k=1, wilson_c=1.0, tol=1e-6, seed=0, trace_samples=256))]
#[allow(clippy::too_many_arguments)]
fn grid_solve<'py>(
    py: Python<'py>,
    shape: &str,
    mass: f64,
    h: f64,
    half_width: f64,
    sigma: Option<f64>,
    k: usize,
    wilson_c: f64,
    tol: f64,
    seed: u64,
    trace_samples: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let shape: ShapeSpec = shape.parse().py()?;
    let op = GridOperator::new(shape, mass, half_width, h, wilson_c).py()?;
    let sigma = match (sigma, shape.kind) {
        (Some(s), _) => s,
        (None, grid::ShapeKind::Disk { r }) => ClusterSpec::disk(r, 0, 1, Sign::Plus).py()?.lambda_inf,
        (None, _) => return Err(ValidationError::new_err("sigma is required for non-disk shapes")),
    };
    let (sol, gram) = py
        .detach(|| -> dirac_bag::Result<_> {
            let sol = grid::folded_spectrum_eigs_multilevel(&op, &EigenSettings::new(sigma, k, tol, seed))?
                .require_converged()?;
            let fields: Vec<_> = sol.pairs.iter().map(|p| p.vector.clone()).collect();
            let (fields, volume) = grid::orthonormalize_interior(&op, &fields)?;
            let traces = fields
                .iter()
                .map(|f| grid::boundary_trace(&op, f, trace_samples))
                .collect::<dirac_bag::Result<Vec<_>>>()?;
            let gram = grid::gram_correction_matrix(&traces, &volume)?;
            Ok((sol, gram))
        })
        .py()?;
    let d = PyDict::new(py);
    d.set_item("sigma", sigma)?;
    d.set_item("eigenvalues", sol.pairs.iter().map(|p| p.lambda).collect::<Vec<_>>())?;
    d.set_item("residuals", sol.pairs.iter().map(|p| p.residual).collect::<Vec<_>>())?;
    d.set_item("gram", gram.entries.clone())?;
    d.set_item("gram_eigenvalues", gram.eigenvalues())?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("matvecs", sol.matvecs)?;
    Ok(d)
}

/// Acceptance checks as `(id, name, measured, threshold, status)` rows.
#[pyfunction]
#[pyo3(signature = (skip_grid=true, seed=0))]
fn verify_all(py: Python<'_>, skip_grid: bool, seed: u64) -> Vec<(usize, String, String, String, String)> {
    let config = VerifyConfig { seed, skip_grid, ..VerifyConfig::default() };
    let summary = py.detach(|| verify::verify_all(&config));
    summary
        .rows
        .into_iter()
        .map(|r| (r.id, r.name.to_string(), r.measured, r.threshold.to_string(), r.status.label().to_string()))
        .collect()
}

#[pymodule]
fn dirac_bag_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ValidationError", m.py().get_type::<ValidationError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyDiskMode>()?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(disk_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(disk_eigenvalue_finite, m)?)?;
    m.add_function(wrap_pyfunction!(disk_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(identities, m)?)?;
    m.add_function(wrap_pyfunction!(grid_solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
