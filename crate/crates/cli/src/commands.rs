use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use dirac_bag::bessel;
use dirac_bag::disk::{eigenvalue_finite_near, eigenvalues_infinite, normalize_mode, DiskProblem, Sign};
use dirac_bag::fit::{fit_any_order, mass_sweep_disk, ClusterSpec, FitResult, SweepRow, SweepSource, SweepTable};
use dirac_bag::grid::{
    boundary_trace, folded_spectrum_eigs_multilevel, gram_correction_matrix, orthonormalize_interior, CorrectionMatrix,
    EigenSettings, GridOperator, ShapeKind, ShapeSpec,
};
use dirac_bag::layer::{disk_stack, exterior_profile, CollarSpec};
use dirac_bag::spinor::sample_identity_residuals;
use dirac_bag::verify::{verify_all, Status, VerifyConfig};

use crate::error::CliError;
use crate::table::{Cell, Table};
use crate::{Command, Format};

const IDENTITY_Z_MAX: f64 = 10.0;
const LAYER_Z_MAX: f64 = 10.0;
const LAYER_NZ: usize = 101;
const LAYER_COLLAR: usize = 256;
const LAYER_DELTA: f64 = 0.2;

pub struct Output {
    pub bytes: Vec<u8>,
    /// Set when the output was produced but reports failing checks.
    pub failing: Option<String>,
}

impl Output {
    fn ok(bytes: Vec<u8>) -> Output {
        Output { bytes, failing: None }
    }
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    /// Spinor dimension, 2 or 4.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug, Args)]
pub struct DiskInftyArgs {
    #[arg(long = "R")]
    radius: f64,
    #[arg(long, allow_negative_numbers = true)]
    m: i32,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    sign: Sign,
}

#[derive(Debug, Args)]
pub struct DiskSweepArgs {
    #[arg(long = "R")]
    radius: f64,
    #[arg(long, allow_negative_numbers = true)]
    m: i32,
    #[arg(long, default_value_t = 1)]
    mode_index: usize,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true, action = clap::ArgAction::Set)]
    masses: Vec<f64>,
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    sign: Sign,
}

#[derive(Debug, Args)]
pub struct LayerCheckArgs {
    #[arg(long = "R")]
    radius: f64,
    #[arg(long, allow_negative_numbers = true)]
    m: i32,
    #[arg(long, default_value_t = 1)]
    mode_index: usize,
    #[arg(long = "M")]
    mass: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    order: u8,
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    sign: Sign,
}

#[derive(Debug, Args)]
pub struct GridSolveArgs {
    /// `disk:R=1`, `ellipse:a=1.2,b=0.8` or `star:r0=1,c3=0.1`.
    #[arg(long)]
    shape: ShapeSpec,
    #[arg(long = "M")]
    mass: f64,
    /// Half-width of the computational box.
    #[arg(long = "L", default_value_t = 2.0)]
    half_width: f64,
    #[arg(long)]
    h: f64,
    /// Spectral shift; defaults to the first positive bag eigenvalue for disks.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    wilson_c: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 256)]
    trace_samples: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sweep CSV with an `M` column and `lambda_M` or `lambda_M_<k>` columns.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    lambda_inf: f64,
    /// Isolation radius; rows outside `(λ∞ − η, λ∞ + η)` are rejected.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    order: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    sweep: PathBuf,
    /// JSON with `lambda_inf` and either `mu` (list) or `gram` (matrix).
    #[arg(long)]
    prediction: PathBuf,
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SkipPart {
    Grid,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    skip: Vec<SkipPart>,
    #[arg(long, default_value_t = 1e-4)]
    grid_tol: f64,
    #[arg(long, default_value_t = 512)]
    trace_samples: usize,
}

pub fn dispatch(command: &Command, seed: u64, format: Format) -> Result<Output, CliError> {
    match command {
        Command::Identities(a) => identities(a, seed).map(|t| Output::ok(render(&t, format))),
        Command::BesselSelftest => bessel_selftest(format),
        Command::DiskInfty(a) => disk_infty(a).map(|t| Output::ok(render(&t, format))),
        Command::DiskSweep(a) => disk_sweep(a).map(|t| Output::ok(render(&t, format))),
        Command::LayerCheck(a) => layer_check(a).map(|t| Output::ok(render(&t, format))),
        Command::GridSolve(a) => grid_solve(a, seed).map(|v| Output::ok(pretty(&v))),
        Command::Fit(a) => fit(a).map(|r| Output::ok(pretty(&serde_json::to_value(r).expect("fit serialises")))),
        Command::Report(a) => report(a).map(|t| Output::ok(render(&t, format))),
        Command::VerifyAll(a) => verify(a, seed, format),
    }
}

fn render(table: &Table, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut out = Vec::new();
            table.write_csv(&mut out).expect("writing to memory");
            out
        }
        Format::Json => pretty(&table.to_json()),
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("json serialises");
    out.push(b'\n');
    out
}

fn identities(a: &IdentitiesArgs, seed: u64) -> Result<Table, CliError> {
    let rep = sample_identity_residuals(a.dim, a.samples, seed, IDENTITY_Z_MAX)?;
    let mut t = Table::new(&["identity_name", "max_residual"]);
    for r in &rep.residuals {
        t.push(vec![r.name.into(), r.residual.into()]);
    }
    Ok(t)
}

fn bessel_selftest(format: Format) -> Result<Output, CliError> {
    let rows = bessel::selftest()?;
    let mut t = Table::new(&["check", "worst", "tolerance", "status"]);
    let mut failed = Vec::new();
    for r in &rows {
        if !r.passed() {
            failed.push(r.name);
        }
        t.push(vec![r.name.into(), r.worst.into(), r.tolerance.into(), if r.passed() { "PASS" } else { "FAIL" }.into()]);
    }
    Ok(Output { bytes: render(&t, format), failing: (!failed.is_empty()).then(|| failed.join(", ")) })
}

fn disk_infty(a: &DiskInftyArgs) -> Result<Table, CliError> {
    let problem = DiskProblem::infinite(a.radius, a.m)?;
    let lambdas = eigenvalues_infinite(a.m, a.count, a.radius, a.sign)?;
    let mut t = Table::new(&["m", "index", "lambda", "mu_pred", "boundary_density"]);
    for (i, &l) in lambdas.iter().enumerate() {
        let mode = normalize_mode(&problem, l)?;
        t.push(vec![Cell::Int(a.m.into()), (i + 1).into(), l.into(), mode.mu_pred.into(), mode.boundary_density.into()]);
    }
    Ok(t)
}

fn disk_sweep(a: &DiskSweepArgs) -> Result<Table, CliError> {
    DiskProblem::infinite(a.radius, a.m)?;
    let cluster = ClusterSpec::disk(a.radius, a.m, a.mode_index, a.sign)?;
    let sweep = mass_sweep_disk(a.radius, a.m, &cluster, &a.masses)?;
    let mut t = Table::new(&["M", "lambda_M", "lambda_M_minus_lambda_inf"]);
    for row in &sweep.rows {
        let l = row.lambdas.first().copied();
        t.push(vec![row.mass.into(), l.into(), l.map(|l| l - cluster.lambda_inf).into()]);
    }
    Ok(t)
}

fn layer_check(a: &LayerCheckArgs) -> Result<Table, CliError> {
    let problem = DiskProblem::finite(a.radius, a.m, a.mass)?;
    if a.mode_index == 0 {
        return Err(CliError::Usage("mode index starts at 1".into()));
    }
    let lambda_inf = eigenvalues_infinite(a.m, a.mode_index, a.radius, a.sign)?[a.mode_index - 1];
    let lambda = eigenvalue_finite_near(a.m, a.mass, a.radius, lambda_inf)?;
    let mode = normalize_mode(&problem, lambda)?;
    let collar = CollarSpec::disk(a.radius, LAYER_COLLAR, LAYER_DELTA)?;
    let stack = disk_stack(&mode, &collar, a.order as usize)?;
    let samples = exterior_profile(&mode, &stack, a.order as usize, LAYER_Z_MAX, LAYER_NZ)?;
    let mut t = Table::new(&["z", "exact_u", "exact_v", "profile_u", "profile_v", "abs_err"]);
    for s in &samples {
        let err = ((s.exact[0] - s.profile[0]).norm_sqr() + (s.exact[1] - s.profile[1]).norm_sqr()).sqrt();
        t.push(vec![
            s.z.into(),
            s.exact[0].re.into(),
            s.exact[1].im.into(),
            s.profile[0].re.into(),
            s.profile[1].im.into(),
            err.into(),
        ]);
    }
    Ok(t)
}

fn complex_matrix(m: &CorrectionMatrix) -> Value {
    Value::Array(m.entries.iter().map(|row| row.iter().map(|z| json!([z.re, z.im])).collect()).collect())
}

fn grid_solve(a: &GridSolveArgs, seed: u64) -> Result<Value, CliError> {
    let op = GridOperator::new(a.shape, a.mass, a.half_width, a.h, a.wilson_c)?;
    if a.k == 0 || a.trace_samples == 0 {
        return Err(CliError::Usage("--k and --trace-samples must be positive".into()));
    }
    let sigma = match (a.sigma, a.shape.kind) {
        (Some(s), _) => s,
        (None, ShapeKind::Disk { r }) => ClusterSpec::disk(r, 0, 1, Sign::Plus)?.lambda_inf,
        (None, _) => return Err(CliError::Usage("--sigma is required for non-disk shapes".into())),
    };
    let settings = EigenSettings::new(sigma, a.k, a.tol, seed);
    let sol = folded_spectrum_eigs_multilevel(&op, &settings)?.require_converged()?;
    let fields: Vec<_> = sol.pairs.iter().map(|p| p.vector.clone()).collect();
    let (fields, volume) = orthonormalize_interior(&op, &fields)?;
    let traces = fields
        .iter()
        .map(|f| boundary_trace(&op, f, a.trace_samples))
        .collect::<dirac_bag::Result<Vec<_>>>()?;
    let gram = gram_correction_matrix(&traces, &volume)?;
    Ok(json!({
        "shape": a.shape,
        "M": a.mass,
        "L": a.half_width,
        "h": a.h,
        "sigma": sigma,
        "wilson_c": a.wilson_c,
        "eigenvalues": sol.pairs.iter().map(|p| p.lambda).collect::<Vec<_>>(),
        "residuals": sol.pairs.iter().map(|p| p.residual).collect::<Vec<_>>(),
        "gram": complex_matrix(&gram),
        "gram_eigenvalues": gram.eigenvalues(),
        "gram_asymmetry": gram.max_asymmetry,
        "iterations": sol.iterations,
        "matvecs": sol.matvecs,
        "converged": sol.converged,
    }))
}

/// Reads `M` and the eigenvalue columns of a sweep CSV; rows with an empty
/// eigenvalue cell become gaps.
fn read_sweep(path: &Path) -> Result<SweepTable, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let mass_col = header.iter().position(|h| h == "M").ok_or_else(|| bad("no M column".into()))?;
    let is_lambda = |h: &str| {
        h == "lambda_M" || h.strip_prefix("lambda_M_").is_some_and(|k| !k.is_empty() && k.chars().all(|c| c.is_ascii_digit()))
    };
    let lambda_cols: Vec<usize> = header.iter().enumerate().filter(|(_, h)| is_lambda(h)).map(|(i, _)| i).collect();
    if lambda_cols.is_empty() {
        return Err(bad("no lambda_M column".into()));
    }
    let num = |s: &str, line: usize| s.trim().parse::<f64>().map_err(|_| bad(format!("line {line}: bad number {s:?}")));
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let mass = num(rec.get(mass_col).unwrap_or(""), line)?;
        let cells: Vec<&str> = lambda_cols.iter().map(|&c| rec.get(c).unwrap_or("").trim()).collect();
        if cells.iter().any(|c| c.is_empty()) {
            rows.push(SweepRow { mass, lambdas: Vec::new(), gap: true });
            continue;
        }
        let mut lambdas = cells.iter().map(|c| num(c, line)).collect::<Result<Vec<_>, _>>()?;
        lambdas.sort_by(f64::total_cmp);
        rows.push(SweepRow { mass, lambdas, gap: false });
    }
    Ok(SweepTable::new(SweepSource::DiskAnalytic, rows)?)
}

fn cluster_for(table: &SweepTable, lambda_inf: f64, eta: Option<f64>) -> Result<ClusterSpec, CliError> {
    let l = table.complete_rows().first().map_or(1, |r| r.lambdas.len());
    Ok(ClusterSpec::new(lambda_inf, eta.unwrap_or(f64::INFINITY), l, &[])?)
}

fn fit(a: &FitArgs) -> Result<FitResult, CliError> {
    let table = read_sweep(&a.input)?;
    let cluster = cluster_for(&table, a.lambda_inf, a.eta)?;
    Ok(fit_any_order(&table, &cluster, a.order)?)
}

struct Prediction {
    lambda_inf: f64,
    /// Ascending.
    mu: Vec<f64>,
}

fn read_prediction(path: &Path) -> Result<Prediction, CliError> {
    let bad = |msg: &str| CliError::Usage(format!("{}: {msg}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(&e.to_string()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
    let lambda_inf = v["lambda_inf"].as_f64().ok_or_else(|| bad("missing numeric lambda_inf"))?;
    let mut mu = if let Some(list) = v.get("mu") {
        list.as_array()
            .and_then(|xs| xs.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| bad("mu must be a list of numbers"))?
    } else if let Some(g) = v.get("gram") {
        let entry = |x: &Value| match x {
            Value::Number(n) => n.as_f64().map(|re| dirac_bag::spinor::C64::new(re, 0.0)),
            Value::Array(p) if p.len() == 2 => Some(dirac_bag::spinor::C64::new(p[0].as_f64()?, p[1].as_f64()?)),
            _ => None,
        };
        let entries = g
            .as_array()
            .and_then(|rows| {
                rows.iter()
                    .map(|r| r.as_array().and_then(|r| r.iter().map(entry).collect::<Option<Vec<_>>>()))
                    .collect::<Option<Vec<_>>>()
            })
            .ok_or_else(|| bad("gram must be a matrix of numbers or [re, im] pairs"))?;
        CorrectionMatrix::from_entries(entries)?.eigenvalues()
    } else {
        return Err(bad("prediction needs mu or gram"));
    };
    if mu.is_empty() {
        return Err(bad("empty prediction"));
    }
    mu.sort_by(f64::total_cmp);
    Ok(Prediction { lambda_inf, mu })
}

fn report(a: &ReportArgs) -> Result<Table, CliError> {
    let table = read_sweep(&a.sweep)?;
    let pred = read_prediction(&a.prediction)?;
    let cluster = cluster_for(&table, pred.lambda_inf, a.eta)?;
    if cluster.l != pred.mu.len() {
        return Err(CliError::Usage(format!(
            "sweep has {} branches, prediction has {}",
            cluster.l,
            pred.mu.len()
        )));
    }
    let fitted = fit_any_order(&table, &cluster, 1)?;
    let mut mu_hat = fitted.mu_hat[0].clone();
    mu_hat.sort_by(f64::total_cmp);
    let mut t = Table::new(&["M", "branch", "lambda_M", "scaled_residual", "mu_hat", "mu_pred", "rel_error"]);
    for row in table.complete_rows() {
        for (k, &l) in row.lambdas.iter().enumerate() {
            let p = pred.mu[k];
            let rel = (p != 0.0).then(|| (mu_hat[k] - p).abs() / p.abs());
            t.push(vec![
                row.mass.into(),
                (k + 1).into(),
                l.into(),
                (row.mass * (l - pred.lambda_inf)).into(),
                mu_hat[k].into(),
                p.into(),
                rel.into(),
            ]);
        }
    }
    Ok(t)
}

fn verify(a: &VerifyArgs, seed: u64, format: Format) -> Result<Output, CliError> {
    if !(a.grid_tol > 0.0) || a.trace_samples == 0 {
        return Err(CliError::Usage("--grid-tol and --trace-samples must be positive".into()));
    }
    let config = VerifyConfig {
        seed,
        skip_grid: a.skip.contains(&SkipPart::Grid),
        grid_tol: a.grid_tol,
        trace_samples: a.trace_samples,
    };
    let summary = verify_all(&config);
    let bytes = match format {
        Format::Csv => summary.to_csv().into_bytes(),
        Format::Json => pretty(&serde_json::to_value(&summary.rows).expect("rows serialise")),
    };
    let failed: Vec<String> =
        summary.rows.iter().filter(|r| r.status == Status::Fail).map(|r| r.id.to_string()).collect();
    Ok(Output { bytes, failing: (!failed.is_empty()).then(|| format!("criteria {}", failed.join(", "))) })
}
