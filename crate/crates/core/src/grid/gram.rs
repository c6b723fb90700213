use nalgebra::DMatrix;
use serde::Serialize;

use super::operator::GridOperator;
use super::trace::BoundaryTrace;
use crate::error::{Error, Result};
use crate::spinor::C64;

const ORTHONORMAL_TOL: f64 = 1e-6;
const PSD_TOL: f64 = 1e-10;

/// `m[k][j] = ½ ∮ (f_j, f_k) ds`, the inner product conjugate-linear in the
/// first slot.
#[derive(Debug, Clone, Serialize)]
pub struct CorrectionMatrix {
    pub dim: usize,
    pub entries: Vec<Vec<C64>>,
    /// Largest `|m[k][j] − conj(m[j][k])|` before symmetrisation.
    pub max_asymmetry: f64,
}

impl CorrectionMatrix {
    pub fn from_entries(entries: Vec<Vec<C64>>) -> Result<CorrectionMatrix> {
        let dim = entries.len();
        if let Some(row) = entries.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        let mut max_asymmetry: f64 = 0.0;
        let mut sym = entries.clone();
        for k in 0..dim {
            for j in 0..dim {
                max_asymmetry = max_asymmetry.max((entries[k][j] - entries[j][k].conj()).norm());
                sym[k][j] = (entries[k][j] + entries[j][k].conj()) * 0.5;
            }
        }
        Ok(CorrectionMatrix { dim, entries: sym, max_asymmetry })
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim, self.dim, |k, j| self.entries[k][j]);
        let mut vals: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn scaled(&self, c: f64) -> CorrectionMatrix {
        CorrectionMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|r| r.iter().map(|x| x * c).collect()).collect(),
            max_asymmetry: self.max_asymmetry * c.abs(),
        }
    }
}

/// Boundary Gram matrix of an orthonormal cluster.
///
/// `volume_gram` is the interior Gram matrix of the fields the traces came
/// from; it must be the identity within `1e-6`.
pub fn gram_correction_matrix(traces: &[BoundaryTrace], volume_gram: &[Vec<C64>]) -> Result<CorrectionMatrix> {
    let l = traces.len();
    if l == 0 {
        return Err(Error::InvalidArgument("no traces".into()));
    }
    if volume_gram.len() != l || volume_gram.iter().any(|r| r.len() != l) {
        return Err(Error::DimensionMismatch { expected: l, got: volume_gram.len() });
    }
    for (k, row) in volume_gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            let want = if k == j { 1.0 } else { 0.0 };
            if (g - want).norm() > ORTHONORMAL_TOL {
                return Err(Error::Precondition(format!(
                    "cluster is not orthonormal: volume Gram entry ({k},{j}) = {g}"
                )));
            }
        }
    }
    let n = traces[0].len();
    if traces.iter().any(|t| t.len() != n) {
        return Err(Error::InvalidArgument("traces have different sample counts".into()));
    }
    let mut entries = vec![vec![C64::new(0.0, 0.0); l]; l];
    for k in 0..l {
        for j in 0..l {
            let fk = &traces[k];
            let fj = &traces[j];
            let s: C64 = (0..n)
                .map(|i| {
                    let a = fj.samples[i];
                    let b = fk.samples[i];
                    (a[0].conj() * b[0] + a[1].conj() * b[1]) * fk.weights[i]
                })
                .sum();
            entries[k][j] = s * 0.5;
        }
    }
    let m = CorrectionMatrix::from_entries(entries)?;
    let lowest = m.eigenvalues()[0];
    if lowest < -PSD_TOL * m.eigenvalues().last().copied().unwrap_or(1.0).max(1.0) {
        return Err(Error::IllConditioned(format!("correction matrix has negative eigenvalue {lowest}")));
    }
    Ok(m)
}

/// Gram-Schmidt on the grid inner product restricted to `Ω`.
///
/// Returns the orthonormalised fields and their interior Gram matrix.
pub fn orthonormalize_interior(op: &GridOperator, fields: &[Vec<C64>]) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(fields.len());
    for f in fields {
        let mut v = f.clone();
        for _ in 0..2 {
            for q in &out {
                let c = op.inner(q, &v, true);
                v.iter_mut().zip(q).for_each(|(v, q)| *v -= q * c);
            }
        }
        let norm = op.inner(&v, &v, true).re.sqrt();
        if !(norm > 1e-12) {
            return Err(Error::IllConditioned("cluster vectors are linearly dependent inside the domain".into()));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
    }
    let gram = out
        .iter()
        .map(|a| out.iter().map(|b| op.inner(a, b, true)).collect())
        .collect();
    Ok((out, gram))
}
