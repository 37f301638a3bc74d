use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use sprs::{CsMatView, FillInReduction, SymmetryCheck};
use sprs_ldl::{Ldl, LdlNumeric};

use super::CovMatrix;
use crate::error::{Error, Result};

/// Diagonal shifts tried in order, relative to the mean diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterPolicy {
    pub ladder: Vec<f64>,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy { ladder: vec![0.0, 1e-12, 1e-10, 1e-8] }
    }
}

impl JitterPolicy {
    pub fn none() -> Self {
        JitterPolicy { ladder: vec![0.0] }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Dense(Cholesky<f64, Dyn>),
    /// P M Pᵀ = L D Lᵀ with (P x)[k] = x[perm[k]].
    Sparse { ldl: Box<LdlNumeric<f64, usize>>, perm: Vec<usize>, sqrt_d: Vec<f64> },
}

/// Lower-triangular factor of M + jitter·I.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    jitter: f64,
    kind: Kind,
}

fn dense_attempt(n: usize, values: &[f64], shift: f64) -> Option<Cholesky<f64, Dyn>> {
    let mut m = DMatrix::from_row_slice(n, n, values);
    if shift != 0.0 {
        for i in 0..n {
            m[(i, i)] += shift;
        }
    }
    Cholesky::new(m)
}

/// Numeric LDLᵀ factor with its diagonal D.
type SparseLdl = (LdlNumeric<f64, usize>, Vec<f64>);

fn sparse_attempt(
    n: usize,
    indptr: &[usize],
    indices: &[usize],
    data: &[f64],
    shift: f64,
    perm: &sprs::PermOwnedI<usize>,
) -> std::result::Result<SparseLdl, Option<usize>> {
    let mut shifted = data.to_vec();
    if shift != 0.0 {
        for i in 0..n {
            let k = indptr[i] + indices[indptr[i]..indptr[i + 1]].binary_search(&i).expect("diagonal is stored");
            shifted[k] += shift;
        }
    }
    let view = CsMatView::new((n, n), indptr, indices, &shifted);
    let ldl = LdlNumeric::new_perm(view, perm.clone(), SymmetryCheck::DontCheckSymmetry).map_err(|_| None)?;
    let d = ldl.d();
    if let Some(k) = d.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Some(k));
    }
    let sqrt_d = d.iter().map(|v| v.sqrt()).collect();
    Ok((ldl, sqrt_d))
}

/// Cholesky factor, walking the jitter ladder until the matrix is positive definite.
pub fn cholesky(m: &CovMatrix, policy: &JitterPolicy) -> Result<CholeskyFactor> {
    if policy.ladder.is_empty() || policy.ladder.iter().any(|&j| !(j >= 0.0) || !j.is_finite()) {
        return Err(Error::Validation("jitter ladder must be a nonempty list of nonnegative values".into()));
    }
    let n = m.n();
    let mean_diag = m.diagonal().iter().sum::<f64>() / n as f64;
    let mut pivot = None;
    let mut last = 0.0;
    if let Some(values) = m.dense_values() {
        for &rel in &policy.ladder {
            last = rel * mean_diag;
            if let Some(c) = dense_attempt(n, values, last) {
                return Ok(CholeskyFactor { n, jitter: last, kind: Kind::Dense(c) });
            }
        }
    } else if let Some((indptr, indices, data)) = m.csr_parts() {
        let view = CsMatView::new((n, n), indptr, indices, data);
        let perm = Ldl::new().fill_in_reduction(FillInReduction::ReverseCuthillMcKee).perm(view);
        let order = perm.vec();
        for &rel in &policy.ladder {
            last = rel * mean_diag;
            match sparse_attempt(n, indptr, indices, data, last, &perm) {
                Ok((ldl, sqrt_d)) => {
                    return Ok(CholeskyFactor {
                        n,
                        jitter: last,
                        kind: Kind::Sparse { ldl: Box::new(ldl), perm: order, sqrt_d },
                    });
                }
                Err(k) => pivot = k.map(|k| order[k]),
            }
        }
    }
    Err(Error::Factorization { pivot, jitter: last })
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Absolute diagonal shift that was needed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.kind, Kind::Sparse { .. })
    }

    /// Stored entries of the triangular factor, diagonal included.
    pub fn factor_nnz(&self) -> usize {
        match &self.kind {
            Kind::Dense(_) => self.n * (self.n + 1) / 2,
            Kind::Sparse { ldl, .. } => ldl.nnz() + self.n,
        }
    }

    /// Fill-reducing ordering, `perm[k]` being the original index of factor row k.
    pub fn permutation(&self) -> Option<&[usize]> {
        match &self.kind {
            Kind::Dense(_) => None,
            Kind::Sparse { perm, .. } => Some(perm),
        }
    }

    /// log det(M + jitter·I).
    pub fn log_det(&self) -> f64 {
        match &self.kind {
            Kind::Dense(c) => 2.0 * c.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>(),
            Kind::Sparse { ldl, .. } => ldl.d().iter().map(|v| v.ln()).sum(),
        }
    }

    /// x = (M + jitter·I)⁻¹ b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        match &self.kind {
            Kind::Dense(c) => c.solve(&DVector::from_column_slice(b)).as_slice().to_vec(),
            Kind::Sparse { ldl, .. } => ldl.solve(b),
        }
    }

    /// bᵀ(M + jitter·I)⁻¹b.
    pub fn quad_form(&self, b: &[f64]) -> f64 {
        match &self.kind {
            Kind::Dense(c) => {
                let mut w = DVector::from_column_slice(b);
                c.l_dirty().solve_lower_triangular_mut(&mut w);
                w.norm_squared()
            }
            Kind::Sparse { .. } => b.iter().zip(self.solve(b)).map(|(a, x)| a * x).sum(),
        }
    }

    /// Maps iid standard normals w to a vector with covariance M + jitter·I.
    pub fn correlate(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n);
        match &self.kind {
            Kind::Dense(c) => (c.l() * DVector::from_column_slice(w)).as_slice().to_vec(),
            Kind::Sparse { ldl, perm, sqrt_d } => {
                let v: Vec<f64> = w.iter().zip(sqrt_d).map(|(a, s)| a * s).collect();
                let mut y = v.clone();
                // unit lower L stored by columns without its diagonal
                for (j, col) in ldl.l().outer_iterator().enumerate() {
                    for (i, &lij) in col.iter() {
                        y[i] += lij * v[j];
                    }
                }
                let mut x = vec![0.0; self.n];
                for (k, &p) in perm.iter().enumerate() {
                    x[p] = y[k];
                }
                x
            }
        }
    }

    /// Dense lower factor in original ordering; only for dense factors.
    pub fn lower_dense(&self) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Dense(c) => {
                let l = c.l();
                Some((0..self.n * self.n).map(|k| l[(k / self.n, k % self.n)]).collect())
            }
            Kind::Sparse { .. } => None,
        }
    }
}
