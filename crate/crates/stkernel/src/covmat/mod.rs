//! Designs, covariance-matrix assembly, sparsity statistics and Cholesky factors.

mod cholesky;
mod design;

pub use cholesky::{cholesky, CholeskyFactor, JitterPolicy};
pub use design::{grid_design, BoundingBox, SpaceTimeDesign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{dgw_tap_in_support, DGWParams, SpaceTimeModel};
use crate::par::{self, Parallelism};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Dense,
    Csr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutChoice {
    /// Dense for DM, CSR for the compactly supported families.
    #[default]
    Auto,
    Dense,
    Csr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssembleOptions {
    pub layout: LayoutChoice,
    /// Upper bound on stored entries.
    pub max_entries: usize,
    /// Evaluate each distinct (r, t) lag once.
    pub lag_cache: bool,
    pub policy: Parallelism,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions { layout: LayoutChoice::Auto, max_entries: 1 << 27, lag_cache: true, policy: Parallelism::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Csr { indptr: Vec<usize>, indices: Vec<usize>, data: Vec<f64> },
}

/// Symmetric covariance matrix, dense row-major or CSR with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    n: usize,
    storage: Storage,
    slices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub n: usize,
    pub nnz: usize,
    pub fill_ratio: f64,
    pub zero_blocks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillPoint {
    pub xi: f64,
    pub nnz: usize,
    pub fill_ratio: f64,
}

/// Layout metadata written next to an exported matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMetadata {
    pub layout: Layout,
    pub n: usize,
    pub nnz: usize,
    pub fill_ratio: f64,
    pub zero_blocks: usize,
    pub time_slices: Vec<usize>,
    pub symmetric: bool,
    pub index_base: usize,
}

impl CovMatrix {
    /// Dense matrix from row-major values; must be exactly symmetric.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Validation(format!("expected {} values for order {n}, got {}", n * n, values.len())));
        }
        for i in 0..n {
            for j in 0..i {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::Validation(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(CovMatrix { n, storage: Storage::Dense(values), slices: vec![0, n] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> Layout {
        match self.storage {
            Storage::Dense(_) => Layout::Dense,
            Storage::Csr { .. } => Layout::Csr,
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.len(),
            Storage::Csr { data, .. } => data.len(),
        }
    }

    pub fn fill_ratio(&self) -> f64 {
        self.nnz() as f64 / (self.n as f64 * self.n as f64)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v[i * self.n + j],
            Storage::Csr { indptr, indices, data } => {
                let row = &indices[indptr[i]..indptr[i + 1]];
                match row.binary_search(&j) {
                    Ok(k) => data[indptr[i] + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// True when (i, j) is a stored entry.
    pub fn is_stored(&self, i: usize, j: usize) -> bool {
        match &self.storage {
            Storage::Dense(_) => true,
            Storage::Csr { indptr, indices, .. } => indices[indptr[i]..indptr[i + 1]].binary_search(&j).is_ok(),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Csr { .. } => {
                let mut out = vec![0.0; self.n * self.n];
                for (i, j, v) in self.triplets() {
                    out[i * self.n + j] = v;
                }
                out
            }
        }
    }

    /// Stored entries (i, j, value) in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            Storage::Dense(v) => {
                (0..self.n * self.n).map(|k| (k / self.n, k % self.n, v[k])).collect()
            }
            Storage::Csr { indptr, indices, data } => (0..self.n)
                .flat_map(|i| (indptr[i]..indptr[i + 1]).map(move |k| (i, indices[k], data[k])))
                .collect(),
        }
    }

    /// y = M x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        match &self.storage {
            Storage::Dense(v) => {
                (0..self.n).map(|i| v[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
            }
            Storage::Csr { indptr, indices, data } => (0..self.n)
                .map(|i| (indptr[i]..indptr[i + 1]).map(|k| data[k] * x[indices[k]]).sum())
                .collect(),
        }
    }

    pub(crate) fn csr_parts(&self) -> Option<(&[usize], &[usize], &[f64])> {
        match &self.storage {
            Storage::Csr { indptr, indices, data } => Some((indptr, indices, data)),
            Storage::Dense(_) => None,
        }
    }

    pub(crate) fn dense_values(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Dense(v) => Some(v),
            Storage::Csr { .. } => None,
        }
    }

    /// Number of ordered time-slice pairs whose block is entirely zero.
    fn zero_blocks(&self) -> usize {
        let m = self.slices.len() - 1;
        let slice_of = |i: usize| self.slices.partition_point(|&s| s <= i) - 1;
        let mut nonzero = vec![false; m * m];
        for (i, j, v) in self.triplets() {
            if v != 0.0 {
                nonzero[slice_of(i) * m + slice_of(j)] = true;
            }
        }
        nonzero.iter().filter(|&&b| !b).count()
    }

    pub fn sparsity_report(&self) -> SparsityReport {
        SparsityReport { n: self.n, nnz: self.nnz(), fill_ratio: self.fill_ratio(), zero_blocks: self.zero_blocks() }
    }

    pub fn metadata(&self) -> MatrixMetadata {
        let r = self.sparsity_report();
        MatrixMetadata {
            layout: self.layout(),
            n: r.n,
            nnz: r.nnz,
            fill_ratio: r.fill_ratio,
            zero_blocks: r.zero_blocks,
            time_slices: self.slices.clone(),
            symmetric: true,
            index_base: 0,
        }
    }
}

pub fn sparsity_report(m: &CovMatrix) -> SparsityReport {
    m.sparsity_report()
}

/// Lower-triangle support pattern: for each row, the (j, r, t) with j ≤ i inside support.
fn support_rows(design: &SpaceTimeDesign, inside: impl Fn(f64, f64) -> bool + Sync, policy: Parallelism) -> Vec<Vec<(usize, f64, f64)>> {
    par::map_indexed(policy, design.len(), |i| {
        (0..=i)
            .filter_map(|j| {
                let (r, t) = design.lag(i, j);
                (i == j || inside(r, t)).then_some((j, r, t))
            })
            .collect()
    })
}

fn lag_key(r: f64, t: f64) -> (u64, u64) {
    (r.to_bits(), t.to_bits())
}

/// Covariance matrix of `model` on `design`.
pub fn assemble(design: &SpaceTimeDesign, model: &SpaceTimeModel, opts: &AssembleOptions) -> Result<CovMatrix> {
    if design.dim() != model.dim() as usize {
        return Err(Error::Validation(format!(
            "design dimension {} does not match model dimension {}",
            design.dim(),
            model.dim()
        )));
    }
    let n = design.len();
    let layout = match opts.layout {
        LayoutChoice::Dense => Layout::Dense,
        LayoutChoice::Csr => Layout::Csr,
        LayoutChoice::Auto if model.has_compact_support() => Layout::Csr,
        LayoutChoice::Auto => Layout::Dense,
    };
    if layout == Layout::Dense && n.saturating_mul(n) > opts.max_entries {
        return Err(Error::Size { n, budget: opts.max_entries });
    }
    let rows = support_rows(design, |r, t| model.in_support(r, t), opts.policy);
    let stored_lower: usize = rows.iter().map(|r| r.len()).sum();
    if layout == Layout::Csr && (2 * stored_lower - n) > opts.max_entries {
        return Err(Error::Size { n, budget: opts.max_entries });
    }
    let values: Vec<Vec<f64>> = if opts.lag_cache {
        let mut keys: Vec<(u64, u64)> = rows.iter().flatten().map(|&(_, r, t)| lag_key(r, t)).collect();
        keys.sort_unstable();
        keys.dedup();
        let uniq = par::try_map_indexed(opts.policy, keys.len(), |k| {
            model.cov(f64::from_bits(keys[k].0), f64::from_bits(keys[k].1))
        })?;
        rows.iter()
            .map(|row| {
                row.iter().map(|&(_, r, t)| uniq[keys.binary_search(&lag_key(r, t)).unwrap()]).collect()
            })
            .collect()
    } else {
        par::try_map_indexed(opts.policy, n, |i| rows[i].iter().map(|&(_, r, t)| model.cov(r, t)).collect())?
    };
    for (i, row) in values.iter().enumerate() {
        let d = *row.last().unwrap();
        if !(d > 0.0) {
            return Err(Error::numerical("assemble", format!("nonpositive diagonal {d} at row {i}")));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::numerical("assemble", format!("non-finite entry {v} in row {i}")));
        }
    }
    let slices = design.slice_offsets().to_vec();
    let storage = match layout {
        Layout::Dense => {
            let mut m = vec![0.0; n * n];
            for (i, row) in rows.iter().enumerate() {
                for (k, &(j, _, _)) in row.iter().enumerate() {
                    m[i * n + j] = values[i][k];
                    m[j * n + i] = values[i][k];
                }
            }
            Storage::Dense(m)
        }
        Layout::Csr => {
            // row i holds lower entries from row i and the mirrored upper entries
            let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            for (i, row) in rows.iter().enumerate() {
                for (k, &(j, _, _)) in row.iter().enumerate() {
                    if j < i {
                        upper[j].push((i, values[i][k]));
                    }
                }
            }
            let mut indptr = Vec::with_capacity(n + 1);
            let mut indices = Vec::with_capacity(2 * stored_lower - n);
            let mut data = Vec::with_capacity(2 * stored_lower - n);
            indptr.push(0);
            for i in 0..n {
                for (k, &(j, _, _)) in rows[i].iter().enumerate() {
                    indices.push(j);
                    data.push(values[i][k]);
                }
                for &(j, v) in &upper[i] {
                    indices.push(j);
                    data.push(v);
                }
                indptr.push(indices.len());
            }
            Storage::Csr { indptr, indices, data }
        }
    };
    Ok(CovMatrix { n, storage, slices })
}

/// Stored-entry counts of the DGW_Tap matrix as ξ varies, from the support test alone.
pub fn tap_fill_vs_xi(design: &SpaceTimeDesign, p: &DGWParams, xis: &[f64], policy: Parallelism) -> Vec<FillPoint> {
    let n = design.len();
    xis.iter()
        .map(|&xi| {
            let q = DGWParams { xi, ..*p };
            let lower: usize = par::map_indexed(policy, n, |i| {
                (0..i)
                    .filter(|&j| {
                        let (r, t) = design.lag(i, j);
                        dgw_tap_in_support(r, t, &q)
                    })
                    .count()
            })
            .iter()
            .sum();
            let nnz = n + 2 * lower;
            FillPoint { xi, nnz, fill_ratio: nnz as f64 / (n as f64 * n as f64) }
        })
        .collect()
}
