//! Sparse matrix stored in both compressed-row and compressed-column layout.

use crate::linalg::Exec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Products over fewer stored entries than this always run sequentially.
#[cfg(feature = "parallel")]
const PAR_MIN_NNZ: usize = 16_384;

#[derive(Clone, Debug, PartialEq)]
struct Compressed {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Compressed {
    fn slice(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.ptr[i]..self.ptr[i + 1];
        (&self.idx[r.clone()], &self.val[r])
    }

    /// `out[i] = Σ val * v[idx]` over slice `i`.
    fn product(&self, exec: Exec, v: &[f64], out: &mut [f64]) {
        let row = |i: usize| -> f64 {
            let (idx, val) = self.slice(i);
            idx.iter().zip(val).map(|(&j, &a)| a * v[j]).sum()
        };
        #[cfg(feature = "parallel")]
        if exec == Exec::Parallel && self.val.len() >= PAR_MIN_NNZ {
            out.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, o)| *o = row(i));
            return;
        }
        let _ = exec;
        for (i, o) in out.iter_mut().enumerate() {
            *o = row(i);
        }
    }
}

/// Real sparse matrix; immutable after construction.
///
/// Indices within each row and column slice are strictly increasing and no
/// explicit zeros are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    csr: Compressed,
    csc: Compressed,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SparseError {
    #[error("entry ({row}, {col}) out of bounds for {n_rows}x{n_cols} matrix")]
    OutOfBounds { row: usize, col: usize, n_rows: usize, n_cols: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

impl SparseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            csr: Compressed { ptr: vec![0; n_rows + 1], idx: vec![], val: vec![] },
            csc: Compressed { ptr: vec![0; n_cols + 1], idx: vec![], val: vec![] },
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// zeros (explicit or from cancellation) are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SparseError> {
        let mut t: Vec<(usize, usize, f64)> = Vec::new();
        for (row, col, v) in triplets {
            if row >= n_rows || col >= n_cols {
                return Err(SparseError::OutOfBounds { row, col, n_rows, n_cols });
            }
            if !v.is_finite() {
                return Err(SparseError::NonFinite { row, col });
            }
            t.push((row, col, v));
        }
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Ok(Self::from_sorted_unique(n_rows, n_cols, &merged))
    }

    /// `entries` must be sorted by (row, col), unique, and nonzero.
    fn from_sorted_unique(n_rows: usize, n_cols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let nnz = entries.len();
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_cnt = vec![0usize; n_cols + 1];
        for &(r, c, _) in entries {
            row_ptr[r + 1] += 1;
            col_cnt[c + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..n_cols {
            col_cnt[j + 1] += col_cnt[j];
        }
        let col_ptr = col_cnt.clone();
        let mut next = col_cnt;
        let mut row_idx = vec![0usize; nnz];
        let mut csc_val = vec![0f64; nnz];
        // row-major traversal keeps each column slice sorted by row
        for &(r, c, v) in entries {
            let p = next[c];
            row_idx[p] = r;
            csc_val[p] = v;
            next[c] += 1;
        }
        SparseMatrix {
            n_rows,
            n_cols,
            csr: Compressed {
                ptr: row_ptr,
                idx: entries.iter().map(|e| e.1).collect(),
                val: entries.iter().map(|e| e.2).collect(),
            },
            csc: Compressed { ptr: col_ptr, idx: row_idx, val: csc_val },
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let t = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)));
        Self::from_triplets(rows.len(), n_cols, t).expect("dense input must be finite and rectangular")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.csr.val.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        self.csr.slice(i)
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        self.csc.slice(j)
    }

    /// All entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (idx, val) = self.row(i);
            idx.iter().zip(val).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    /// `out = self · x`
    pub fn mul_vec_into(&self, exec: Exec, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(out.len(), self.n_rows);
        self.csr.product(exec, x, out);
    }

    /// `out = selfᵀ · y`
    pub fn mul_transpose_vec_into(&self, exec: Exec, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.n_rows);
        assert_eq!(out.len(), self.n_cols);
        self.csc.product(exec, y, out);
    }

    pub fn mul_vec(&self, exec: Exec, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        self.mul_vec_into(exec, x, &mut out);
        out
    }

    pub fn mul_transpose_vec(&self, exec: Exec, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        self.mul_transpose_vec_into(exec, y, &mut out);
        out
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n_cols, other.n_cols, "vstack needs equal column counts");
        let off = self.n_rows;
        let entries: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i + off, j, v)))
            .collect();
        Self::from_sorted_unique(self.n_rows + other.n_rows, self.n_cols, &entries)
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> SparseMatrix {
        assert!(start <= end && end <= self.n_rows);
        let entries: Vec<_> = self
            .triplets()
            .filter(|&(i, _, _)| i >= start && i < end)
            .map(|(i, j, v)| (i - start, j, v))
            .collect();
        Self::from_sorted_unique(end - start, self.n_cols, &entries)
    }

    /// `diag(row) · self · diag(col)`; the sparsity pattern is unchanged.
    pub fn scaled(&self, row: &[f64], col: &[f64]) -> SparseMatrix {
        assert_eq!(row.len(), self.n_rows);
        assert_eq!(col.len(), self.n_cols);
        let mut out = self.clone();
        for (i, r) in row.iter().enumerate() {
            for p in out.csr.ptr[i]..out.csr.ptr[i + 1] {
                out.csr.val[p] *= r * col[out.csr.idx[p]];
            }
        }
        for (j, c) in col.iter().enumerate() {
            for p in out.csc.ptr[j]..out.csc.ptr[j + 1] {
                out.csc.val[p] *= row[out.csc.idx[p]] * c;
            }
        }
        out
    }

    /// Largest absolute entry of each row.
    pub fn row_inf_norms(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Largest absolute entry of each column.
    pub fn col_inf_norms(&self) -> Vec<f64> {
        (0..self.n_cols)
            .map(|j| self.col(j).1.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }
}
