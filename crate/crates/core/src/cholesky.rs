//! Sparse Cholesky factorization for symmetric positive definite matrices.
//!
//! The matrix is reordered with [`fill_reducing_order`], the elimination
//! tree gives exact column counts, and the numeric factor is computed row
//! by row (up-looking). A pivot `<= 0` aborts with
//! [`Error::NonPositivePivot`], which other modules use as the SPD probe.

use crate::error::{check_dim, Error, Result};
use crate::ordering::{column_counts, elimination_tree, fill_reducing_order};
use crate::sparse::SparseReal;

/// `P A P^T = L L^T`, with `L` kept in compressed-column form and the
/// diagonal entry stored first in every column.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Factors `a` using the approximate minimum degree ordering.
pub fn factor(a: &SparseReal) -> Result<CholeskyFactor> {
    check_dim("factor", a.n_rows(), a.n_cols())?;
    let perm = fill_reducing_order(a);
    factor_with_order(a, perm)
}

/// Factors `a` with a caller-supplied elimination order.
pub fn factor_with_order(a: &SparseReal, perm: Vec<usize>) -> Result<CholeskyFactor> {
    check_dim("factor", a.n_rows(), a.n_cols())?;
    let n = a.n_rows();
    let c = a.permute_symmetric(&perm)?;
    let parent = elimination_tree(&c);
    let counts = column_counts(&c, &parent);

    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0);
    for &cnt in &counts {
        col_ptr.push(col_ptr.last().unwrap() + cnt);
    }
    let nnz = col_ptr[n];
    let mut row_idx = vec![0usize; nnz];
    let mut values = vec![0.0f64; nnz];
    let mut next = col_ptr[..n].to_vec();

    let mut x = vec![0.0f64; n];
    let mut mark = vec![usize::MAX; n];
    let mut pattern: Vec<usize> = Vec::new();

    for k in 0..n {
        // nonzero pattern of row k of L: the row subtree of the etree
        pattern.clear();
        mark[k] = k;
        let (cols, vals) = c.row(k);
        for (&j, &v) in cols.iter().zip(vals) {
            if j > k {
                break;
            }
            x[j] = v;
            let mut i = j;
            while mark[i] != k {
                pattern.push(i);
                mark[i] = k;
                i = parent[i];
            }
        }
        // ascending column order is topological for the etree
        pattern.sort_unstable();

        let mut d = x[k];
        x[k] = 0.0;
        for &j in &pattern {
            let lkj = x[j] / values[col_ptr[j]];
            x[j] = 0.0;
            for p in col_ptr[j] + 1..next[j] {
                x[row_idx[p]] -= values[p] * lkj;
            }
            d -= lkj * lkj;
            row_idx[next[j]] = k;
            values[next[j]] = lkj;
            next[j] += 1;
        }
        if !(d > 0.0) {
            return Err(Error::NonPositivePivot(perm[k]));
        }
        row_idx[next[k]] = k;
        values[next[k]] = d.sqrt();
        next[k] += 1;
    }

    Ok(CholeskyFactor {
        n,
        perm,
        col_ptr,
        row_idx,
        values,
    })
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `L` as a lower-triangular CSR matrix.
    pub fn lower(&self) -> SparseReal {
        let mut t = Vec::with_capacity(self.nnz());
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                t.push((self.row_idx[p], j, self.values[p]));
            }
        }
        SparseReal::from_triplets(self.n, self.n, &t).expect("indices in range")
    }

    /// Solves `A y = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_dim("cholesky solve", self.n, rhs.len())?;
        let mut out = vec![0.0; self.n];
        let mut work = vec![0.0; self.n];
        self.solve_into(rhs, &mut out, &mut work);
        Ok(out)
    }

    /// Solves `A out = rhs` using `work` (length `n`) as scratch.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64], work: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.n);
        let y = work;
        for (k, &p) in self.perm.iter().enumerate() {
            y[k] = rhs[p];
        }
        // L y = P rhs
        for j in 0..self.n {
            let lo = self.col_ptr[j];
            let yj = y[j] / self.values[lo];
            y[j] = yj;
            for p in lo + 1..self.col_ptr[j + 1] {
                y[self.row_idx[p]] -= self.values[p] * yj;
            }
        }
        // L^T z = y
        for j in (0..self.n).rev() {
            let lo = self.col_ptr[j];
            let mut s = y[j];
            for p in lo + 1..self.col_ptr[j + 1] {
                s -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = s / self.values[lo];
        }
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = y[k];
        }
    }
}
