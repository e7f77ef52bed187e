//! Compressed-row sparse real matrices.
//!
//! Symmetric matrices are stored with both triangles present so that the
//! matrix-vector product never has to branch on the stored half.

use crate::dense::DenseReal;
use crate::error::{check_dim, Error, Result};

/// Compressed sparse row matrix with `f64` entries.
///
/// Column indices inside each row are strictly increasing and no explicit
/// duplicates are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseReal {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseReal {
    /// Builds a matrix from raw CSR arrays, validating the structure.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::InvalidStructure(
                "row_ptr endpoints disagree with col_idx/values lengths".into(),
            ));
        }
        for i in 0..n_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidStructure(format!(
                    "row_ptr decreases at row {i}"
                )));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!(
                    "column indices of row {i} are not strictly increasing"
                )));
            }
            if let Some(&last) = cols.last() {
                if last >= n_cols {
                    return Err(Error::InvalidStructure(format!(
                        "column index {last} out of range in row {i}"
                    )));
                }
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles a matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed; explicit zeros are kept.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidStructure(format!(
                    "entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[i]] = (j, v);
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for i in 0..n_rows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(j, _)| j);
            for &(j, v) in row.iter() {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        Self::from_diagonal(&vec![c; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    /// `m x m` tridiagonal Toeplitz matrix with constant sub-, main and
    /// super-diagonal.
    pub fn tridiag(m: usize, sub: f64, main: f64, sup: f64) -> Self {
        let mut t = Vec::with_capacity(3 * m);
        for i in 0..m {
            if i > 0 {
                t.push((i, i - 1, sub));
            }
            t.push((i, i, main));
            if i + 1 < m {
                t.push((i, i + 1, sup));
            }
        }
        Self::from_triplets(m, m, &t).expect("indices in range")
    }

    pub fn from_dense(a: &DenseReal) -> Self {
        let mut t = Vec::new();
        for i in 0..a.n_rows() {
            for j in 0..a.n_cols() {
                let v = a.get(i, j);
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.n_rows(), a.n_cols(), &t).expect("indices in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Stored value at `(i, j)`, zero when the entry is structurally absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// `A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("spmv", self.n_cols, x.len())?;
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without allocation. Lengths must already match.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for p in lo..hi {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    /// `y += c A x`.
    pub fn spmv_acc(&self, c: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for p in lo..hi {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi += c * s;
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `a * self + b * other` on the union of both patterns.
    pub fn lin_comb(&self, a: f64, other: &SparseReal, b: f64) -> Result<Self> {
        check_dim("lin_comb rows", self.n_rows, other.n_rows)?;
        check_dim("lin_comb cols", self.n_cols, other.n_cols)?;
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                if ja == jb {
                    col_idx.push(ja);
                    values.push(a * va[p] + b * vb[q]);
                    p += 1;
                    q += 1;
                } else if ja < jb {
                    col_idx.push(ja);
                    values.push(a * va[p]);
                    p += 1;
                } else {
                    col_idx.push(jb);
                    values.push(b * vb[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n_cols, self.n_rows, &t).expect("indices in range")
    }

    /// True when every stored `(i, j)` has a matching `(j, i)` with
    /// `|a_ij - a_ji| <= tol * max(|a_ij|, |a_ji|)`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        self.triplets().all(|(i, j, v)| {
            let w = self.get(j, i);
            (v - w).abs() <= tol * v.abs().max(w.abs())
        })
    }

    pub fn to_dense(&self) -> DenseReal {
        let mut d = DenseReal::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            d.set(i, j, v);
        }
        d
    }

    /// Symmetric permutation `P A P^T` where row/column `k` of the result is
    /// row/column `perm[k]` of `self`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<Self> {
        check_dim("permute_symmetric", self.n_rows, perm.len())?;
        let n = perm.len();
        let mut inv = vec![usize::MAX; n];
        for (k, &p) in perm.iter().enumerate() {
            if p >= n || inv[p] != usize::MAX {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            inv[p] = k;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for &old in perm {
            let (cols, vals) = self.row(old);
            buf.clear();
            buf.extend(cols.iter().zip(vals).map(|(&j, &v)| (inv[j], v)));
            buf.sort_unstable_by_key(|&(j, _)| j);
            for &(j, v) in &buf {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows: n,
            n_cols: n,
            row_ptr,
            col_idx,
            values,
        })
    }
}

/// Kronecker sum `I_m ⊗ V + V ⊗ I_m` of an `m x m` matrix with itself.
///
/// Unknowns are ordered lexicographically with the first grid index
/// fastest: unknown `(j, k)` lives at `k * m + j`, and the `I ⊗ V` term acts
/// on the fast index `j`.
pub fn kron_sum(v: &SparseReal, m: usize) -> Result<SparseReal> {
    check_dim("kron_sum rows", m, v.n_rows())?;
    check_dim("kron_sum cols", m, v.n_cols())?;
    let mut t = Vec::with_capacity(2 * m * v.nnz());
    for (a, b, val) in v.triplets() {
        for k in 0..m {
            // I ⊗ V: block-diagonal copies of V
            t.push((k * m + a, k * m + b, val));
            // V ⊗ I: V entries scaled into identity blocks
            t.push((a * m + k, b * m + k, val));
        }
    }
    SparseReal::from_triplets(m * m, m * m, &t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spmv_stencil_row_sums() {
        let a = SparseReal::tridiag(3, -1.0, 2.0, -1.0);
        assert_eq!(a.spmv(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn spmv_identity() {
        let a = SparseReal::identity(4);
        assert_eq!(
            a.spmv(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
    }

    #[test]
    fn spmv_scaled_v2() {
        // h = 1/3, h^-2 = 9
        let v = SparseReal::tridiag(2, -1.0, 2.0, -1.0).scale(9.0);
        assert_eq!(v.spmv(&[1.0, 0.0]).unwrap(), vec![18.0, -9.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = SparseReal::identity(3);
        assert!(matches!(
            a.spmv(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn new_rejects_unsorted_columns() {
        let r = SparseReal::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(matches!(r, Err(Error::InvalidStructure(_))));
        let r = SparseReal::new(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseReal::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn kron_sum_scalar() {
        let v = SparseReal::from_diagonal(&[2.0]);
        let k = kron_sum(&v, 1).unwrap();
        assert_eq!(k.to_dense().values(), &[4.0]);
    }

    #[test]
    fn kron_sum_m2_five_point() {
        let v = SparseReal::tridiag(2, -1.0, 2.0, -1.0);
        let k = kron_sum(&v, 2).unwrap();
        // explicit 5-point Laplacian on a 2x2 interior grid
        #[rustfmt::skip]
        let expected = [
            4.0, -1.0, -1.0,  0.0,
           -1.0,  4.0,  0.0, -1.0,
           -1.0,  0.0,  4.0, -1.0,
            0.0, -1.0, -1.0,  4.0,
        ];
        assert_eq!(k.to_dense().values(), &expected);
    }

    #[test]
    fn kron_sum_m3_corner_row_sums() {
        let v = SparseReal::tridiag(3, -1.0, 2.0, -1.0);
        let k = kron_sum(&v, 3).unwrap();
        let d = k.to_dense();
        // dense oracle: 4 on the diagonal, -1 for each grid neighbour
        for idx in 0..9 {
            let (j, kk): (usize, usize) = (idx % 3, idx / 3);
            for other in 0..9 {
                let (j2, k2) = (other % 3, other / 3);
                let dist = j.abs_diff(j2) + kk.abs_diff(k2);
                let want = match dist {
                    0 => 4.0,
                    1 => -1.0,
                    _ => 0.0,
                };
                assert_eq!(d.get(idx, other), want);
            }
        }
        let sums = k.spmv(&[1.0; 9]).unwrap();
        for corner in [0, 2, 6, 8] {
            assert_eq!(sums[corner], 2.0);
        }
        assert_eq!(sums[4], 0.0);
    }

    #[test]
    fn kron_sum_nnz_and_symmetry() {
        let v = SparseReal::tridiag(5, -1.0, 2.0, -1.0);
        let k = kron_sum(&v, 5).unwrap();
        // diagonal entries of both terms merge: 2 m nnz(V) - m^2
        assert_eq!(k.nnz(), 2 * 5 * v.nnz() - 25);
        assert_eq!(k, k.transpose());
    }

    #[test]
    fn permute_symmetric_matches_dense() {
        let a = kron_sum(&SparseReal::tridiag(3, -1.0, 2.0, -0.5), 3).unwrap();
        let perm = [4, 0, 8, 1, 7, 2, 6, 3, 5];
        let p = a.permute_symmetric(&perm).unwrap();
        for r in 0..9 {
            for c in 0..9 {
                assert_eq!(p.get(r, c), a.get(perm[r], perm[c]));
            }
        }
    }

    fn random_symmetric(n: usize, entries: &[(usize, usize, f64)]) -> SparseReal {
        let mut t = Vec::new();
        for &(i, j, v) in entries {
            let (i, j) = (i % n, j % n);
            t.push((i, j, v));
            if i != j {
                t.push((j, i, v));
            }
        }
        SparseReal::from_triplets(n, n, &t).unwrap()
    }

    proptest! {
        #[test]
        fn symmetric_spmv_is_self_adjoint(
            n in 1usize..30,
            entries in prop::collection::vec((0usize..30, 0usize..30, -5.0f64..5.0), 1..80),
            xs in prop::collection::vec(-1.0f64..1.0, 30),
            ys in prop::collection::vec(-1.0f64..1.0, 30),
        ) {
            let a = random_symmetric(n, &entries);
            prop_assert!(a.is_symmetric(0.0));
            let (x, y) = (&xs[..n], &ys[..n]);
            let ax = a.spmv(x).unwrap();
            let ay = a.spmv(y).unwrap();
            let lhs: f64 = ax.iter().zip(y).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(&ay).map(|(a, b)| a * b).sum();
            let scale: f64 = 1.0 + ax.iter().map(|v| v.abs()).sum::<f64>() + ay.iter().map(|v| v.abs()).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn lin_comb_matches_dense(
            n in 1usize..12,
            e1 in prop::collection::vec((0usize..12, 0usize..12, -5.0f64..5.0), 1..30),
            e2 in prop::collection::vec((0usize..12, 0usize..12, -5.0f64..5.0), 1..30),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let x = random_symmetric(n, &e1);
            let y = random_symmetric(n, &e2);
            let z = x.lin_comb(a, &y, b).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let want = a * x.get(i, j) + b * y.get(i, j);
                    prop_assert!((z.get(i, j) - want).abs() <= 1e-12 * (1.0 + want.abs()));
                }
            }
        }
    }
}
