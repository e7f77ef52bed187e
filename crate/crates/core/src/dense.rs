//! Small dense reference arithmetic.
//!
//! These routines are deliberately plain (row-major storage, Gaussian
//! elimination with partial pivoting) and share no code with the sparse
//! solvers, so tests can use them as independent oracles.

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

/// Row-major dense real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseReal {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseReal {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_row_major(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        check_dim("DenseReal::from_row_major", n_rows * n_cols, values.len())?;
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Self::zeros(n, n);
        for i in 0..n {
            d.set(i, i, 1.0);
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.n_cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseReal) -> Result<Self> {
        check_dim("DenseReal::matmul", self.n_cols, other.n_rows)?;
        let mut c = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.n_cols {
                    c.values[i * other.n_cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(c)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim("DenseReal::solve", self.n_rows, self.n_cols)?;
        check_dim("DenseReal::solve rhs", self.n_rows, b.len())?;
        let n = self.n_rows;
        let mut a = self.values.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&p, &q| a[p * n + k].abs().total_cmp(&a[q * n + k].abs()))
                .unwrap();
            if a[piv * n + k] == 0.0 {
                return Err(Error::InvalidParameter("singular dense matrix".into()));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                x.swap(k, piv);
            }
            for i in k + 1..n {
                let f = a[i * n + k] / a[k * n + k];
                if f != 0.0 {
                    for j in k..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                    x[i] -= f * x[k];
                }
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
            x[k] = (x[k] - s) / a[k * n + k];
        }
        Ok(x)
    }

    /// Dense lower Cholesky factor; errors when `A` is not SPD.
    pub fn cholesky(&self) -> Result<DenseReal> {
        check_dim("DenseReal::cholesky", self.n_rows, self.n_cols)?;
        let n = self.n_rows;
        let mut l = DenseReal::zeros(n, n);
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if d <= 0.0 {
                return Err(Error::NonPositivePivot(j));
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(l)
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseComplex {
    n: usize,
    m: usize,
    values: Vec<Complex64>,
}

impl DenseComplex {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            values: vec![Complex64::new(0.0, 0.0); n * m],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Self::zeros(n, n);
        for i in 0..n {
            d.set(i, i, Complex64::new(1.0, 0.0));
        }
        d
    }

    /// `re + i im`.
    pub fn from_parts(re: &DenseReal, im: &DenseReal) -> Self {
        assert_eq!((re.n_rows(), re.n_cols()), (im.n_rows(), im.n_cols()));
        let values = re
            .values()
            .iter()
            .zip(im.values())
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        Self {
            n: re.n_rows(),
            m: re.n_cols(),
            values,
        }
    }

    pub fn from_real(re: &DenseReal) -> Self {
        Self::from_parts(re, &DenseReal::zeros(re.n_rows(), re.n_cols()))
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.values[i * self.m + j] = v;
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.n, self.m), (other.n, other.m));
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.n);
        let mut c = Self::zeros(self.n, other.m);
        for i in 0..self.n {
            for k in 0..self.m {
                let a = self.get(i, k);
                for j in 0..other.m {
                    c.values[i * other.m + j] += a * other.get(k, j);
                }
            }
        }
        c
    }

    pub fn adjoint(&self) -> Self {
        let mut t = Self::zeros(self.m, self.n);
        for i in 0..self.n {
            for j in 0..self.m {
                t.set(j, i, self.get(i, j).conj());
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.m).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `A^{-1} B` by Gaussian elimination with partial pivoting.
    pub fn solve_matrix(&self, b: &Self) -> Result<Self> {
        check_dim("DenseComplex::solve square", self.n, self.m)?;
        check_dim("DenseComplex::solve rhs", self.n, b.n)?;
        let n = self.n;
        let r = b.m;
        let mut a = self.values.clone();
        let mut x = b.values.clone();
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&p, &q| a[p * n + k].norm().total_cmp(&a[q * n + k].norm()))
                .unwrap();
            if a[piv * n + k].norm() == 0.0 {
                return Err(Error::InvalidParameter("singular dense matrix".into()));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                for j in 0..r {
                    x.swap(k * r + j, piv * r + j);
                }
            }
            for i in k + 1..n {
                let f = a[i * n + k] / a[k * n + k];
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
                for j in 0..r {
                    let t = x[k * r + j];
                    x[i * r + j] -= f * t;
                }
            }
        }
        for k in (0..n).rev() {
            for j in 0..r {
                let mut s = x[k * r + j];
                for p in k + 1..n {
                    s -= a[k * n + p] * x[p * r + j];
                }
                x[k * r + j] = s / a[k * n + k];
            }
        }
        Ok(Self { n, m: r, values: x })
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut rhs = Self::zeros(b.len(), 1);
        rhs.values.copy_from_slice(b);
        Ok(self.solve_matrix(&rhs)?.values)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve_matrix(&Self::identity(self.n))
    }

    /// Spectral norm, as the square root of the dominant eigenvalue of
    /// `A* A` found by power iteration.
    pub fn norm2(&self, iters: usize) -> f64 {
        let g = self.adjoint().matmul(self);
        let n = g.n;
        // deterministic, generic start vector
        let mut v: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(1.0 + 0.37 * j as f64, 0.11 * (j % 5) as f64))
            .collect();
        let mut lambda = 0.0;
        for _ in 0..iters {
            let w = g.mul_vec(&v);
            let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nw == 0.0 {
                return 0.0;
            }
            let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lambda = nw / nv;
            v = w.into_iter().map(|z| z / nw).collect();
        }
        lambda.sqrt()
    }
}
