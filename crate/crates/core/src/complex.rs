//! Split-storage complex vectors and complex operators built from real
//! sparse matrices.

use num_complex::Complex64;

use crate::error::{check_dim, Result};
use crate::sparse::SparseReal;

/// Complex vector stored as separate real and imaginary arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }

    pub fn from_parts(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        check_dim("ComplexVector::from_parts", re.len(), im.len())?;
        Ok(Self { re, im })
    }

    /// Every entry equal to `c`.
    pub fn constant(n: usize, c: Complex64) -> Self {
        Self {
            re: vec![c.re; n],
            im: vec![c.im; n],
        }
    }

    pub fn from_complex(values: &[Complex64]) -> Self {
        Self {
            re: values.iter().map(|z| z.re).collect(),
            im: values.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn get(&self, j: usize) -> Complex64 {
        Complex64::new(self.re[j], self.im[j])
    }

    pub fn set(&mut self, j: usize, z: Complex64) {
        self.re[j] = z.re;
        self.im[j] = z.im;
    }

    /// Hermitian inner product `sum conj(x_j) y_j`.
    pub fn dot_h(&self, other: &ComplexVector) -> Result<Complex64> {
        check_dim("dot_h", self.len(), other.len())?;
        Ok(self.dot_h_unchecked(other))
    }

    pub(crate) fn dot_h_unchecked(&self, other: &ComplexVector) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for j in 0..self.len() {
            let (a, b) = (self.re[j], self.im[j]);
            let (c, d) = (other.re[j], other.im[j]);
            // (a - ib)(c + id)
            re += a * c + b * d;
            im += a * d - b * c;
        }
        Complex64::new(re, im)
    }

    /// Euclidean norm.
    pub fn norm2(&self) -> f64 {
        self.re
            .iter()
            .chain(&self.im)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// `self += a x`.
    pub fn axpy(&mut self, a: Complex64, x: &ComplexVector) {
        debug_assert_eq!(self.len(), x.len());
        for j in 0..self.len() {
            let (xr, xi) = (x.re[j], x.im[j]);
            self.re[j] += a.re * xr - a.im * xi;
            self.im[j] += a.re * xi + a.im * xr;
        }
    }

    /// `self = a self + x`, used by three-term recurrences.
    pub fn scale_add(&mut self, a: f64, x: &ComplexVector, b: f64) {
        debug_assert_eq!(self.len(), x.len());
        for j in 0..self.len() {
            self.re[j] = a * self.re[j] + b * x.re[j];
            self.im[j] = a * self.im[j] + b * x.im[j];
        }
    }

    pub fn scale(&mut self, a: Complex64) {
        for j in 0..self.len() {
            let (r, i) = (self.re[j], self.im[j]);
            self.re[j] = a.re * r - a.im * i;
            self.im[j] = a.re * i + a.im * r;
        }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn conj_in_place(&mut self) {
        self.im.iter_mut().for_each(|v| *v = -*v);
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.conj_in_place();
        out
    }

    pub fn sub(&self, other: &ComplexVector) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    pub fn add(&self, other: &ComplexVector) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other);
        out
    }

    pub fn fill_zero(&mut self) {
        self.re.iter_mut().for_each(|v| *v = 0.0);
        self.im.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn copy_from(&mut self, other: &ComplexVector) {
        self.re.copy_from_slice(&other.re);
        self.im.copy_from_slice(&other.im);
    }
}

/// Square operator acting on complex vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = Op x`; `x` and `y` have length `dim()`.
    fn apply_into(&self, x: &ComplexVector, y: &mut ComplexVector);

    fn apply(&self, x: &ComplexVector) -> ComplexVector {
        let mut y = ComplexVector::zeros(self.dim());
        self.apply_into(x, &mut y);
        y
    }
}

/// `(re_mat + i im_mat) x`.
pub fn complex_spmv(
    re_mat: &SparseReal,
    im_mat: &SparseReal,
    x: &ComplexVector,
) -> Result<ComplexVector> {
    check_dim("complex_spmv rows", re_mat.n_rows(), im_mat.n_rows())?;
    check_dim("complex_spmv cols", re_mat.n_cols(), im_mat.n_cols())?;
    check_dim("complex_spmv vector", re_mat.n_cols(), x.len())?;
    check_dim("complex_spmv vector", x.re.len(), x.im.len())?;
    let mut y = ComplexVector::zeros(re_mat.n_rows());
    complex_spmv_into(re_mat, im_mat, x, &mut y);
    Ok(y)
}

pub(crate) fn complex_spmv_into(
    re_mat: &SparseReal,
    im_mat: &SparseReal,
    x: &ComplexVector,
    y: &mut ComplexVector,
) {
    re_mat.spmv_into(&x.re, &mut y.re);
    im_mat.spmv_acc(-1.0, &x.im, &mut y.re);
    re_mat.spmv_into(&x.im, &mut y.im);
    im_mat.spmv_acc(1.0, &x.re, &mut y.im);
}

/// Complex matrix `re + i im` with real sparse parts of equal shape.
#[derive(Clone, Debug)]
pub struct ComplexMatrix {
    pub re: SparseReal,
    pub im: SparseReal,
}

impl ComplexMatrix {
    pub fn new(re: SparseReal, im: SparseReal) -> Result<Self> {
        check_dim("ComplexMatrix rows", re.n_rows(), im.n_rows())?;
        check_dim("ComplexMatrix cols", re.n_cols(), im.n_cols())?;
        check_dim("ComplexMatrix square", re.n_rows(), re.n_cols())?;
        Ok(Self { re, im })
    }
}

impl LinearOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.re.n_rows()
    }

    fn apply_into(&self, x: &ComplexVector, y: &mut ComplexVector) {
        complex_spmv_into(&self.re, &self.im, x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseComplex;
    use crate::problems::example2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
        ComplexVector {
            re: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            im: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    #[test]
    fn dot_h_singletons() {
        let x = ComplexVector::constant(1, c(1.0, 1.0));
        assert_eq!(x.dot_h(&x).unwrap(), c(2.0, 0.0));
        let i = ComplexVector::constant(1, c(0.0, 1.0));
        let one = ComplexVector::constant(1, c(1.0, 0.0));
        assert_eq!(i.dot_h(&one).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn dot_h_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_vector(&mut rng, 5);
        let y = random_vector(&mut rng, 5);
        let naive: Complex64 = x
            .to_complex()
            .iter()
            .zip(y.to_complex())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((x.dot_h(&y).unwrap() - naive).norm() < 1e-15);
        assert!(x.dot_h(&ComplexVector::zeros(4)).is_err());
    }

    #[test]
    fn norm2_cases() {
        assert_eq!(ComplexVector::zeros(7).norm2(), 0.0);
        let e = ComplexVector::constant(10, c(1.0, 1.0));
        assert!((e.norm2() - 20f64.sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_vector(&mut rng, 9);
        let naive = x
            .to_complex()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((x.norm2() - naive).abs() < 1e-15);
    }

    #[test]
    fn complex_spmv_identity_and_i() {
        let n = 3;
        let id = SparseReal::identity(n);
        let zero = SparseReal::from_triplets(n, n, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_vector(&mut rng, n);
        assert_eq!(complex_spmv(&id, &zero, &x).unwrap(), x);
        let ones = ComplexVector::constant(n, c(1.0, 0.0));
        let y = complex_spmv(&zero, &id, &ones).unwrap();
        assert_eq!(y, ComplexVector::constant(n, c(0.0, 1.0)));
    }

    #[test]
    fn complex_spmv_real_part_only_matches_spmv() {
        let a = SparseReal::tridiag(6, -1.0, 2.5, -0.5);
        let zero = SparseReal::from_triplets(6, 6, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_vector(&mut rng, 6);
        let y = complex_spmv(&a, &zero, &x).unwrap();
        assert_eq!(y.re, a.spmv(&x.re).unwrap());
        assert_eq!(y.im, a.spmv(&x.im).unwrap());
    }

    #[test]
    fn complex_spmv_example2_against_dense() {
        let p = example2(2, 100.0, 10.0).unwrap();
        let a = p.system_matrix().unwrap();
        let e = ComplexVector::constant(4, c(1.0, 0.0));
        let y = a.apply(&e);
        let dense = DenseComplex::from_parts(&a.re.to_dense(), &a.im.to_dense());
        let want = dense.mul_vec(&e.to_complex());
        for (j, w) in want.iter().enumerate() {
            assert!((y.get(j) - w).norm() < 1e-14);
        }
    }

    #[test]
    fn complex_spmv_dimension_errors() {
        let a = SparseReal::identity(3);
        let b = SparseReal::identity(2);
        assert!(complex_spmv(&a, &b, &ComplexVector::zeros(3)).is_err());
        assert!(complex_spmv(&a, &a, &ComplexVector::zeros(2)).is_err());
    }
}
