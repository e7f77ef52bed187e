//! Model problems `(W1 - W2 + iT) x = b` and problem file I/O.
//!
//! Grid unknowns are ordered lexicographically with the x-index fastest:
//! node `(x_j, y_k) = (j h, k h)`, `j, k = 1..=m`, is unknown `(k-1) m + (j-1)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::cholesky::factor;
use crate::complex::{ComplexMatrix, ComplexVector, LinearOperator};
use crate::error::{check_dim, Error, Result};
use crate::mm;
use crate::sparse::{kron_sum, SparseReal};

/// A complex symmetric system with indefinite real part `W1 - W2`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub name: String,
    pub n: usize,
    pub w1: SparseReal,
    pub w2: SparseReal,
    pub t: SparseReal,
    pub b: ComplexVector,
    pub x_exact: Option<ComplexVector>,
    pub params: BTreeMap<String, f64>,
}

impl ProblemInstance {
    /// Assembles and validates dimensions. `T` must pass the SPD probe.
    pub fn new(
        name: impl Into<String>,
        w1: SparseReal,
        w2: SparseReal,
        t: SparseReal,
        b: ComplexVector,
        x_exact: Option<ComplexVector>,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let n = w1.n_rows();
        for (what, mat) in [("W1", &w1), ("W2", &w2), ("T", &t)] {
            if !mat.is_square() {
                return Err(Error::InvalidParameter(format!("{what} is not square")));
            }
        }
        check_dim("problem W2 order", n, w2.n_rows())?;
        check_dim("problem T order", n, t.n_rows())?;
        check_dim("problem right-hand side", n, b.len())?;
        if let Some(x) = &x_exact {
            check_dim("problem exact solution", n, x.len())?;
        }
        factor(&t)?;
        Ok(Self {
            name: name.into(),
            n,
            w1,
            w2,
            t,
            b,
            x_exact,
            params,
        })
    }

    /// `A = (W1 - W2) + i T`.
    pub fn system_matrix(&self) -> Result<ComplexMatrix> {
        let re = self.w1.lin_comb(1.0, &self.w2, -1.0)?;
        ComplexMatrix::new(re, self.t.clone())
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// Writes `W1.mtx`, `W2.mtx`, `T.mtx`, `b.mtx`, optionally
    /// `x_exact.mtx`, and `meta.txt` with `key=value` lines.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        mm::write_sparse_file(dir.join("W1.mtx"), &self.w1)?;
        mm::write_sparse_file(dir.join("W2.mtx"), &self.w2)?;
        mm::write_sparse_file(dir.join("T.mtx"), &self.t)?;
        mm::write_complex_vector_file(dir.join("b.mtx"), &self.b)?;
        if let Some(x) = &self.x_exact {
            mm::write_complex_vector_file(dir.join("x_exact.mtx"), x)?;
        }
        let mut meta = format!("name={}\nn={}\n", self.name, self.n);
        for (k, v) in &self.params {
            meta.push_str(&format!("{k}={v}\n"));
        }
        fs::write(dir.join("meta.txt"), meta)?;
        Ok(())
    }
}

fn with_rhs_from_solution(
    name: &str,
    w1: SparseReal,
    w2: SparseReal,
    t: SparseReal,
    params: BTreeMap<String, f64>,
) -> Result<ProblemInstance> {
    let n = w1.n_rows();
    let x = ComplexVector::constant(n, Complex64::new(1.0, 1.0));
    let a = ComplexMatrix::new(w1.lin_comb(1.0, &w2, -1.0)?, t.clone())?;
    let b = a.apply(&x);
    ProblemInstance::new(name, w1, w2, t, b, Some(x), params)
}

fn mesh(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("grid size m must be >= 1".into()));
    }
    Ok(1.0 / (m as f64 + 1.0))
}

/// Damped vibration problem `(K - ω² M) + iω(ω C_V + C_H)` with `M = I`,
/// `C_V = 5I`, `C_H = 0.02 K` and `K` the `h^-2`-scaled 5-point Laplacian.
pub fn example1(m: usize, omega: f64) -> Result<ProblemInstance> {
    let h = mesh(m)?;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter("omega must be > 0".into()));
    }
    let n = m * m;
    let v = SparseReal::tridiag(m, -1.0, 2.0, -1.0).scale(1.0 / (h * h));
    let k = kron_sum(&v, m)?;
    let w2 = SparseReal::scaled_identity(n, omega * omega);
    let c = SparseReal::scaled_identity(n, 5.0 * omega).lin_comb(1.0, &k, 0.02)?;
    let t = c.scale(omega);
    let params = BTreeMap::from([
        ("m".to_string(), m as f64),
        ("h".to_string(), h),
        ("omega".to_string(), omega),
        ("mu".to_string(), 0.02),
    ]);
    with_rhs_from_solution("example1", k, w2, t, params)
}

fn helmholtz_matrices(
    m: usize,
    sigma1: f64,
    sigma2: f64,
) -> Result<(SparseReal, SparseReal, SparseReal, f64)> {
    let h = mesh(m)?;
    if !(sigma1 >= 0.0) {
        return Err(Error::InvalidParameter("sigma1 must be >= 0".into()));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter("sigma2 must be > 0".into()));
    }
    let n = m * m;
    let k = kron_sum(&SparseReal::tridiag(m, -1.0, 2.0, -1.0), m)?;
    let w2 = SparseReal::scaled_identity(n, sigma1 * h * h);
    let t = SparseReal::scaled_identity(n, sigma2 * h * h);
    Ok((k, w2, t, h))
}

/// Complex Helmholtz problem `-Δu - σ1 u + iσ2 u` with the unscaled
/// stencil `K` and `h²`-scaled zeroth-order terms; `b = A (1+i)e`.
pub fn example2(m: usize, sigma1: f64, sigma2: f64) -> Result<ProblemInstance> {
    let (k, w2, t, h) = helmholtz_matrices(m, sigma1, sigma2)?;
    let params = BTreeMap::from([
        ("m".to_string(), m as f64),
        ("h".to_string(), h),
        ("sigma1".to_string(), sigma1),
        ("sigma2".to_string(), sigma2),
    ]);
    with_rhs_from_solution("example2", k, w2, t, params)
}

/// Helmholtz problem with `σ1 = 100`, `σ2 = 10` and source `e^{x+iy}`,
/// sampled at interior nodes and scaled by `h²`. No exact solution.
pub fn example3(m: usize) -> Result<ProblemInstance> {
    let (sigma1, sigma2) = (100.0, 10.0);
    let (k, w2, t, h) = helmholtz_matrices(m, sigma1, sigma2)?;
    let mut b = ComplexVector::zeros(m * m);
    for kk in 1..=m {
        let y = kk as f64 * h;
        for j in 1..=m {
            let x = j as f64 * h;
            let f = Complex64::new(x, y).exp() * (h * h);
            b.set((kk - 1) * m + (j - 1), f);
        }
    }
    let params = BTreeMap::from([
        ("m".to_string(), m as f64),
        ("h".to_string(), h),
        ("sigma1".to_string(), sigma1),
        ("sigma2".to_string(), sigma2),
    ]);
    ProblemInstance::new("example3", k, w2, t, b, None, params)
}

/// Loads `W1`, `W2`, `T` and `b` from Matrix Market files. The result has
/// no exact solution attached.
pub fn load_problem(
    w1: impl AsRef<Path>,
    w2: impl AsRef<Path>,
    t: impl AsRef<Path>,
    b: impl AsRef<Path>,
) -> Result<ProblemInstance> {
    let w1 = mm::read_sparse_file(w1)?;
    let w2 = mm::read_sparse_file(w2)?;
    let t = mm::read_sparse_file(t)?;
    let b = mm::read_complex_vector_file(b)?;
    ProblemInstance::new("loaded", w1, w2, t, b, None, BTreeMap::new())
}

/// Loads a directory written by [`ProblemInstance::export`], including the
/// exact solution and metadata when present.
pub fn load_problem_dir(dir: impl AsRef<Path>) -> Result<ProblemInstance> {
    let dir = dir.as_ref();
    let mut p = load_problem(
        dir.join("W1.mtx"),
        dir.join("W2.mtx"),
        dir.join("T.mtx"),
        dir.join("b.mtx"),
    )?;
    let xpath = dir.join("x_exact.mtx");
    if xpath.exists() {
        let x = mm::read_complex_vector_file(xpath)?;
        check_dim("exact solution", p.n, x.len())?;
        p.x_exact = Some(x);
    }
    let meta = dir.join("meta.txt");
    if meta.exists() {
        for line in fs::read_to_string(meta)?.lines() {
            let Some((k, v)) = line.split_once('=') else {
                continue;
            };
            match k.trim() {
                "name" => p.name = v.trim().to_string(),
                "n" => {}
                key => {
                    if let Ok(val) = v.trim().parse() {
                        p.params.insert(key.to_string(), val);
                    }
                }
            }
        }
    }
    Ok(p)
}
