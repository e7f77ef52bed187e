//! PRESB preconditioner for `(R + iS) z = c` with `R`, `S` symmetric
//! positive (semi)definite and `R + S` positive definite.
//!
//! On the real block form `(Re z, Im z)` the preconditioner is
//!
//! ```text
//! B = [ R  -S     ] = [ I -I ] [ R+S   0  ] [ I  I ]
//!     [ S   R+2S  ]   [ 0  I ] [ S    R+S ] [ 0  I ]
//! ```
//!
//! so one application costs two solves with `R + S`, sharing one Cholesky
//! factor. Systems `(R - iS) z = c` are handled by conjugating input and
//! output.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cholesky::{factor, CholeskyFactor};
use crate::complex::{ComplexVector, LinearOperator};
use crate::dense::DenseReal;
use crate::error::{check_dim, Result};
use crate::sparse::SparseReal;

#[derive(Clone, Debug)]
pub struct PresbOperator {
    r: SparseReal,
    s: SparseReal,
    sum_factor: CholeskyFactor,
    conjugate: bool,
}

impl PresbOperator {
    /// Factors `R + S` once. `conjugate` selects the `R - iS` system.
    pub fn build(r: SparseReal, s: SparseReal, conjugate: bool) -> Result<Self> {
        check_dim("presb R square", r.n_rows(), r.n_cols())?;
        check_dim("presb S order", r.n_rows(), s.n_rows())?;
        check_dim("presb S square", s.n_rows(), s.n_cols())?;
        let sum = r.lin_comb(1.0, &s, 1.0)?;
        let sum_factor = factor(&sum)?;
        Ok(Self {
            r,
            s,
            sum_factor,
            conjugate,
        })
    }

    pub fn r(&self) -> &SparseReal {
        &self.r
    }

    pub fn s(&self) -> &SparseReal {
        &self.s
    }

    pub fn is_conjugate(&self) -> bool {
        self.conjugate
    }

    pub fn sum_factor(&self) -> &CholeskyFactor {
        &self.sum_factor
    }

    /// `B^{-1} c`.
    pub fn apply_inverse(&self, c: &ComplexVector) -> Result<ComplexVector> {
        check_dim("presb apply", self.r.n_rows(), c.len())?;
        let mut z = ComplexVector::zeros(c.len());
        self.apply_into(c, &mut z);
        Ok(z)
    }

    /// Multiplies by the block matrix `B` itself (the conjugated form when
    /// the conjugate flag is set).
    pub fn block_apply(&self, z: &ComplexVector) -> ComplexVector {
        let n = z.len();
        let sign = if self.conjugate { -1.0 } else { 1.0 };
        // conjugated block form: diag(I,-I) B diag(I,-I)
        let u1 = &z.re;
        let u2: Vec<f64> = z.im.iter().map(|v| sign * v).collect();
        let mut y1 = vec![0.0; n];
        let mut y2 = vec![0.0; n];
        self.r.spmv_into(u1, &mut y1);
        self.s.spmv_acc(-1.0, &u2, &mut y1);
        self.s.spmv_into(u1, &mut y2);
        self.r.spmv_acc(1.0, &u2, &mut y2);
        self.s.spmv_acc(2.0, &u2, &mut y2);
        y2.iter_mut().for_each(|v| *v *= sign);
        ComplexVector { re: y1, im: y2 }
    }
}

impl LinearOperator for PresbOperator {
    fn dim(&self) -> usize {
        self.r.n_rows()
    }

    fn apply_into(&self, c: &ComplexVector, z: &mut ComplexVector) {
        let n = c.len();
        let sign = if self.conjugate { -1.0 } else { 1.0 };
        let mut work = vec![0.0; n];
        // w1 = f1 + f2
        let w1: Vec<f64> = c.re.iter().zip(&c.im).map(|(a, b)| a + sign * b).collect();
        let mut v1 = vec![0.0; n];
        self.sum_factor.solve_into(&w1, &mut v1, &mut work);
        // f2 - S v1
        let mut w2: Vec<f64> = c.im.iter().map(|b| sign * b).collect();
        self.s.spmv_acc(-1.0, &v1, &mut w2);
        self.sum_factor.solve_into(&w2, &mut z.im, &mut work);
        for j in 0..n {
            z.re[j] = v1[j] - z.im[j];
            z.im[j] *= sign;
        }
    }
}

const RITZ_DIM: usize = 1024;
const MIN_RITZ_DIM: usize = 60;
const BASIS_BUDGET: usize = 1 << 22;
const SQUARINGS: usize = 60;

/// `g = B^{-1} A x - (3/4) x`.
fn probe_apply<A: LinearOperator>(
    p: &PresbOperator,
    a: &A,
    x: &ComplexVector,
    ax: &mut ComplexVector,
    g: &mut ComplexVector,
) {
    a.apply_into(x, ax);
    p.apply_into(ax, g);
    g.axpy(Complex64::new(-0.75, 0.0), x);
}

/// Real inner product on the block form.
fn dot_re(x: &ComplexVector, y: &ComplexVector) -> f64 {
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    d(&x.re, &y.re) + d(&x.im, &y.im)
}

/// Power-iteration estimate of the spectral radius of `B^{-1} A - (3/4) I`
/// on the real block form. For a PRESB operator paired with its own target
/// system the eigenvalues of `B^{-1} A` lie in `[1/2, 1]`, so the true value
/// is `1/4`.
///
/// After `iters` normalized power steps from a seeded random start, a real
/// Arnoldi process is run from the power iterate and the estimate is the
/// spectral radius of the projected Hessenberg matrix, found by repeated
/// squaring. The Arnoldi basis holds up to 1024 vectors within a fixed
/// memory budget, so small operators run to breakdown on an invariant
/// subspace. Eigenvalues of `B^{-1} A` close to 1 have nearly
/// parallel eigenvectors, so norm-growth ratios on the full operator
/// overshoot for many steps.
pub fn presb_spectrum_probe<A: LinearOperator>(
    p: &PresbOperator,
    a: &A,
    iters: usize,
    seed: u64,
) -> Result<f64> {
    let n = p.dim();
    check_dim("presb_spectrum_probe", n, a.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = ComplexVector {
        re: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        im: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    let nx = x.norm2();
    x.scale(Complex64::new(1.0 / nx, 0.0));

    let mut ax = ComplexVector::zeros(n);
    let mut gx = ComplexVector::zeros(n);
    for _ in 0..iters {
        probe_apply(p, a, &x, &mut ax, &mut gx);
        let growth = gx.norm2();
        if growth == 0.0 {
            return Ok(0.0);
        }
        x.copy_from(&gx);
        x.scale(Complex64::new(1.0 / growth, 0.0));
    }

    let dim = (BASIS_BUDGET / n).clamp(MIN_RITZ_DIM, RITZ_DIM).min(2 * n);
    let mut h = DenseReal::zeros(dim, dim);
    let mut basis = vec![x];
    for j in 0..dim {
        probe_apply(p, a, &basis[j], &mut ax, &mut gx);
        let scale = gx.norm2();
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot_re(v, &gx);
                h.set(i, j, h.get(i, j) + c);
                gx.axpy(Complex64::new(-c, 0.0), v);
            }
        }
        let next = gx.norm2();
        if j + 1 == dim || next <= 1e-10 * scale {
            break;
        }
        h.set(j + 1, j, next);
        basis.push(gx.scaled(Complex64::new(1.0 / next, 0.0)));
    }
    let k = basis.len();
    let mut hk = DenseReal::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            hk.set(i, j, h.get(i, j));
        }
    }
    Ok(spectral_radius_dense(hk))
}

/// `ρ(H)` as `lim ‖H^(2^s)‖^(1/2^s)`, by repeated normalized squaring.
fn spectral_radius_dense(h: DenseReal) -> f64 {
    let f = h.frobenius();
    if f == 0.0 {
        return 0.0;
    }
    let k = h.n_rows();
    let mut m = DenseReal::from_row_major(k, k, h.values().iter().map(|v| v / f).collect())
        .expect("square");
    let mut log = f.ln();
    let mut weight = 1.0;
    for _ in 0..SQUARINGS {
        let sq = m.matmul(&m).expect("square");
        let c = sq.frobenius();
        if c == 0.0 {
            return 0.0;
        }
        weight *= 0.5;
        log += weight * c.ln();
        m = DenseReal::from_row_major(k, k, sq.values().iter().map(|v| v / c).collect())
            .expect("square");
    }
    log.exp()
}
