//! Two-step splitting iterations for `(W1 - W2 + iT) x = b` and the
//! preconditioners they induce.
//!
//! Every scheme solves two shifted subsystems per sweep. Complex
//! subsystems `R ± iS` go through PRESB-preconditioned Chebyshev; the
//! first SNSS subsystem is real SPD and uses a Cholesky factor directly.
//!
//! | scheme        | first subsystem | second subsystem | `M`                                    |
//! |---------------|-----------------|------------------|----------------------------------------|
//! | Method I      | `W1 + iT`       | `W2 - iT`        | `-(1/i) (W1+iT) T^-1 (W2-iT)`          |
//! | Method II     | `T - iW1`       | `T + iW2`        | `-(1/i) (T-iW1) T^-1 (T+iW2)`          |
//! | Method III(α) | `αT + iW2`      | `αT - iW1`       | `1/((1-2α)i) (αT+iW2) T^-1 (αT-iW1)`   |
//! | SNSS(α, β)    | `αT + W2`       | `i(β+1)T + W1`   | `1/(α-iβ) (αT+W2) T^-1 (i(β+1)T+W1)`   |

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_complex::Complex64;

use crate::chebyshev::{cheb_solve, ChebyshevConfig};
use crate::cholesky::{factor, CholeskyFactor};
use crate::complex::{ComplexMatrix, ComplexVector, LinearOperator};
use crate::error::{check_dim, Error, Result};
use crate::krylov::SolveReport;
use crate::presb::PresbOperator;
use crate::problems::ProblemInstance;
use crate::sparse::SparseReal;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplittingScheme {
    MethodI,
    MethodII,
    MethodIII { alpha: f64 },
    Snss { alpha: f64, beta: f64 },
}

impl SplittingScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::MethodIII { alpha } if !(alpha >= 1.0) => Err(Error::InvalidParameter(format!(
                "Method III requires alpha >= 1, got {alpha}"
            ))),
            Self::Snss { alpha, beta } if !(alpha > 0.0 && beta > 0.0) => {
                Err(Error::InvalidParameter(format!(
                    "SNSS requires alpha > 0 and beta > 0, got ({alpha}, {beta})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `1 / s` where `M = s · sub1 · T^-1 · sub2`.
    fn inverse_scalar(&self) -> Complex64 {
        match *self {
            Self::MethodI | Self::MethodII => -I,
            Self::MethodIII { alpha } => (1.0 - 2.0 * alpha) * I,
            Self::Snss { alpha, beta } => Complex64::new(alpha, -beta),
        }
    }
}

impl fmt::Display for SplittingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MethodI => write!(f, "Method I"),
            Self::MethodII => write!(f, "Method II"),
            Self::MethodIII { alpha } => write!(f, "Method III(alpha={alpha})"),
            Self::Snss { alpha, beta } => write!(f, "SNSS(alpha={alpha},beta={beta})"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum SubsystemSolver {
    Presb(PresbOperator),
    Direct(CholeskyFactor),
}

/// One shifted system of a splitting together with its solver.
#[derive(Clone, Debug)]
pub struct Subsystem {
    matrix: ComplexMatrix,
    solver: SubsystemSolver,
}

impl Subsystem {
    /// `R + iS`, or `R - iS` when `conjugate` is set.
    fn with_presb(r: SparseReal, s: SparseReal, conjugate: bool) -> Result<Self> {
        let im = if conjugate { s.scale(-1.0) } else { s.clone() };
        let matrix = ComplexMatrix::new(r.clone(), im)?;
        let presb = PresbOperator::build(r, s, conjugate)?;
        Ok(Self {
            matrix,
            solver: SubsystemSolver::Presb(presb),
        })
    }

    fn direct(a: SparseReal) -> Result<Self> {
        let f = factor(&a)?;
        let n = a.n_rows();
        Ok(Self {
            matrix: ComplexMatrix::new(a, SparseReal::from_triplets(n, n, &[])?)?,
            solver: SubsystemSolver::Direct(f),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn solver(&self) -> &SubsystemSolver {
        &self.solver
    }

    pub fn presb(&self) -> Option<&PresbOperator> {
        match &self.solver {
            SubsystemSolver::Presb(p) => Some(p),
            SubsystemSolver::Direct(_) => None,
        }
    }

    /// Returns the solution and the number of Chebyshev steps (0 for a
    /// direct solve).
    pub fn solve(
        &self,
        c: &ComplexVector,
        cfg: &ChebyshevConfig,
    ) -> Result<(ComplexVector, usize)> {
        match &self.solver {
            SubsystemSolver::Presb(p) => {
                let x0 = ComplexVector::zeros(c.len());
                cheb_solve(&self.matrix, p, c, cfg, &x0)
            }
            SubsystemSolver::Direct(f) => {
                let re = f.solve(&c.re)?;
                let im = f.solve(&c.im)?;
                Ok((ComplexVector { re, im }, 0))
            }
        }
    }
}

#[derive(Debug, Default)]
struct InnerCounter {
    calls: AtomicUsize,
    iters: AtomicUsize,
}

/// Subsystem solvers of a scheme bound to one problem.
#[derive(Debug)]
pub struct SplittingOperators<'a> {
    scheme: SplittingScheme,
    problem: &'a ProblemInstance,
    sub1: Subsystem,
    sub2: Subsystem,
    inner_cfg: ChebyshevConfig,
    counters: [InnerCounter; 2],
}

/// Factors every subsystem once.
pub fn build_operators<'a>(
    p: &'a ProblemInstance,
    scheme: SplittingScheme,
    inner_cfg: ChebyshevConfig,
) -> Result<SplittingOperators<'a>> {
    scheme.validate()?;
    inner_cfg.validate()?;
    let (w1, w2, t) = (&p.w1, &p.w2, &p.t);
    let (sub1, sub2) = match scheme {
        SplittingScheme::MethodI => (
            Subsystem::with_presb(w1.clone(), t.clone(), false)?,
            Subsystem::with_presb(w2.clone(), t.clone(), true)?,
        ),
        SplittingScheme::MethodII => (
            Subsystem::with_presb(t.clone(), w1.clone(), true)?,
            Subsystem::with_presb(t.clone(), w2.clone(), false)?,
        ),
        SplittingScheme::MethodIII { alpha } => (
            Subsystem::with_presb(t.scale(alpha), w2.clone(), false)?,
            Subsystem::with_presb(t.scale(alpha), w1.clone(), true)?,
        ),
        SplittingScheme::Snss { alpha, beta } => (
            Subsystem::direct(t.lin_comb(alpha, w2, 1.0)?)?,
            Subsystem::with_presb(w1.clone(), t.scale(beta + 1.0), false)?,
        ),
    };
    Ok(SplittingOperators {
        scheme,
        problem: p,
        sub1,
        sub2,
        inner_cfg,
        counters: Default::default(),
    })
}

fn rmul(a: &SparseReal, x: &ComplexVector) -> ComplexVector {
    let mut y = ComplexVector::zeros(x.len());
    a.spmv_into(&x.re, &mut y.re);
    a.spmv_into(&x.im, &mut y.im);
    y
}

/// `a u + i v`.
fn comb_i(a: f64, u: &ComplexVector, v: &ComplexVector) -> ComplexVector {
    ComplexVector {
        re: u.re.iter().zip(&v.im).map(|(p, q)| a * p - q).collect(),
        im: u.im.iter().zip(&v.re).map(|(p, q)| a * p + q).collect(),
    }
}

impl<'a> SplittingOperators<'a> {
    pub fn scheme(&self) -> SplittingScheme {
        self.scheme
    }

    pub fn problem(&self) -> &'a ProblemInstance {
        self.problem
    }

    pub fn sub1(&self) -> &Subsystem {
        &self.sub1
    }

    pub fn sub2(&self) -> &Subsystem {
        &self.sub2
    }

    pub fn inner_config(&self) -> &ChebyshevConfig {
        &self.inner_cfg
    }

    pub fn dim(&self) -> usize {
        self.problem.n
    }

    fn solve_sub(
        &self,
        k: usize,
        c: &ComplexVector,
        cfg: &ChebyshevConfig,
    ) -> Result<ComplexVector> {
        let sub = if k == 0 { &self.sub1 } else { &self.sub2 };
        let (x, it) = sub.solve(c, cfg)?;
        if sub.presb().is_some() {
            self.counters[k].calls.fetch_add(1, Ordering::Relaxed);
            self.counters[k].iters.fetch_add(it, Ordering::Relaxed);
        }
        Ok(x)
    }

    /// Mean Chebyshev steps per solve for each subsystem since the last
    /// reset. `None` for direct subsystems or before any solve.
    pub fn inner_iter_means(&self) -> Vec<Option<f64>> {
        self.counters
            .iter()
            .map(|c| {
                let calls = c.calls.load(Ordering::Relaxed);
                (calls > 0).then(|| c.iters.load(Ordering::Relaxed) as f64 / calls as f64)
            })
            .collect()
    }

    pub fn reset_inner_stats(&self) {
        for c in &self.counters {
            c.calls.store(0, Ordering::Relaxed);
            c.iters.store(0, Ordering::Relaxed);
        }
    }

    /// One full sweep with the given inner solver settings.
    pub(crate) fn sweep(
        &self,
        x: &ComplexVector,
        b: &ComplexVector,
        cfg: &ChebyshevConfig,
    ) -> Result<ComplexVector> {
        let n = self.dim();
        check_dim("stationary sweep iterate", n, x.len())?;
        check_dim("stationary sweep rhs", n, b.len())?;
        let p = self.problem;
        let one = Complex64::new(1.0, 0.0);
        match self.scheme {
            SplittingScheme::MethodI => {
                let c1 = rmul(&p.w2, x).add(b);
                let y = self.solve_sub(0, &c1, cfg)?;
                let c2 = rmul(&p.w1, &y).sub(b);
                self.solve_sub(1, &c2, cfg)
            }
            SplittingScheme::MethodII => {
                let c1 = rmul(&p.w2, x).add(b).scaled(-I);
                let y = self.solve_sub(0, &c1, cfg)?;
                let c2 = rmul(&p.w1, &y).sub(b).scaled(I);
                self.solve_sub(1, &c2, cfg)
            }
            SplittingScheme::MethodIII { alpha } => {
                let c1 = comb_i(alpha - 1.0, &rmul(&p.t, x), &rmul(&p.w1, x).sub(b));
                let y = self.solve_sub(0, &c1, cfg)?;
                let mut c2 = comb_i(alpha - 1.0, &rmul(&p.t, &y), &rmul(&p.w2, &y).scaled(-one));
                c2.axpy(-I, b);
                self.solve_sub(1, &c2, cfg)
            }
            SplittingScheme::Snss { alpha, beta } => {
                let tx = rmul(&p.t, x);
                let mut c1 = comb_i(alpha, &tx, &tx).add(&rmul(&p.w1, x));
                c1.axpy(-one, b);
                let y = self.solve_sub(0, &c1, cfg)?;
                let ty = rmul(&p.t, &y);
                let mut c2 = comb_i(0.0, &ty, &ty.scaled(Complex64::new(beta, 0.0)));
                c2 = c2.add(&rmul(&p.w2, &y)).add(b);
                self.solve_sub(1, &c2, cfg)
            }
        }
    }

    /// One sweep `x -> x⁺` of the stationary iteration.
    pub fn stationary_step(&self, x: &ComplexVector, b: &ComplexVector) -> Result<ComplexVector> {
        self.sweep(x, b, &self.inner_cfg)
    }

    /// Sweeps from `x = 0` until `‖b - A x‖ <= tol ‖b‖` or `max_sweeps`.
    /// Running out of sweeps is reported through `converged = false`.
    pub fn stationary_solve(
        &self,
        b: &ComplexVector,
        tol: f64,
        max_sweeps: usize,
    ) -> Result<(ComplexVector, SolveReport)> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {tol} must be > 0"
            )));
        }
        let n = self.dim();
        check_dim("stationary_solve rhs", n, b.len())?;
        let start = Instant::now();
        self.reset_inner_stats();
        let a = self.problem.system_matrix()?;
        let bnorm = b.norm2();
        let mut x = ComplexVector::zeros(n);
        let mut history = vec![if bnorm == 0.0 { 0.0 } else { 1.0 }];
        let mut converged = bnorm == 0.0;
        let mut sweeps = 0;
        while !converged && sweeps < max_sweeps {
            x = self.stationary_step(&x, b)?;
            sweeps += 1;
            let rel = a.apply(&x).sub(b).norm2() / bnorm;
            history.push(rel);
            converged = rel <= tol;
        }
        let e_k = match &self.problem.x_exact {
            Some(xe) if *b == self.problem.b => Some(x.sub(xe).norm2() / xe.norm2()),
            _ => None,
        };
        let report = SolveReport {
            iters: sweeps,
            converged,
            r_k: *history.last().unwrap(),
            residual_history: history,
            e_k,
            wall_seconds: start.elapsed().as_secs_f64(),
            inner_iter_means: self.inner_iter_means(),
        };
        Ok((x, report))
    }

    /// `M^{-1} v`: solve with the first factor, multiply by `T`, solve with
    /// the second factor, divide by the scalar prefactor.
    pub fn precond_apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dim("precond_apply", self.dim(), v.len())?;
        let u = self.solve_sub(0, v, &self.inner_cfg)?;
        let w = rmul(&self.problem.t, &u);
        let mut z = self.solve_sub(1, &w, &self.inner_cfg)?;
        z.scale(self.scheme.inverse_scalar());
        Ok(z)
    }
}
