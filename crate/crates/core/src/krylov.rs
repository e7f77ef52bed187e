//! Full GMRES and flexible GMRES over the complex field with right
//! preconditioning by a splitting scheme.

use std::time::Instant;

use num_complex::Complex64;

use crate::complex::{ComplexVector, LinearOperator};
use crate::error::{check_dim, Error, Result};
use crate::problems::ProblemInstance;
use crate::splitting::SplittingOperators;

/// Inner reductions above this make the preconditioner vary between
/// applications, which only the flexible variant tolerates.
pub const LOOSE_INNER_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KrylovFlavor {
    Gmres,
    Fgmres,
    Unpreconditioned,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovConfig {
    pub flavor: KrylovFlavor,
    pub outer_reduction: f64,
    pub max_outer: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            flavor: KrylovFlavor::Gmres,
            outer_reduction: 1e-10,
            max_outer: 1000,
        }
    }
}

impl KrylovConfig {
    pub fn new(flavor: KrylovFlavor) -> Self {
        Self {
            flavor,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_reduction > 0.0 && self.outer_reduction < 1.0) {
            return Err(Error::Config(format!(
                "outer reduction {} must lie in (0, 1)",
                self.outer_reduction
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("max_outer must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of an outer solve (Krylov or stationary).
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iters: usize,
    pub converged: bool,
    /// Relative residual norms, starting with the initial one.
    pub residual_history: Vec<f64>,
    /// `‖b - A x‖ / ‖b‖` of the returned iterate.
    pub r_k: f64,
    /// `‖x* - x‖ / ‖x*‖` when the exact solution is known.
    pub e_k: Option<f64>,
    pub wall_seconds: f64,
    /// Mean inner Chebyshev steps per subsystem; `None` for direct solves.
    pub inner_iter_means: Vec<Option<f64>>,
}

/// Relative residual and, when available, relative error of `x`.
pub fn evaluate_solution(p: &ProblemInstance, x: &ComplexVector) -> Result<(f64, Option<f64>)> {
    check_dim("evaluate_solution", p.n, x.len())?;
    let a = p.system_matrix()?;
    let bn = p.b.norm2();
    let r = p.b.sub(&a.apply(x)).norm2();
    let r_k = if bn == 0.0 { r } else { r / bn };
    let e_k = p.x_exact.as_ref().map(|xe| {
        let en = xe.norm2();
        let d = x.sub(xe).norm2();
        if en == 0.0 {
            d
        } else {
            d / en
        }
    });
    Ok((r_k, e_k))
}

/// Complex Givens rotation zeroing `b` against `a`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = na.hypot(b.norm());
    (na / r, (a / na) * b.conj() / r)
}

struct Preconditioner<'o, 'a> {
    ops: Option<&'o SplittingOperators<'a>>,
}

impl Preconditioner<'_, '_> {
    fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        match self.ops {
            Some(o) => o.precond_apply(v),
            None => Ok(v.clone()),
        }
    }
}

/// Solves `A x = b` from a zero initial guess. With `ops` absent (or the
/// unpreconditioned flavor) plain GMRES runs on `A`.
///
/// Convergence is declared when the Arnoldi residual estimate drops below
/// `outer_reduction · ‖b‖` and the recomputed true residual confirms it.
/// If the confirmation fails, iteration continues with a fresh Arnoldi
/// cycle started from the current iterate; the step count is cumulative.
pub fn gmres_solve(
    p: &ProblemInstance,
    ops: Option<&SplittingOperators<'_>>,
    cfg: &KrylovConfig,
) -> Result<(ComplexVector, SolveReport)> {
    cfg.validate()?;
    let ops = match (cfg.flavor, ops) {
        (KrylovFlavor::Unpreconditioned, Some(_)) => {
            return Err(Error::Config(
                "unpreconditioned flavor given a splitting preconditioner".into(),
            ))
        }
        (_, None) => None,
        (flavor, Some(o)) => {
            check_dim("gmres preconditioner", p.n, o.dim())?;
            let red = o.inner_config().reduction;
            if flavor == KrylovFlavor::Gmres && red > LOOSE_INNER_THRESHOLD {
                return Err(Error::Config(format!(
                    "inner reduction {red:e} is loose; the preconditioner varies between applications, use FGMRES"
                )));
            }
            Some(o)
        }
    };
    let flexible = cfg.flavor == KrylovFlavor::Fgmres && ops.is_some();
    let prec = Preconditioner { ops };
    if let Some(o) = ops {
        o.reset_inner_stats();
    }

    let start = Instant::now();
    let a = p.system_matrix()?;
    let n = p.n;
    let b = &p.b;
    let beta = b.norm2();
    let tol = cfg.outer_reduction * beta;

    let finish =
        |x: ComplexVector, iters: usize, converged: bool, history: Vec<f64>| -> Result<_> {
            let (r_k, e_k) = evaluate_solution(p, &x)?;
            let report = SolveReport {
                iters,
                converged,
                residual_history: history,
                r_k,
                e_k,
                wall_seconds: start.elapsed().as_secs_f64(),
                inner_iter_means: ops.map(|o| o.inner_iter_means()).unwrap_or_default(),
            };
            Ok((x, report))
        };

    if beta == 0.0 {
        return finish(ComplexVector::zeros(n), 0, true, vec![0.0]);
    }

    let mut x = ComplexVector::zeros(n);
    let mut resid = b.clone();
    let mut history = vec![1.0];
    let mut done = 0usize;
    loop {
        let cycle = arnoldi_cycle(
            &a,
            &prec,
            flexible,
            &resid,
            tol,
            cfg.max_outer - done,
            &mut history,
            beta,
        )?;
        done += cycle.steps;
        x = x.add(&cycle.correction);
        resid = b.sub(&a.apply(&x));
        let true_res = resid.norm2();
        // record the confirmed value rather than the recurrence estimate
        *history.last_mut().unwrap() = true_res / beta;
        if true_res <= tol {
            return finish(x, done, true, history);
        }
        if cycle.breakdown || done >= cfg.max_outer {
            return finish(x, done, false, history);
        }
    }
}

struct Cycle {
    correction: ComplexVector,
    steps: usize,
    breakdown: bool,
}

/// Arnoldi steps on `A M^{-1}` from `r0` until the recurrence residual
/// reaches `tol`, breakdown, or `max_steps`. Residual estimates relative to
/// `bnorm` are appended to `history`.
#[allow(clippy::too_many_arguments)]
fn arnoldi_cycle(
    a: &impl LinearOperator,
    prec: &Preconditioner<'_, '_>,
    flexible: bool,
    r0: &ComplexVector,
    tol: f64,
    max_steps: usize,
    history: &mut Vec<f64>,
    bnorm: f64,
) -> Result<Cycle> {
    let n = r0.len();
    let beta = r0.norm2();
    let mut v: Vec<ComplexVector> = vec![r0.scaled(Complex64::new(1.0 / beta, 0.0))];
    let mut z: Vec<ComplexVector> = Vec::new();
    // columns of the rotated Hessenberg matrix (upper triangular part)
    let mut r: Vec<Vec<Complex64>> = Vec::new();
    let mut rot: Vec<(f64, Complex64)> = Vec::new();
    let mut g = vec![Complex64::new(beta, 0.0)];
    let mut w = ComplexVector::zeros(n);

    for j in 0..max_steps {
        let zj = prec.apply(&v[j])?;
        a.apply_into(&zj, &mut w);
        if flexible {
            z.push(zj);
        }

        // modified Gram-Schmidt, second pass on severe cancellation
        let mut h = vec![Complex64::new(0.0, 0.0); j + 2];
        let before = w.norm2();
        for (i, vi) in v.iter().enumerate() {
            let c = vi.dot_h_unchecked(&w);
            h[i] += c;
            w.axpy(-c, vi);
        }
        if w.norm2() < before / std::f64::consts::SQRT_2 {
            for (i, vi) in v.iter().enumerate() {
                let c = vi.dot_h_unchecked(&w);
                h[i] += c;
                w.axpy(-c, vi);
            }
        }
        let hnext = w.norm2();
        h[j + 1] = Complex64::new(hnext, 0.0);

        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a0, a1) = (h[i], h[i + 1]);
            h[i] = c * a0 + s * a1;
            h[i + 1] = -s.conj() * a0 + c * a1;
        }
        let (c, s) = givens(h[j], h[j + 1]);
        h[j] = c * h[j] + s * h[j + 1];
        h[j + 1] = Complex64::new(0.0, 0.0);
        rot.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s.conj() * gj);
        h.truncate(j + 1);
        r.push(h);

        let res = g[j + 1].norm();
        history.push(res / bnorm);
        let breakdown = hnext == 0.0 || !hnext.is_finite();
        if res <= tol || breakdown || j + 1 == max_steps {
            let k = r.len();
            let mut y = vec![Complex64::new(0.0, 0.0); k];
            for i in (0..k).rev() {
                let mut s = g[i];
                for (jj, col) in r.iter().enumerate().skip(i + 1) {
                    s -= col[i] * y[jj];
                }
                y[i] = s / r[i][i];
            }
            let basis = if flexible { &z } else { &v };
            let mut comb = ComplexVector::zeros(n);
            for (yi, vi) in y.iter().zip(basis) {
                comb.axpy(*yi, vi);
            }
            let correction = if flexible { comb } else { prec.apply(&comb)? };
            return Ok(Cycle {
                correction,
                steps: j + 1,
                breakdown,
            });
        }
        w.scale(Complex64::new(1.0 / hnext, 0.0));
        v.push(std::mem::replace(&mut w, ComplexVector::zeros(n)));
    }
    unreachable!("max_steps is at least one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::ChebyshevConfig;
    use crate::problems::{example1, example2};
    use crate::sparse::SparseReal;
    use crate::splitting::{build_operators, SplittingScheme};
    use std::collections::BTreeMap;

    #[test]
    fn config_validation() {
        assert!(KrylovConfig::default().validate().is_ok());
        let bad = KrylovConfig {
            outer_reduction: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = KrylovConfig {
            max_outer: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_eigenvalue_one_iteration() {
        // A = (2 - 1) I + i I
        let n = 5;
        let b = ComplexVector::from_complex(
            &(0..n)
                .map(|j| Complex64::new(j as f64 + 1.0, 0.5))
                .collect::<Vec<_>>(),
        );
        let p = ProblemInstance::new(
            "scalar",
            SparseReal::scaled_identity(n, 2.0),
            SparseReal::identity(n),
            SparseReal::identity(n),
            b.clone(),
            None,
            BTreeMap::new(),
        )
        .unwrap();
        let (x, rep) =
            gmres_solve(&p, None, &KrylovConfig::new(KrylovFlavor::Unpreconditioned)).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iters, 1);
        let want = b.scaled(Complex64::new(1.0, 1.0).inv());
        assert!(x.sub(&want).norm2() < 1e-14 * want.norm2());
    }

    #[test]
    fn loose_inner_with_plain_gmres_rejected() {
        let p = example2(4, 100.0, 100.0).unwrap();
        let ops =
            build_operators(&p, SplittingScheme::MethodI, ChebyshevConfig::presb(1e-2)).unwrap();
        let err = gmres_solve(&p, Some(&ops), &KrylovConfig::new(KrylovFlavor::Gmres)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = gmres_solve(
            &p,
            Some(&ops),
            &KrylovConfig::new(KrylovFlavor::Unpreconditioned),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn evaluate_solution_trivial_cases() {
        let p = example2(6, 100.0, 10.0).unwrap();
        let xe = p.x_exact.clone().unwrap();
        let (r, e) = evaluate_solution(&p, &xe).unwrap();
        assert!(r <= 1e-12);
        assert_eq!(e, Some(0.0));
        let (r, _) = evaluate_solution(&p, &ComplexVector::zeros(p.n)).unwrap();
        assert_eq!(r, 1.0);
        assert!(evaluate_solution(&p, &ComplexVector::zeros(2)).is_err());
    }

    #[test]
    fn history_monotone_and_residuals_agree() {
        let p = example2(16, 100.0, 10.0).unwrap();
        for (flavor, inner) in [(KrylovFlavor::Gmres, 1e-10), (KrylovFlavor::Fgmres, 1e-2)] {
            for s in [
                SplittingScheme::MethodI,
                SplittingScheme::MethodII,
                SplittingScheme::Snss {
                    alpha: 5.0,
                    beta: 0.1,
                },
            ] {
                let ops = build_operators(&p, s, ChebyshevConfig::presb(inner)).unwrap();
                let (_, rep) = gmres_solve(&p, Some(&ops), &KrylovConfig::new(flavor)).unwrap();
                assert!(rep.converged, "{s} {flavor:?}");
                assert_eq!(rep.residual_history.len(), rep.iters + 1);
                for w in rep.residual_history.windows(2) {
                    assert!(w[1] <= w[0] * (1.0 + 1e-14), "{s} {flavor:?}");
                }
                assert!(rep.r_k <= 1e-10);
                let last = *rep.residual_history.last().unwrap();
                assert!(rep.r_k <= 10.0 * last.max(1e-16), "{} vs {last}", rep.r_k);
                assert!(rep.e_k.unwrap() < 1e-8);
                assert_eq!(rep.inner_iter_means.len(), 2);
            }
        }
    }

    #[test]
    fn unpreconditioned_matches_dense_solution() {
        let p = example1(6, 3.0).unwrap();
        let (x, rep) = gmres_solve(&p, None, &KrylovConfig::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.iters <= p.n);
        assert!(x.sub(p.x_exact.as_ref().unwrap()).norm2() < 1e-8 * x.norm2());
        assert!(rep.inner_iter_means.is_empty());
    }

    #[test]
    fn max_outer_reports_nonconvergence() {
        let p = example2(12, 1000.0, 10.0).unwrap();
        let cfg = KrylovConfig {
            max_outer: 3,
            ..KrylovConfig::new(KrylovFlavor::Unpreconditioned)
        };
        let (_, rep) = gmres_solve(&p, None, &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iters, 3);
        assert!(rep.r_k > 1e-10);
    }

    #[test]
    fn zero_rhs() {
        let mut p = example2(4, 10.0, 10.0).unwrap();
        p.b = ComplexVector::zeros(p.n);
        p.x_exact = None;
        let (x, rep) = gmres_solve(&p, None, &KrylovConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iters, 0);
        assert_eq!(x.norm2(), 0.0);
    }
}
