//! Preconditioned Chebyshev semi-iteration for operators whose
//! preconditioned spectrum is real and contained in a known interval.
//!
//! Stopping is on the unpreconditioned residual `‖c - A x‖`, which the
//! recurrence carries exactly (one operator application per step).

use num_complex::Complex64;

use crate::complex::{ComplexVector, LinearOperator};
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChebyshevConfig {
    pub interval_lo: f64,
    pub interval_hi: f64,
    /// Required reduction of the residual norm relative to the initial one.
    pub reduction: f64,
    pub max_iters: usize,
}

impl Default for ChebyshevConfig {
    fn default() -> Self {
        Self {
            interval_lo: 0.5,
            interval_hi: 1.0,
            reduction: 1e-2,
            max_iters: 20,
        }
    }
}

impl ChebyshevConfig {
    /// PRESB interval `[1/2, 1]` with the given reduction and the default
    /// cap of 20 iterations.
    pub fn presb(reduction: f64) -> Self {
        Self {
            reduction,
            ..Self::default()
        }
    }

    /// Settings used when an inner solve should be exact to rounding.
    pub fn exact() -> Self {
        Self {
            reduction: 1e-14,
            max_iters: 60,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.interval_lo > 0.0 && self.interval_lo < self.interval_hi) {
            return Err(Error::InvalidParameter(format!(
                "Chebyshev interval [{}, {}] must satisfy 0 < lo < hi",
                self.interval_lo, self.interval_hi
            )));
        }
        if !(self.reduction > 0.0 && self.reduction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "inner reduction {} must lie in (0, 1)",
                self.reduction
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Solves `A x = c` starting from `x0` with preconditioner `P`
/// (`P` applies the preconditioner inverse). Returns the iterate and the
/// number of completed three-term recurrence steps. The opening step
/// `x1 = x0 + P r0 / theta` starts the recurrence and is not counted, so a
/// return of 0 means that step alone met the reduction. Hitting `max_iters`
/// is a normal return.
pub fn cheb_solve<A: LinearOperator + ?Sized, P: LinearOperator + ?Sized>(
    a: &A,
    p: &P,
    c: &ComplexVector,
    cfg: &ChebyshevConfig,
    x0: &ComplexVector,
) -> Result<(ComplexVector, usize)> {
    cfg.validate()?;
    let n = a.dim();
    check_dim("cheb_solve operator/preconditioner", n, p.dim())?;
    check_dim("cheb_solve rhs", n, c.len())?;
    check_dim("cheb_solve initial guess", n, x0.len())?;

    let theta = 0.5 * (cfg.interval_hi + cfg.interval_lo);
    let delta = 0.5 * (cfg.interval_hi - cfg.interval_lo);
    let sigma = theta / delta;

    let mut x = x0.clone();
    let mut r = ComplexVector::zeros(n);
    a.apply_into(&x, &mut r);
    r.scale_add(-1.0, c, 1.0);
    let r0 = r.norm2();
    if r0 == 0.0 {
        return Ok((x, 0));
    }
    let target = cfg.reduction * r0;

    let mut z = ComplexVector::zeros(n);
    let mut ad = ComplexVector::zeros(n);
    p.apply_into(&r, &mut z);
    let mut d = z.clone();
    d.scale(Complex64::new(1.0 / theta, 0.0));
    let mut rho = 1.0 / sigma;

    let one = Complex64::new(1.0, 0.0);
    for k in 0..=cfg.max_iters {
        x.axpy(one, &d);
        a.apply_into(&d, &mut ad);
        r.axpy(-one, &ad);
        if r.norm2() <= target || k == cfg.max_iters {
            return Ok((x, k));
        }
        p.apply_into(&r, &mut z);
        let rho_next = 1.0 / (2.0 * sigma - rho);
        d.scale_add(rho_next * rho, &z, 2.0 * rho_next / delta);
        rho = rho_next;
    }
    unreachable!("loop returns at max_iters")
}
