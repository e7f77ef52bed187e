//! Fixtures shared by the criterion benchmarks.

use cxsplit::{example1, example2, ComplexVector, ProblemInstance};
use num_complex::Complex64;

/// Example 1 at `omega = 1`, the FGMRES workload.
pub fn vibration(m: usize) -> ProblemInstance {
    example1(m, 1.0).expect("valid grid")
}

/// Example 2 with `sigma1 = sigma2 = 100`, the plain GMRES workload.
pub fn helmholtz(m: usize) -> ProblemInstance {
    example2(m, 100.0, 100.0).expect("valid grid")
}

/// Deterministic dense right-hand side of length `n`.
pub fn rhs(n: usize) -> ComplexVector {
    let v: Vec<Complex64> = (0..n)
        .map(|j| {
            let t = j as f64;
            Complex64::new((0.37 * t).sin(), (0.11 * t).cos())
        })
        .collect();
    ComplexVector::from_complex(&v)
}
