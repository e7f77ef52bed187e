//! Hatted norms `‖T^{-1/2} W T^{-1/2}‖`, the contraction bounds of the
//! splitting iterations, and power-iteration estimates of `ρ(B)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chebyshev::ChebyshevConfig;
use crate::cholesky::{factor, CholeskyFactor};
use crate::complex::ComplexVector;
use crate::error::{check_dim, Error, Result};
use crate::problems::ProblemInstance;
use crate::sparse::SparseReal;
use crate::splitting::{build_operators, SplittingOperators, SplittingScheme};

const MAX_POWER_ITERS: usize = 100_000;

/// Largest `|λ|` of `W x = λ T x`, by power iteration on `T^{-1} W` in the
/// `T` inner product. Stops when the Rayleigh quotient changes by less
/// than `tol` relative.
pub fn hatted_norm(w: &SparseReal, t: &SparseReal, tol: f64) -> Result<f64> {
    let tf = factor(t)?;
    hatted_norm_with(w, t, &tf, tol)
}

fn hatted_norm_with(w: &SparseReal, t: &SparseReal, tf: &CholeskyFactor, tol: f64) -> Result<f64> {
    let n = t.n_rows();
    check_dim("hatted_norm W order", n, w.n_rows())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} must be > 0"
        )));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut wx = vec![0.0; n];
    let mut tx = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut prev = f64::NAN;
    for _ in 0..MAX_POWER_ITERS {
        w.spmv_into(&x, &mut wx);
        t.spmv_into(&x, &mut tx);
        let xtx = dot(&x, &tx);
        let rq = dot(&x, &wx) / xtx;
        if (rq.abs() - prev.abs()).abs() <= tol * rq.abs() {
            return Ok(rq.abs());
        }
        prev = rq;
        let mut y = vec![0.0; n];
        tf.solve_into(&wx, &mut y, &mut work);
        t.spmv_into(&y, &mut tx);
        let ny = dot(&y, &tx).sqrt();
        if ny == 0.0 {
            return Ok(0.0);
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    Ok(prev.abs())
}

/// Contraction bound for Methods I and II.
pub fn bound_eq4(nw1: f64, nw2: f64) -> f64 {
    (1.0 / (1.0 + nw1.powi(-2)) / (1.0 + nw2.powi(-2))).sqrt()
}

/// Contraction bound for Method III with parameter `alpha`.
pub fn bound_method3(nw1: f64, nw2: f64, alpha: f64) -> f64 {
    let f = |nw: f64| (((alpha - 1.0).powi(2) + nw * nw) / (alpha * alpha + nw * nw)).sqrt();
    f(nw2) * f(nw1)
}

/// Minimizer of the single-factor Method III bound
/// `1 - (2α-1)/(α²+nw2²)`, the positive root of `α² - α - nw2² = 0`.
/// For large `nw2` this is `nw2 + 1/2 + O(1/nw2)`.
pub fn alpha_opt(nw2: f64) -> f64 {
    0.5 + (0.25 + nw2 * nw2).sqrt()
}

/// Norm in which one sweep is a contraction bounded by the closed-form
/// bound: `‖T^{-1/2} S x‖` with `S = W2` (Methods I, II) or
/// `S = (α-1)T + iW1` (Method III). Euclidean when `S` may be singular
/// and for SNSS.
enum SweepNorm {
    Euclid,
    Similar {
        t: SparseReal,
        tf: CholeskyFactor,
        shift: f64,
        re: SparseReal,
        im: SparseReal,
    },
}

impl SweepNorm {
    fn for_ops(ops: &SplittingOperators<'_>) -> Result<Self> {
        let p = ops.problem();
        let spd = |a: &SparseReal| factor(a).is_ok();
        let tf = || factor(&p.t);
        let zero = SparseReal::from_triplets(p.n, p.n, &[])?;
        Ok(match ops.scheme() {
            SplittingScheme::MethodI | SplittingScheme::MethodII if spd(&p.w2) => {
                SweepNorm::Similar {
                    t: p.t.clone(),
                    tf: tf()?,
                    shift: 0.0,
                    re: p.w2.clone(),
                    im: zero,
                }
            }
            SplittingScheme::MethodIII { alpha } if alpha > 1.0 || spd(&p.w1) => {
                SweepNorm::Similar {
                    t: p.t.clone(),
                    tf: tf()?,
                    shift: alpha - 1.0,
                    re: zero,
                    im: p.w1.clone(),
                }
            }
            _ => SweepNorm::Euclid,
        })
    }

    fn norm(&self, x: &ComplexVector) -> f64 {
        match self {
            SweepNorm::Euclid => x.norm2(),
            SweepNorm::Similar {
                t,
                tf,
                shift,
                re,
                im,
            } => {
                let n = x.len();
                // s = (shift T + re + i im) x
                let mut s = ComplexVector::zeros(n);
                re.spmv_into(&x.re, &mut s.re);
                re.spmv_into(&x.im, &mut s.im);
                im.spmv_acc(-1.0, &x.im, &mut s.re);
                im.spmv_acc(1.0, &x.re, &mut s.im);
                t.spmv_acc(*shift, &x.re, &mut s.re);
                t.spmv_acc(*shift, &x.im, &mut s.im);
                let mut work = vec![0.0; n];
                let mut u = vec![0.0; n];
                let mut q = 0.0;
                for part in [&s.re, &s.im] {
                    tf.solve_into(part, &mut u, &mut work);
                    q += part.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
                }
                q.max(0.0).sqrt()
            }
        }
    }
}

/// Estimate of `ρ(B)` for the homogeneous sweep `x -> B x` (zero source,
/// inner solves to rounding). Each restart runs `iters` power steps from a
/// seeded random start and takes the geometric mean growth over the second
/// half; the maximum over restarts is returned.
pub fn contraction_estimate(
    ops: &SplittingOperators<'_>,
    restarts: usize,
    iters: usize,
) -> Result<f64> {
    contraction_estimate_seeded(ops, restarts, iters, 0)
}

/// [`contraction_estimate`] with the random starts drawn from `seed`.
pub fn contraction_estimate_seeded(
    ops: &SplittingOperators<'_>,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<f64> {
    if restarts == 0 || iters == 0 {
        return Err(Error::InvalidParameter(
            "restarts and iters must be >= 1".into(),
        ));
    }
    let n = ops.dim();
    let cfg = ChebyshevConfig {
        max_iters: 200,
        ..ChebyshevConfig::exact()
    };
    let norm = SweepNorm::for_ops(ops)?;
    let zero = ComplexVector::zeros(n);
    let tail = (iters / 2).max(1);
    let mut best = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let mut x = ComplexVector::from_complex(
            &(0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect::<Vec<_>>(),
        );
        let nx = norm.norm(&x);
        x.scale(Complex64::new(1.0 / nx, 0.0));
        let mut log_growth = 0.0;
        let mut died = false;
        for k in 0..iters {
            let y = ops.sweep(&x, &zero, &cfg)?;
            let ny = norm.norm(&y);
            if ny == 0.0 || !ny.is_finite() {
                died = true;
                break;
            }
            if k >= iters - tail {
                log_growth += ny.ln();
            }
            x = y.scaled(Complex64::new(1.0 / ny, 0.0));
        }
        if !died {
            best = best.max((log_growth / tail as f64).exp());
        }
    }
    Ok(best)
}

/// Spectral summary of a problem, optionally with a `ρ(B)` estimate for
/// one scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEstimates {
    pub what_norm_1: f64,
    pub what_norm_2: f64,
    pub rho_b_estimate: Option<f64>,
    pub bound_eq4: f64,
    pub bound_method3: Vec<(f64, f64)>,
    pub alpha_opt: f64,
}

impl SpectralEstimates {
    /// `key=value` lines, one per quantity.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("what_norm_1={:.6e}\n", self.what_norm_1));
        out.push_str(&format!("what_norm_2={:.6e}\n", self.what_norm_2));
        if let Some(r) = self.rho_b_estimate {
            out.push_str(&format!("rho_B_estimate={r:.6e}\n"));
        }
        out.push_str(&format!("bound_eq4={:.6e}\n", self.bound_eq4));
        for (a, b) in &self.bound_method3 {
            out.push_str(&format!("bound_method3[alpha={a}]={b:.6e}\n"));
        }
        out.push_str(&format!("alpha_opt={:.6e}\n", self.alpha_opt));
        out
    }
}

/// Hatted norms and bounds for `p`. When `scheme` is given, also estimates
/// `ρ(B)` for it (intended for `n` up to about `10^4`), with random
/// starts drawn from `seed`.
pub fn spectral_estimates(
    p: &ProblemInstance,
    scheme: Option<SplittingScheme>,
    alphas: &[f64],
    seed: u64,
) -> Result<SpectralEstimates> {
    let tf = factor(&p.t)?;
    let nw1 = hatted_norm_with(&p.w1, &p.t, &tf, 1e-10)?;
    let nw2 = hatted_norm_with(&p.w2, &p.t, &tf, 1e-10)?;
    let aopt = alpha_opt(nw2);
    let mut list: Vec<f64> = alphas.to_vec();
    if !list.contains(&aopt) {
        list.push(aopt);
    }
    let rho = match scheme {
        Some(s) => {
            let ops = build_operators(p, s, ChebyshevConfig::exact())?;
            Some(contraction_estimate_seeded(&ops, 3, 60, seed)?)
        }
        None => None,
    };
    Ok(SpectralEstimates {
        what_norm_1: nw1,
        what_norm_2: nw2,
        rho_b_estimate: rho,
        bound_eq4: bound_eq4(nw1, nw2),
        bound_method3: list
            .into_iter()
            .map(|a| (a, bound_method3(nw1, nw2, a)))
            .collect(),
        alpha_opt: aopt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{DenseComplex, DenseReal};
    use crate::problems::{example1, example2};
    use crate::splitting::tests::random_triple;

    /// `L^{-1} W L^{-T}` with `T = L L^T`, unitarily similar to the hatted matrix.
    fn dense_hat(w: &SparseReal, l: &DenseReal) -> DenseComplex {
        let linv = DenseComplex::from_real(l).inverse().unwrap();
        linv.matmul(&DenseComplex::from_real(&w.to_dense()))
            .matmul(&linv.adjoint())
    }

    #[test]
    fn hatted_norm_examples() {
        let t = SparseReal::tridiag(5, -1.0, 4.0, -1.0);
        assert!((hatted_norm(&t.scale(3.0), &t, 1e-12).unwrap() - 3.0).abs() < 1e-12);
        let v = hatted_norm(
            &SparseReal::identity(2),
            &SparseReal::from_diagonal(&[1.0, 4.0]),
            1e-12,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let p = example2(8, 1000.0, 10.0).unwrap();
        assert!((hatted_norm(&p.w2, &p.t, 1e-12).unwrap() - 100.0).abs() < 1e-9);
        let bad = SparseReal::from_diagonal(&[1.0, -1.0]);
        assert!(hatted_norm(&bad, &bad, 1e-8).is_err());
    }

    #[test]
    fn hatted_norm_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let p = random_triple(&mut rng, 10);
            let l = p.t.to_dense().cholesky().unwrap();
            for w in [&p.w1, &p.w2] {
                let want = dense_hat(w, &l).norm2(3000);
                let got = hatted_norm(w, &p.t, 1e-13).unwrap();
                assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn bound_formulas() {
        assert!((bound_eq4(1.0, 1.0) - 0.5).abs() < 1e-15);
        assert!(bound_eq4(5.0, 1e-6) < 1e-5);
        assert!(bound_eq4(1.0, 1e6) <= 1.0 / 2f64.sqrt() + 1e-15);
        assert!(bound_eq4(0.3, 7.0) <= 1.0 / 2f64.sqrt());
        assert!(bound_eq4(1e4, 1e4) < 1.0);
        let v = bound_method3(10.0, 10.0, 10.0);
        assert!((v - 181.0 / 200.0).abs() < 1e-14);
        assert!((v - 0.905).abs() < 1e-12);
        assert!((bound_method3(3.0, 0.2, 1.0) - bound_eq4(3.0, 0.2)).abs() < 1e-14);
    }

    #[test]
    fn alpha_opt_values() {
        assert_eq!(alpha_opt(0.0), 1.0);
        assert!((alpha_opt(100.0) - 100.5025).abs() < 2e-3);
        // local minimum of the single-factor bound 1 - (2α-1)/(α²+nw²)
        for nw in [0.0, 0.7, 3.0, 100.0] {
            let f = |a: f64| 1.0 - (2.0 * a - 1.0) / (a * a + nw * nw);
            let a = alpha_opt(nw);
            assert!(a >= 1.0);
            assert!(f(a + 0.01) >= f(a) && f(a - 0.01) >= f(a));
        }
    }

    #[test]
    fn sweep_map_is_linear() {
        let p = example2(6, 100.0, 10.0).unwrap();
        let ops = build_operators(&p, SplittingScheme::MethodI, ChebyshevConfig::exact()).unwrap();
        let zero = ComplexVector::zeros(p.n);
        let cfg = ChebyshevConfig::exact();
        let x = p.b.clone();
        let y = p.x_exact.clone().unwrap();
        let lhs = ops.sweep(&x.add(&y), &zero, &cfg).unwrap();
        let rhs = ops
            .sweep(&x, &zero, &cfg)
            .unwrap()
            .add(&ops.sweep(&y, &zero, &cfg).unwrap());
        assert!(lhs.sub(&rhs).norm2() <= 1e-12 * rhs.norm2());
    }

    #[test]
    fn estimate_below_dense_similarity_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let i = Complex64::new(0.0, 1.0);
        for _ in 0..3 {
            let p = random_triple(&mut rng, 8);
            let l = p.t.to_dense().cholesky().unwrap();
            let (w1, w2) = (dense_hat(&p.w1, &l), dense_hat(&p.w2, &l));
            let id = DenseComplex::identity(8);
            // similar to L^{-1} W2 B W2^{-1} L: W2h (W2h - i)^{-1} W1h (W1h + i)^{-1}
            let bhat = w2
                .matmul(&w2.sub(&id.scale(i)).inverse().unwrap())
                .matmul(&w1)
                .matmul(&w1.add(&id.scale(i)).inverse().unwrap());
            let oracle = bhat.norm2(3000);
            let ops =
                build_operators(&p, SplittingScheme::MethodI, ChebyshevConfig::exact()).unwrap();
            let est = contraction_estimate(&ops, 2, 80).unwrap();
            assert!(est <= oracle + 1e-6, "{est} > {oracle}");
            assert!(est < 1.0);
        }
    }

    #[test]
    fn example_estimates_below_bounds() {
        let problems = [example2(8, 100.0, 10.0).unwrap(), example1(8, 1.0).unwrap()];
        for p in &problems {
            let nw1 = hatted_norm(&p.w1, &p.t, 1e-12).unwrap();
            let nw2 = hatted_norm(&p.w2, &p.t, 1e-12).unwrap();
            for s in [SplittingScheme::MethodI, SplittingScheme::MethodII] {
                let ops = build_operators(p, s, ChebyshevConfig::exact()).unwrap();
                let est = contraction_estimate(&ops, 2, 60).unwrap();
                assert!(
                    est < 1.0 && est <= bound_eq4(nw1, nw2) + 1e-6,
                    "{} {s}: {est}",
                    p.name
                );
            }
            for alpha in [1.0, 2.0, 5.0, alpha_opt(nw2)] {
                let ops = build_operators(
                    p,
                    SplittingScheme::MethodIII { alpha },
                    ChebyshevConfig::exact(),
                )
                .unwrap();
                let est = contraction_estimate(&ops, 2, 60).unwrap();
                assert!(
                    est <= bound_method3(nw1, nw2, alpha) + 1e-6,
                    "{} alpha={alpha}: {est}",
                    p.name
                );
            }
        }
    }

    #[test]
    fn estimates_report() {
        let p = example2(6, 1000.0, 10.0).unwrap();
        let e = spectral_estimates(&p, Some(SplittingScheme::MethodI), &[1.0, 100.0], 7).unwrap();
        assert!((e.what_norm_2 - 100.0).abs() < 1e-8);
        assert!(e.rho_b_estimate.unwrap() <= e.bound_eq4 + 1e-6);
        assert_eq!(e.bound_method3.len(), 3);
        let kv = e.to_key_values();
        assert!(kv.contains("alpha_opt="));
        assert!(kv.lines().all(|l| l.contains('=')));
    }
}
