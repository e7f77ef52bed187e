//! Splitting iterations and preconditioners for complex symmetric systems
//! `(W1 - W2 + iT) x = b` with real symmetric `W1`, `W2` and SPD `T`.

pub mod chebyshev;
pub mod cholesky;
pub mod complex;
pub mod dense;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod mm;
pub mod ordering;
pub mod presb;
pub mod problems;
pub mod sparse;
pub mod spectral;
pub mod splitting;

pub use chebyshev::{cheb_solve, ChebyshevConfig};
pub use cholesky::{factor, CholeskyFactor};
pub use complex::{ComplexMatrix, ComplexVector, LinearOperator};
pub use error::{Error, Result};
pub use harness::{
    chebyshev_census, emit_table, run_experiment, CellStatus, ExperimentSpec, MethodKind,
    MethodSpec, ProblemSpec, Row, TableFormat,
};
pub use krylov::{evaluate_solution, gmres_solve, KrylovConfig, KrylovFlavor, SolveReport};
pub use presb::{presb_spectrum_probe, PresbOperator};
pub use problems::{example1, example2, example3, load_problem, load_problem_dir, ProblemInstance};
pub use sparse::{kron_sum, SparseReal};
pub use spectral::{
    alpha_opt, bound_eq4, bound_method3, contraction_estimate, contraction_estimate_seeded,
    hatted_norm, spectral_estimates, SpectralEstimates,
};
pub use splitting::{
    build_operators, SplittingOperators, SplittingScheme, Subsystem, SubsystemSolver,
};
