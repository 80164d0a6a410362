//! Sparse symmetric linear algebra: CSR storage, Krylov solvers and
//! shift-invert eigenvalue estimates for the stiffness/mass pencil.

mod eigen;
mod krylov;
mod sparse;

pub use eigen::{
    eigenpairs_near, resonance_guard, smallest_eigenpair, Eigenpair, GuardReport, LanczosOptions,
};
pub use krylov::{
    default_max_iter, gmres, solve_spd, solve_sym, solve_sym_best_effort, SolveStats, DEFAULT_TOL,
};
pub use sparse::{axpy, csr_from_triplets, dot, norm, SparseSym};
