//! Sparse compressed-row matrices over real and complex scalars, the
//! iterative solvers used by the two per-step linear systems, and a dense
//! LU fallback small enough to serve as an oracle.

mod csr;
mod dense;
mod solvers;

pub use csr::{write_matrix_market, write_matrix_market_complex, CsrMatrix, SparsityPattern};
pub use dense::{lu_solve_complex, lu_solve_real};
pub use solvers::{solve_complex, solve_spd, SolveError, SolveOpts, SolveReport};
