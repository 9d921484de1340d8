//! P1 finite elements for the Dirichlet Laplacian: assembly, direct
//! solves, the Robin function, and weighted eigenproblems.

mod eigen;
mod green;
mod operator;
mod solver;

pub use eigen::{eig_smallest, eig_smallest_rank_one, EigenPair, EIGEN_TOLERANCE};
pub use green::{
    green_regular, interpolate_at_rule, log_kernel, robin_field, solve_dirichlet, DirichletSolver, HarmonicExpansion,
    RobinData, SOLVE_TOLERANCE,
};
pub use operator::{FemSpace, SparseOperator};
pub use solver::{relative_residual, Factorization};
