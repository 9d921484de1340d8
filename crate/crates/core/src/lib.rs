//! Numerical laboratory for the mean field equation
//! `Δu + ρ h e^u / ∫ h e^u = 0` with zero Dirichlet data on planar domains,
//! possibly multiply connected.
//!
//! The crate computes Robin functions and the regularized singular
//! integral that decides solvability at `ρ = 8π`, follows the branch of
//! minimizers up to `8π` with blow-up diagnostics, checks the Bol
//! isoperimetric inequality on level sets, and derives the
//! canonical/microcanonical thermodynamics of the branch.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bol_symm;
pub mod ensembles;
pub mod error;
pub mod geometry;
pub mod laplace;
pub mod mfe_solver;
pub mod robin_dcrit;

pub use error::{Error, Result};
