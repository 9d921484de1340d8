//! Sparse direct solves with a cached symbolic analysis.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt};
use faer::{Mat, Side};

use super::operator::{FemSpace, SparseOperator};
use crate::error::{Error, Result};

enum Kind {
    Cholesky(Box<Llt<usize, f64>>),
    Lu(Box<Lu<usize, f64>>),
}

/// Factorization of a symmetric operator on a [`FemSpace`] pattern.
pub struct Factorization {
    dim: usize,
    kind: Kind,
}

pub(crate) fn sequential() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

impl Factorization {
    /// Cholesky when the operator is positive definite, otherwise LU.
    pub fn new(space: &FemSpace, op: &SparseOperator) -> Result<Self> {
        match Self::cholesky(space, op) {
            Ok(f) => Ok(f),
            Err(_) => Self::lu(op),
        }
    }

    /// Cholesky only; fails on indefinite operators.
    pub fn cholesky(space: &FemSpace, op: &SparseOperator) -> Result<Self> {
        sequential();
        let sym = space.symbolic()?;
        let mat = op.to_faer();
        let llt = Llt::try_new_with_symbolic(sym, mat.as_ref(), Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("cholesky: {e:?}")))?;
        Ok(Factorization { dim: op.dim(), kind: Kind::Cholesky(Box::new(llt)) })
    }

    /// Cholesky with a fresh symbolic analysis, for operators without a
    /// [`FemSpace`] at hand.
    pub fn cholesky_standalone(op: &SparseOperator) -> Result<Self> {
        sequential();
        let mat = op.to_faer();
        let sym = SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("cholesky analysis: {e:?}")))?;
        let llt = Llt::try_new_with_symbolic(sym, mat.as_ref(), Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("cholesky: {e:?}")))?;
        Ok(Factorization { dim: op.dim(), kind: Kind::Cholesky(Box::new(llt)) })
    }

    pub fn lu(op: &SparseOperator) -> Result<Self> {
        sequential();
        let lu = op.to_faer().sp_lu().map_err(|e| Error::SingularSystem(format!("lu: {e:?}")))?;
        Ok(Factorization { dim: op.dim(), kind: Kind::Lu(Box::new(lu)) })
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self.kind, Kind::Cholesky(_))
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut m = Mat::from_fn(self.dim, 1, |i, _| rhs[i]);
        self.solve_mat(&mut m);
        (0..self.dim).map(|i| m[(i, 0)]).collect()
    }

    /// In-place solve for every column of `m`.
    pub fn solve_mat(&self, m: &mut Mat<f64>) {
        match &self.kind {
            Kind::Cholesky(f) => f.solve_in_place(m.as_mut()),
            Kind::Lu(f) => f.solve_in_place(m.as_mut()),
        }
    }

    /// Solve followed by one step of iterative refinement against `op`.
    pub fn solve_refined(&self, op: &SparseOperator, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.solve(rhs);
        let ax = op.apply(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = self.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        x
    }
}

/// Relative residual `‖b − A x‖ / max(‖b‖, ‖A‖‖x‖)` in the max norm.
pub fn relative_residual(op: &SparseOperator, x: &[f64], b: &[f64]) -> f64 {
    let ax = op.apply(x);
    let r = ax.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let nb = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let nax = ax.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = nb.max(nax);
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}
