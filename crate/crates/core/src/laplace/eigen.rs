//! Smallest eigenpairs of the weighted problem `(A − B)ψ = λ Bψ`.

use faer::Mat;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operator::SparseOperator;
use super::solver::Factorization;
use crate::error::{Error, Result};

pub const EIGEN_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 2000;

/// One eigenpair; the vector is normalized so that `ψᵀBψ = 1`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// The `k` algebraically smallest eigenvalues of `(A − B)ψ = λBψ`, found
/// by inverse subspace iteration on `Aψ = (1 + λ)Bψ` with Rayleigh–Ritz
/// projection. `A` must be positive definite.
pub fn eig_smallest(a: &SparseOperator, b: &SparseOperator, k: usize) -> Result<Vec<EigenPair>> {
    eig_smallest_rank_one(a, b, None, k)
}

/// As [`eig_smallest`] with `A` replaced by `A + σ wwᵀ`, `σ ≥ 0`, given as
/// `Some((σ, w))`.
pub fn eig_smallest_rank_one(
    a: &SparseOperator,
    b: &SparseOperator,
    update: Option<(f64, &[f64])>,
    k: usize,
) -> Result<Vec<EigenPair>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::InvalidArgument("operator dimensions differ".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of a {n}-dimensional problem")));
    }
    let op = Augmented::new(a, update)?;
    let p = (k + 5).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let mut last_res = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mut m = Mat::<f64>::zeros(n, p);
        for (j, xj) in x.iter().enumerate() {
            let bx = b.apply(xj);
            for i in 0..n {
                m[(i, j)] = bx[i];
            }
        }
        op.solve_mat(&mut m);
        let y: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
        let (mu, coeffs) = rayleigh_ritz(&op, b, &y)?;
        x = (0..p)
            .map(|c| {
                let mut v = vec![0.0; n];
                for (j, yj) in y.iter().enumerate() {
                    let w = coeffs[(j, c)];
                    for i in 0..n {
                        v[i] += w * yj[i];
                    }
                }
                v
            })
            .collect();
        let res: Vec<f64> = (0..k).map(|c| residual(&op, b, mu[c], &x[c])).collect();
        last_res = res.iter().copied().fold(0.0, f64::max);
        if last_res <= EIGEN_TOLERANCE {
            return Ok((0..k)
                .map(|c| EigenPair { value: mu[c] - 1.0, vector: x[c].clone(), residual: res[c] })
                .collect());
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: last_res })
}

/// `A + σ wwᵀ` with solves by Sherman–Morrison.
struct Augmented<'a> {
    a: &'a SparseOperator,
    factor: Factorization,
    update: Option<(f64, Vec<f64>, Vec<f64>, f64)>,
}

impl<'a> Augmented<'a> {
    fn new(a: &'a SparseOperator, update: Option<(f64, &[f64])>) -> Result<Self> {
        let factor = Factorization::cholesky_standalone(a)?;
        let update = match update {
            Some((sigma, w)) if sigma != 0.0 => {
                if !(sigma > 0.0) || w.len() != a.dim() {
                    return Err(Error::InvalidArgument("rank-one update must be positive and match A".into()));
                }
                let ainv_w = factor.solve(w);
                let denom = 1.0 + sigma * dot(w, &ainv_w);
                Some((sigma, w.to_vec(), ainv_w, denom))
            }
            _ => None,
        };
        Ok(Augmented { a, factor, update })
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut av = self.a.apply(v);
        if let Some((sigma, w, _, _)) = &self.update {
            let c = sigma * dot(w, v);
            for (x, wi) in av.iter_mut().zip(w) {
                *x += c * wi;
            }
        }
        av
    }

    fn solve_mat(&self, m: &mut Mat<f64>) {
        self.factor.solve_mat(m);
        if let Some((sigma, w, ainv_w, denom)) = &self.update {
            for j in 0..m.ncols() {
                let c = sigma * (0..m.nrows()).map(|i| w[i] * m[(i, j)]).sum::<f64>() / denom;
                for i in 0..m.nrows() {
                    m[(i, j)] -= c * ainv_w[i];
                }
            }
        }
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `‖Aψ − μBψ‖ / ‖Aψ‖`.
fn residual(a: &Augmented, b: &SparseOperator, mu: f64, v: &[f64]) -> f64 {
    let av = a.apply(v);
    let bv = b.apply(v);
    let num: f64 = av.iter().zip(&bv).map(|(x, y)| (x - mu * y).powi(2)).sum();
    let den: f64 = av.iter().map(|x| x * x).sum();
    (num / den).sqrt()
}

/// Ritz values (ascending) and coefficient matrix whose columns are
/// B-orthonormal combinations of `y`.
fn rayleigh_ritz(a: &Augmented, b: &SparseOperator, y: &[Vec<f64>]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let p = y.len();
    let ay: Vec<Vec<f64>> = y.iter().map(|v| a.apply(v)).collect();
    let by: Vec<Vec<f64>> = y.iter().map(|v| b.apply(v)).collect();
    let ka = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
    let kb = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &by[j]) + dot(&y[j], &by[i])));
    let chol =
        kb.cholesky().ok_or_else(|| Error::SingularSystem("weighted Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| Error::SingularSystem("singular Gram factor".into()))?;
    let c = &linv * &ka * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let mu = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
    let coeffs = linv.transpose() * vecs;
    Ok((mu, coeffs))
}
