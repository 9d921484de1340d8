//! P1 assembly on the interior degrees of freedom.

use std::sync::OnceLock;

use faer::sparse::linalg::solvers::SymbolicLlt;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::Side;

use crate::error::{Error, Result};
use crate::geometry::quadrature::TriangleRule;
use crate::geometry::Mesh;

const NONE: usize = usize::MAX;

/// Square symmetric sparse matrix in compressed-column form with both
/// triangles stored.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    /// Entry `(i, j)`, zero when outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let col = &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]];
        match col.binary_search(&i) {
            Ok(k) => self.values[self.col_ptr[j] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (j, &xj) in x.iter().enumerate().take(self.dim) {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[k]] += self.values[k] * xj;
            }
        }
        y
    }

    /// `xᵀ M y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.apply(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self + alpha * other`; patterns must coincide.
    pub fn add_scaled(&self, alpha: f64, other: &SparseOperator) -> Result<SparseOperator> {
        if self.col_ptr != other.col_ptr || self.row_idx != other.row_idx {
            return Err(Error::InvalidArgument("operators have different sparsity patterns".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect();
        Ok(SparseOperator { values, ..self.clone() })
    }

    pub fn scaled(&self, alpha: f64) -> SparseOperator {
        SparseOperator { values: self.values.iter().map(|v| alpha * v).collect(), ..self.clone() }
    }

    /// Conjugation by a permutation: entry `(i, j)` moves to
    /// `(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> SparseOperator {
        let mut trip = Vec::with_capacity(self.values.len());
        for j in 0..self.dim {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                trip.push((perm[self.row_idx[k]], perm[j], self.values[k]));
            }
        }
        trip.sort_by_key(|&(i, j, _)| (j, i));
        let mut col_ptr = vec![0; self.dim + 1];
        for &(_, j, _) in &trip {
            col_ptr[j + 1] += 1;
        }
        for j in 0..self.dim {
            col_ptr[j + 1] += col_ptr[j];
        }
        SparseOperator {
            dim: self.dim,
            col_ptr,
            row_idx: trip.iter().map(|t| t.0).collect(),
            values: trip.iter().map(|t| t.2).collect(),
        }
    }

    pub(crate) fn to_faer(&self) -> SparseColMat<usize, f64> {
        let sym =
            SymbolicSparseColMat::new_checked(self.dim, self.dim, self.col_ptr.clone(), None, self.row_idx.clone());
        SparseColMat::new(sym, self.values.clone())
    }
}

/// P1 space with homogeneous Dirichlet conditions: interior nodes are the
/// unknowns, boundary nodes are eliminated.
pub struct FemSpace<'m> {
    mesh: &'m Mesh,
    free: Vec<usize>,
    dof_of: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// Position in the value array of local entry `(a, b)` of each
    /// triangle, or `NONE` when either node is a boundary node.
    scatter: Vec<[usize; 9]>,
    symbolic: OnceLock<std::result::Result<SymbolicLlt<usize>, String>>,
}

impl<'m> FemSpace<'m> {
    pub fn new(mesh: &'m Mesh) -> Result<Self> {
        let n = mesh.node_count();
        let mut dof_of = vec![NONE; n];
        let mut free = Vec::new();
        for (i, dof) in dof_of.iter_mut().enumerate() {
            if !mesh.is_boundary(i) {
                *dof = free.len();
                free.push(i);
            }
        }
        if free.is_empty() {
            return Err(Error::MeshFailure("mesh has no interior nodes".into()));
        }
        let m = free.len();
        let mut cols: Vec<Vec<usize>> = (0..m).map(|j| vec![j]).collect();
        for tri in mesh.triangles() {
            for &a in tri {
                for &b in tri {
                    let (da, db) = (dof_of[a], dof_of[b]);
                    if da != NONE && db != NONE && da != db {
                        cols[db].push(da);
                    }
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(m + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for c in cols.iter_mut() {
            c.sort_unstable();
            c.dedup();
            row_idx.extend_from_slice(c);
            col_ptr.push(row_idx.len());
        }
        let scatter = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [NONE; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        let (da, db) = (dof_of[tri[a]], dof_of[tri[b]]);
                        if da != NONE && db != NONE {
                            let col = &row_idx[col_ptr[db]..col_ptr[db + 1]];
                            s[3 * a + b] = col_ptr[db] + col.binary_search(&da).expect("pattern entry");
                        }
                    }
                }
                s
            })
            .collect();
        Ok(FemSpace { mesh, free, dof_of, col_ptr, row_idx, scatter, symbolic: OnceLock::new() })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Mesh node of each unknown.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    /// Unknown index of a mesh node, `None` on the boundary.
    pub fn dof(&self, node: usize) -> Option<usize> {
        let d = self.dof_of[node];
        (d != NONE).then_some(d)
    }

    /// Restriction of a nodal vector to the unknowns.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| nodal[i]).collect()
    }

    /// Nodal vector from unknowns, with `boundary` on boundary nodes.
    pub fn extend(&self, x: &[f64], boundary: f64) -> Vec<f64> {
        let mut out = vec![boundary; self.mesh.node_count()];
        for (k, &i) in self.free.iter().enumerate() {
            out[i] = x[k];
        }
        out
    }

    fn operator(&self, values: Vec<f64>) -> SparseOperator {
        SparseOperator { dim: self.dim(), col_ptr: self.col_ptr.clone(), row_idx: self.row_idx.clone(), values }
    }

    /// Stiffness matrix `∫ ∇φ_i·∇φ_j`.
    pub fn stiffness(&self) -> SparseOperator {
        let mut values = vec![0.0; self.row_idx.len()];
        for (t, s) in self.scatter.iter().enumerate() {
            let g = self.mesh.basis_gradients(t);
            let area = self.mesh.area(t);
            for a in 0..3 {
                for b in 0..3 {
                    if s[3 * a + b] != NONE {
                        values[s[3 * a + b]] += area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    }
                }
            }
        }
        self.operator(values)
    }

    /// Weighted mass matrix `∫ w φ_i φ_j`, with `w` given at the points of
    /// `rule` on each triangle (`weights[t * rule.len() + k]`).
    pub fn weighted_mass(&self, rule: TriangleRule, weights: &[f64]) -> SparseOperator {
        let nq = rule.weights.len();
        let mut values = vec![0.0; self.row_idx.len()];
        for (t, s) in self.scatter.iter().enumerate() {
            let area = self.mesh.area(t);
            let mut local = [0.0; 9];
            for (k, (bary, w)) in rule.points.iter().zip(rule.weights).enumerate() {
                let c = area * w * weights[t * nq + k];
                for a in 0..3 {
                    for b in 0..3 {
                        local[3 * a + b] += c * bary[a] * bary[b];
                    }
                }
            }
            for (pos, v) in s.iter().zip(local) {
                if *pos != NONE {
                    values[*pos] += v;
                }
            }
        }
        self.operator(values)
    }

    /// Load vector `∫ w φ_i` on the unknowns, weights as in
    /// [`FemSpace::weighted_mass`].
    pub fn load(&self, rule: TriangleRule, weights: &[f64]) -> Vec<f64> {
        let nq = rule.weights.len();
        let mut out = vec![0.0; self.dim()];
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let area = self.mesh.area(t);
            for (k, (bary, w)) in rule.points.iter().zip(rule.weights).enumerate() {
                let c = area * w * weights[t * nq + k];
                for a in 0..3 {
                    if let Some(d) = self.dof(tri[a]) {
                        out[d] += c * bary[a];
                    }
                }
            }
        }
        out
    }

    /// `−A_IB g`: the right-hand side contribution of Dirichlet data `g`
    /// given on all nodes (interior entries ignored).
    pub fn dirichlet_lift(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let grads = self.mesh.basis_gradients(t);
            let area = self.mesh.area(t);
            for a in 0..3 {
                let Some(da) = self.dof(tri[a]) else { continue };
                for b in 0..3 {
                    if self.mesh.is_boundary(tri[b]) {
                        let k = area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                        out[da] -= k * g[tri[b]];
                    }
                }
            }
        }
        out
    }

    /// Symbolic Cholesky analysis of the shared pattern, computed once.
    pub(crate) fn symbolic(&self) -> Result<SymbolicLlt<usize>> {
        self.symbolic
            .get_or_init(|| {
                let sym = SymbolicSparseColMat::new_checked(
                    self.dim(),
                    self.dim(),
                    self.col_ptr.clone(),
                    None,
                    self.row_idx.clone(),
                );
                SymbolicLlt::try_new(sym.as_ref(), Side::Lower).map_err(|e| format!("{e:?}"))
            })
            .clone()
            .map_err(Error::SingularSystem)
    }
}
