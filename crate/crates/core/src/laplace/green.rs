//! Dirichlet solves, the regular part of the Green's function, and the
//! Robin function.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::operator::{FemSpace, SparseOperator};
use super::solver::{relative_residual, Factorization};
use crate::error::{Error, Result};
use crate::geometry::quadrature::TriangleRule;
use crate::geometry::{dist, Mesh, Point, ScalarField};

/// Required relative algebraic residual of every linear solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Reusable Dirichlet Laplace solver on one mesh.
pub struct DirichletSolver<'m> {
    space: FemSpace<'m>,
    stiffness: SparseOperator,
    factor: Factorization,
    boundary_nodes: Vec<usize>,
}

impl<'m> DirichletSolver<'m> {
    pub fn new(mesh: &'m Mesh) -> Result<Self> {
        let space = FemSpace::new(mesh)?;
        let stiffness = space.stiffness();
        let factor = Factorization::new(&space, &stiffness)?;
        let boundary_nodes = (0..mesh.node_count()).filter(|&i| mesh.is_boundary(i)).collect();
        Ok(DirichletSolver { space, stiffness, factor, boundary_nodes })
    }

    pub fn space(&self) -> &FemSpace<'m> {
        &self.space
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.space.mesh()
    }

    pub fn stiffness(&self) -> &SparseOperator {
        &self.stiffness
    }

    pub fn factor(&self) -> &Factorization {
        &self.factor
    }

    /// Solves `−Δu = f` with `u = g` on the boundary. `rhs` holds nodal
    /// values of `f`; `boundary` holds `g` on every node (interior entries
    /// are ignored).
    pub fn solve(&self, rhs: Option<&[f64]>, boundary: &[f64]) -> Result<ScalarField> {
        let mesh = self.mesh();
        if boundary.len() != mesh.node_count() {
            return Err(Error::InvalidArgument("boundary data length differs from node count".into()));
        }
        if let Some(&bad) = self.boundary_nodes.iter().find(|&&i| !boundary[i].is_finite()) {
            let p = mesh.nodes()[bad];
            return Err(Error::NonFiniteIntegrand { x: p[0], y: p[1] });
        }
        let mut b = self.space.dirichlet_lift(boundary);
        if let Some(f) = rhs {
            let rule = TriangleRule::DEGREE2;
            let w = interpolate_at_rule(mesh, rule, f);
            for (bi, li) in b.iter_mut().zip(self.space.load(rule, &w)) {
                *bi += li;
            }
        }
        let mut x = self.factor.solve(&b);
        if relative_residual(&self.stiffness, &x, &b) > SOLVE_TOLERANCE {
            x = self.factor.solve_refined(&self.stiffness, &b);
        }
        let res = relative_residual(&self.stiffness, &x, &b);
        if !(res <= SOLVE_TOLERANCE) {
            return Err(Error::SingularSystem(format!("residual {res:e} after refinement")));
        }
        let mut out = self.space.extend(&x, 0.0);
        for &i in &self.boundary_nodes {
            out[i] = boundary[i];
        }
        ScalarField::new(mesh, out)
    }

    /// Distance from `q` to the nearest boundary node.
    pub fn boundary_distance(&self, q: Point) -> f64 {
        let nodes = self.mesh().nodes();
        self.boundary_nodes.iter().map(|&i| dist(nodes[i], q)).fold(f64::INFINITY, f64::min)
    }

    /// Regular part `G̃(·, q)` of the Dirichlet Green's function.
    pub fn green_regular(&self, q: Point) -> Result<RobinData> {
        let mesh = self.mesh();
        let required = 2.0 * mesh.target_h();
        let d = self.boundary_distance(q);
        if !(d > required) || mesh.locate(q).is_none() {
            return Err(Error::SourceTooCloseToBoundary { distance: d, required });
        }
        let g: Vec<f64> = mesh.nodes().iter().map(|&x| log_kernel(x, q)).collect();
        let field = self.solve(None, &g)?;
        let gamma_q = mesh.interpolate(field.values(), q).expect("located above");
        Ok(RobinData { q, field, gamma_q })
    }

    /// `γ` at each sample point.
    pub fn robin_field(&self, points: &[Point]) -> Result<Vec<(Point, f64)>> {
        points.iter().map(|&p| self.green_regular(p).map(|r| (p, r.gamma_q))).collect()
    }
}

/// `(1/2π) log|x − q|`.
pub fn log_kernel(x: Point, q: Point) -> f64 {
    dist(x, q).ln() / (2.0 * PI)
}

/// P1 interpolant of nodal `values` at the points of `rule`, laid out
/// triangle by triangle.
pub fn interpolate_at_rule(mesh: &Mesh, rule: TriangleRule, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(mesh.triangles().len() * rule.weights.len());
    for tri in mesh.triangles() {
        for b in rule.points {
            out.push(b[0] * values[tri[0]] + b[1] * values[tri[1]] + b[2] * values[tri[2]]);
        }
    }
    out
}

/// Solves `−Δu = f`, `u = g` on the boundary, in one call.
pub fn solve_dirichlet(mesh: &Mesh, rhs: Option<&ScalarField>, boundary: &[f64]) -> Result<ScalarField> {
    DirichletSolver::new(mesh)?.solve(rhs.map(|f| f.values()), boundary)
}

/// Regular part of the Green's function with source `q`.
pub fn green_regular(mesh: &Mesh, q: Point) -> Result<RobinData> {
    DirichletSolver::new(mesh)?.green_regular(q)
}

/// Robin function at each sample point, sharing one factorization.
pub fn robin_field(mesh: &Mesh, points: &[Point]) -> Result<Vec<(Point, f64)>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    DirichletSolver::new(mesh)?.robin_field(points)
}

/// `G̃(·, q)` on the mesh together with `γ(q)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobinData {
    pub q: Point,
    pub field: ScalarField,
    pub gamma_q: f64,
}

impl RobinData {
    /// Mean of the field over the circle of radius `r` about `q`. The
    /// regular part is harmonic, so this equals `γ(q)` in the continuum
    /// and varies smoothly with `q` on the mesh.
    pub fn circle_mean(&self, mesh: &Mesh, r: f64, samples: usize) -> Option<f64> {
        let mut s = 0.0;
        for k in 0..samples {
            let th = 2.0 * PI * (k as f64 + 0.5) / samples as f64;
            s += mesh.interpolate(self.field.values(), [self.q[0] + r * th.cos(), self.q[1] + r * th.sin()])?;
        }
        Some(s / samples as f64)
    }
}

/// Real harmonic polynomial `c₀ + Σ_k a_k Re z^k + b_k Im z^k` with
/// `z = (x − center)/scale`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarmonicExpansion {
    pub center: Point,
    pub scale: f64,
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl HarmonicExpansion {
    /// Least-squares fit of nodal values on all nodes within `radius`.
    pub fn fit(mesh: &Mesh, values: &[f64], center: Point, radius: f64, order: usize) -> Result<Self> {
        let pts: Vec<usize> = (0..mesh.node_count()).filter(|&i| dist(mesh.nodes()[i], center) <= radius).collect();
        let cols = 1 + 2 * order;
        if pts.len() < 3 * cols {
            return Err(Error::InvalidArgument(format!(
                "harmonic fit needs {} nodes within radius {radius}, found {}",
                3 * cols,
                pts.len()
            )));
        }
        let mut a = DMatrix::zeros(pts.len(), cols);
        let mut rhs = DVector::zeros(pts.len());
        for (r, &i) in pts.iter().enumerate() {
            let p = mesh.nodes()[i];
            let z = [(p[0] - center[0]) / radius, (p[1] - center[1]) / radius];
            a[(r, 0)] = 1.0;
            let mut zk = [1.0, 0.0];
            for k in 0..order {
                zk = [zk[0] * z[0] - zk[1] * z[1], zk[0] * z[1] + zk[1] * z[0]];
                a[(r, 1 + 2 * k)] = zk[0];
                a[(r, 2 + 2 * k)] = zk[1];
            }
            rhs[r] = values[i];
        }
        let svd = a.svd(true, true);
        let c = svd.solve(&rhs, 1e-12).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(HarmonicExpansion {
            center,
            scale: radius,
            constant: c[0],
            cos: (0..order).map(|k| c[1 + 2 * k]).collect(),
            sin: (0..order).map(|k| c[2 + 2 * k]).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.cos.len()
    }

    pub fn eval(&self, p: Point) -> f64 {
        let z = [(p[0] - self.center[0]) / self.scale, (p[1] - self.center[1]) / self.scale];
        let mut zk = [1.0, 0.0];
        let mut s = self.constant;
        for k in 0..self.order() {
            zk = [zk[0] * z[0] - zk[1] * z[1], zk[0] * z[1] + zk[1] * z[0]];
            s += self.cos[k] * zk[0] + self.sin[k] * zk[1];
        }
        s
    }

    /// Gradient at `p`: with `F = Σ (a_k − i b_k) z^k`, `∇f = (Re F′, −Im F′)`.
    pub fn gradient(&self, p: Point) -> [f64; 2] {
        let z = [(p[0] - self.center[0]) / self.scale, (p[1] - self.center[1]) / self.scale];
        let mut zk = [1.0, 0.0];
        let mut d = [0.0, 0.0];
        for k in 0..self.order() {
            let c = [(k + 1) as f64 * self.cos[k], -((k + 1) as f64) * self.sin[k]];
            d[0] += c[0] * zk[0] - c[1] * zk[1];
            d[1] += c[0] * zk[1] + c[1] * zk[0];
            zk = [zk[0] * z[0] - zk[1] * z[1], zk[0] * z[1] + zk[1] * z[0]];
        }
        [d[0] / self.scale, -d[1] / self.scale]
    }

    /// Gradient at the center.
    pub fn gradient_at_center(&self) -> [f64; 2] {
        match self.order() {
            0 => [0.0, 0.0],
            _ => [self.cos[0] / self.scale, self.sin[0] / self.scale],
        }
    }

    /// Hessian at the center: `[[2a, 2b], [2b, −2a]] / scale²`.
    pub fn hessian_at_center(&self) -> [[f64; 2]; 2] {
        if self.order() < 2 {
            return [[0.0; 2]; 2];
        }
        let s2 = self.scale * self.scale;
        let (a, b) = (self.cos[1], self.sin[1]);
        [[2.0 * a / s2, 2.0 * b / s2], [2.0 * b / s2, -2.0 * a / s2]]
    }
}
