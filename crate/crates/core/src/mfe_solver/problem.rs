//! The discrete functional `I_ρ(u) = ½uᵀAu − ρ log Z(u)`, with
//! `Z(u) = ∫ h e^{u_h}` by a fixed triangle rule on the P1 interpolant.

use crate::error::{Error, Result};
use crate::geometry::quadrature::{CompensatedSum, TriangleRule};
use crate::geometry::{Mesh, ScalarField};
use crate::laplace::{FemSpace, SparseOperator};
use crate::robin_dcrit::WeightSpec;

/// Rule used for every integral of `h e^u`.
pub const RULE: TriangleRule = TriangleRule::DEGREE5;

/// Largest `u` accepted before declaring overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Mesh-level data shared by all evaluations.
pub struct MfeProblem<'m> {
    space: FemSpace<'m>,
    stiffness: SparseOperator,
    log_h: Vec<f64>,
}

/// Quantities of `h e^{u}` at one iterate. Integrals are stored relative
/// to `e^{shift}` to avoid overflow.
pub struct Moments {
    pub shift: f64,
    /// `Z e^{−shift}`.
    pub z: f64,
    /// `∫ h e^{u} φ_i · e^{−shift}` on the unknowns.
    pub load: Vec<f64>,
    /// `h e^{u − shift}` at the rule points.
    pub density: Vec<f64>,
    /// `∫ h e^{u} (log h + u) · e^{−shift}`.
    pub first_moment: f64,
}

impl Moments {
    pub fn log_z(&self) -> f64 {
        self.shift + self.z.ln()
    }
}

impl<'m> MfeProblem<'m> {
    pub fn new(mesh: &'m Mesh, weight: &WeightSpec) -> Result<Self> {
        let space = FemSpace::new(mesh)?;
        let stiffness = space.stiffness();
        let mut log_h = Vec::with_capacity(mesh.triangles().len() * RULE.weights.len());
        for t in 0..mesh.triangles().len() {
            let v = mesh.vertices(t);
            for b in RULE.points {
                log_h.push(weight.log_h(TriangleRule::map(*b, &v)));
            }
        }
        Ok(MfeProblem { space, stiffness, log_h })
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

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Unknowns of a nodal field; fails unless it vanishes on the boundary.
    pub fn unknowns(&self, u: &ScalarField) -> Result<Vec<f64>> {
        let mesh = self.mesh();
        if u.values().len() != mesh.node_count() {
            return Err(Error::InvalidArgument("field does not match mesh".into()));
        }
        let bmax =
            (0..mesh.node_count()).filter(|&i| mesh.is_boundary(i)).map(|i| u.values()[i].abs()).fold(0.0, f64::max);
        if bmax > 1e-12 {
            return Err(Error::InvalidArgument(format!("field is {bmax:e} on the boundary, expected zero")));
        }
        Ok(self.space.restrict(u.values()))
    }

    pub fn field(&self, x: &[f64]) -> ScalarField {
        ScalarField::new(self.mesh(), self.space.extend(x, 0.0)).expect("sizes agree")
    }

    pub fn moments(&self, x: &[f64]) -> Result<Moments> {
        let mesh = self.mesh();
        let nq = RULE.weights.len();
        let umax = x.iter().copied().fold(0.0f64, f64::max);
        if !umax.is_finite() || umax > MAX_EXPONENT || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { max_u: umax });
        }
        let nodal = |i: usize| self.space.dof(i).map_or(0.0, |d| x[d]);
        let mut expo = Vec::with_capacity(self.log_h.len());
        for tri in mesh.triangles() {
            let uv = [nodal(tri[0]), nodal(tri[1]), nodal(tri[2])];
            for b in RULE.points {
                expo.push(b[0] * uv[0] + b[1] * uv[1] + b[2] * uv[2]);
            }
        }
        let shift = expo.iter().zip(&self.log_h).map(|(u, l)| u + l).fold(f64::NEG_INFINITY, f64::max);
        let density: Vec<f64> = expo.iter().zip(&self.log_h).map(|(u, l)| (u + l - shift).exp()).collect();
        let mut z = CompensatedSum::default();
        let mut first = CompensatedSum::default();
        for t in 0..mesh.triangles().len() {
            let area = mesh.area(t);
            let (mut zt, mut ft) = (0.0, 0.0);
            for k in 0..nq {
                let d = RULE.weights[k] * density[t * nq + k];
                zt += d;
                ft += d * (expo[t * nq + k] + self.log_h[t * nq + k]);
            }
            z.add(area * zt);
            first.add(area * ft);
        }
        let load = self.space.load(RULE, &density);
        Ok(Moments { shift, z: z.value(), load, density, first_moment: first.value() })
    }

    /// `I_ρ` at unknowns `x`.
    pub fn functional(&self, rho: f64, x: &[f64]) -> Result<f64> {
        let m = self.moments(x)?;
        Ok(0.5 * self.stiffness.inner(x, x) - rho * m.log_z())
    }

    /// Gradient `Ax − ρ b/Z`.
    pub fn gradient(&self, rho: f64, x: &[f64], m: &Moments) -> Vec<f64> {
        let ax = self.stiffness.apply(x);
        ax.iter().zip(&m.load).map(|(a, b)| a - rho * b / m.z).collect()
    }

    /// Weighted mass of `V = ρ h e^u / Z`.
    pub fn potential_mass(&self, rho: f64, m: &Moments) -> SparseOperator {
        let w: Vec<f64> = m.density.iter().map(|d| rho * d / m.z).collect();
        self.space.weighted_mass(RULE, &w)
    }
}

/// `I_ρ(u)` for a nodal field vanishing on the boundary.
pub fn evaluate_i(mesh: &Mesh, weight: &WeightSpec, rho: f64, u: &ScalarField) -> Result<f64> {
    let p = MfeProblem::new(mesh, weight)?;
    let x = p.unknowns(u)?;
    p.functional(rho, &x)
}
