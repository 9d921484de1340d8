//! Newton's method for `Au = ρ b(u)/Z(u)` with the exact nonlocal Jacobian.

use serde::{Deserialize, Serialize};

use super::problem::{MfeProblem, Moments};
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point, ScalarField};
use crate::laplace::{eig_smallest, eig_smallest_rank_one, Factorization, SparseOperator};
use crate::robin_dcrit::WeightSpec;

/// Relative residual required for convergence.
pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 40;

/// A converged solution with its diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionPoint {
    pub rho: f64,
    pub u: ScalarField,
    /// `max u − log ∫ h e^u`.
    pub lambda_blow: f64,
    /// First eigenvalue of the linearized operator `−Δψ − Vψ + V∫Vψ/ρ`
    /// relative to `V = ρ h e^u / ∫ h e^u`.
    pub eig1_weighted: f64,
    /// Whether the full linearization, including the rank-one term from
    /// the normalization, is invertible.
    pub nonlocal_nonsingular: bool,
    #[serde(rename = "I_value")]
    pub i_value: f64,
    /// `(1/2ρ²) ∫ |∇u|²`.
    pub energy_e: f64,
    /// `−∫ ρ̂ log ρ̂`, `ρ̂ = h e^u / ∫ h e^u`.
    pub entropy_s: f64,
    pub log_z: f64,
    pub max_u: f64,
    pub argmax: Point,
    pub residual: f64,
    pub iterations: usize,
}

/// Iterate returned by [`Newton::run`] whether or not it converged.
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub struct Newton<'p, 'm> {
    pub problem: &'p MfeProblem<'m>,
    pub max_iterations: usize,
    /// Abort when `max u` exceeds this (the iterate is running away).
    pub max_u_cap: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative residual of the discrete equation.
pub fn relative_residual(problem: &MfeProblem, rho: f64, x: &[f64], m: &Moments) -> f64 {
    let ax = problem.stiffness().apply(x);
    let src: Vec<f64> = m.load.iter().map(|b| rho * b / m.z).collect();
    let r = ax.iter().zip(&src).map(|(a, s)| (a - s).abs()).fold(0.0, f64::max);
    let scale = max_abs(&ax).max(max_abs(&src));
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// Solver for `J y = r` with `J = M + ρ v vᵀ`, `M = A − B`, `v = b/Z`.
pub struct Jacobian {
    pub m: SparseOperator,
    factor: Factorization,
    v: Vec<f64>,
    minv_v: Vec<f64>,
    denom: f64,
    rho: f64,
}

impl Jacobian {
    pub fn new(problem: &MfeProblem, rho: f64, m: &Moments) -> Result<Self> {
        let b = problem.potential_mass(rho, m);
        let op = problem.stiffness().add_scaled(-1.0, &b)?;
        let factor = Factorization::new(problem.space(), &op)?;
        let v: Vec<f64> = m.load.iter().map(|b| b / m.z).collect();
        let minv_v = factor.solve(&v);
        let denom = 1.0 + rho * dot(&v, &minv_v);
        Ok(Jacobian { m: op, factor, v, minv_v, denom, rho })
    }

    /// True when `M` was positive definite.
    pub fn m_positive_definite(&self) -> bool {
        self.factor.is_cholesky()
    }

    /// Determinant-lemma factor `1 + ρ vᵀM⁻¹v`.
    pub fn rank_one_factor(&self) -> f64 {
        self.denom
    }

    pub fn solve(&self, r: &[f64]) -> Result<Vec<f64>> {
        if !(self.denom.abs() > 1e-14) {
            return Err(Error::SingularSystem("rank-one update is singular".into()));
        }
        let y = self.factor.solve(r);
        let c = self.rho * dot(&self.v, &y) / self.denom;
        Ok(y.iter().zip(&self.minv_v).map(|(a, b)| a - c * b).collect())
    }

    /// `dx/dρ` along the solution curve: `J ẋ = b/Z`.
    pub fn tangent(&self) -> Result<Vec<f64>> {
        let v = self.v.clone();
        self.solve(&v)
    }
}

impl<'p, 'm> Newton<'p, 'm> {
    pub fn new(problem: &'p MfeProblem<'m>) -> Self {
        Newton { problem, max_iterations: MAX_NEWTON_ITERATIONS, max_u_cap: 600.0 }
    }

    pub fn run(&self, rho: f64, x0: &[f64]) -> Result<NewtonOutcome> {
        let p = self.problem;
        let mut x = x0.to_vec();
        let mut m = p.moments(&x)?;
        let mut res = relative_residual(p, rho, &x, &m);
        let mut energy = 0.5 * p.stiffness().inner(&x, &x) - rho * m.log_z();
        let mut it = 0;
        while res > NEWTON_TOLERANCE && it < self.max_iterations {
            it += 1;
            let grad = p.gradient(rho, &x, &m);
            let jac = match Jacobian::new(p, rho, &m) {
                Ok(j) => j,
                Err(_) => break,
            };
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Ok(step) = jac.solve(&neg) else { break };
            let slope = dot(&grad, &step);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                let tmax = trial.iter().copied().fold(0.0, f64::max);
                if tmax <= self.max_u_cap {
                    if let Ok(tm) = p.moments(&trial) {
                        let tres = relative_residual(p, rho, &trial, &tm);
                        let te = 0.5 * p.stiffness().inner(&trial, &trial) - rho * tm.log_z();
                        let armijo = slope < 0.0 && te <= energy + 1e-4 * t * slope;
                        if armijo || tres < res {
                            x = trial;
                            m = tm;
                            res = tres;
                            energy = te;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok(NewtonOutcome { converged: res <= NEWTON_TOLERANCE, x, residual: res, iterations: it })
    }
}

/// Builds the diagnostics of a converged iterate.
pub fn solution_point(problem: &MfeProblem, rho: f64, outcome: &NewtonOutcome) -> Result<SolutionPoint> {
    let x = &outcome.x;
    let m = problem.moments(x)?;
    let u = problem.field(x);
    let log_z = m.log_z();
    let dirichlet = problem.stiffness().inner(x, x);
    let imax = u.argmax();
    let max_u = u.values()[imax];
    let (eig1, nonsingular) = first_eigenvalue(problem, rho, &m)?;
    Ok(SolutionPoint {
        rho,
        lambda_blow: max_u - log_z,
        eig1_weighted: eig1,
        nonlocal_nonsingular: nonsingular,
        i_value: 0.5 * dirichlet - rho * log_z,
        energy_e: dirichlet / (2.0 * rho * rho),
        entropy_s: log_z - m.first_moment / m.z,
        log_z,
        max_u,
        argmax: problem.mesh().nodes()[imax],
        residual: outcome.residual,
        iterations: outcome.iterations,
        u,
    })
}

/// First eigenvalue of the full linearization `(A − B + ρvvᵀ)ψ = λBψ`
/// and whether that operator is invertible.
fn first_eigenvalue(problem: &MfeProblem, rho: f64, m: &Moments) -> Result<(f64, bool)> {
    let b = problem.potential_mass(rho, m);
    let v: Vec<f64> = m.load.iter().map(|b| b / m.z).collect();
    let eig1 = eig_smallest_rank_one(problem.stiffness(), &b, Some((rho, &v)), 1)?[0].value;
    Ok((eig1, eig1.abs() > 1e-10))
}

/// Eigenvalues at a converged point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// The `k` smallest eigenvalues of `−Δψ − Vψ = λVψ`.
    pub local: Vec<f64>,
    /// Smallest eigenvalue with the rank-one normalization term included.
    pub nonlocal_first: f64,
    pub nonlocal_nonsingular: bool,
}

pub fn linearized_spectrum(mesh: &Mesh, weight: &WeightSpec, point: &SolutionPoint, k: usize) -> Result<Spectrum> {
    let problem = MfeProblem::new(mesh, weight)?;
    let x = problem.unknowns(&point.u)?;
    let m = problem.moments(&x)?;
    let b = problem.potential_mass(point.rho, &m);
    let local = eig_smallest(problem.stiffness(), &b, k)?.into_iter().map(|p| p.value).collect();
    let (nonlocal_first, nonlocal_nonsingular) = first_eigenvalue(&problem, point.rho, &m)?;
    Ok(Spectrum { local, nonlocal_first, nonlocal_nonsingular })
}

/// Solves problem (ρ, h) on `mesh` from `init`, which must vanish on the
/// boundary.
pub fn newton_solve(mesh: &Mesh, weight: &WeightSpec, rho: f64, init: &ScalarField) -> Result<SolutionPoint> {
    if !(rho > 0.0 && rho <= 8.0 * std::f64::consts::PI * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside (0, 8π]")));
    }
    let problem = MfeProblem::new(mesh, weight)?;
    let x0 = problem.unknowns(init)?;
    let out = Newton::new(&problem).run(rho, &x0)?;
    if !out.converged {
        return Err(Error::NoConvergence { iterations: out.iterations, residual: out.residual });
    }
    solution_point(&problem, rho, &out)
}
