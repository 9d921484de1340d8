//! ρ-continuation of the minimizer branch and the blow-up rate fit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::newton::{solution_point, Jacobian, Newton, NewtonOutcome, SolutionPoint};
use super::problem::MfeProblem;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Grading, Mesh};
use crate::robin_dcrit::WeightSpec;

pub const DEFAULT_LAMBDA_CAP: f64 = 12.0;
const TAIL_START: f64 = 5.0;
const MIN_TAIL: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ConvergedAt8pi,
    BlowupDetected { lambda_cap: f64 },
    StepUnderflow,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub points: Vec<SolutionPoint>,
    pub termination: Termination,
    /// The value of ρ playing the role of 8π on this mesh.
    pub critical_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchOptions {
    pub lambda_cap: f64,
    /// Endpoint of the continuation; `8π` unless calibrated with
    /// [`discrete_critical_mass`].
    pub critical_mass: f64,
    pub initial_step: f64,
    /// Largest predicted change of `lambda_blow` per step.
    pub max_lambda_step: f64,
    pub min_step: f64,
    pub max_points: usize,
    /// Newton iterations allowed per continuation step.
    pub max_iterations: usize,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions {
            lambda_cap: DEFAULT_LAMBDA_CAP,
            critical_mass: 8.0 * PI,
            initial_step: PI / 4.0,
            max_lambda_step: 0.25,
            min_step: 1e-13,
            max_points: 400,
            max_iterations: 30,
        }
    }
}

impl Branch {
    pub fn last(&self) -> Option<&SolutionPoint> {
        self.points.last()
    }

    /// `(ρ, λ)` pairs.
    pub fn rho_lambda(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.rho, p.lambda_blow)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho,lambda_blow,eig1,I_value,energy_E,entropy_S,max_u,argmax_x,argmax_y\n");
        for p in &self.points {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                p.rho,
                p.lambda_blow,
                p.eig1_weighted,
                p.i_value,
                p.energy_e,
                p.entropy_s,
                p.max_u,
                p.argmax[0],
                p.argmax[1]
            ));
        }
        s
    }
}

/// `dλ/dρ` along the branch from the tangent `ẋ`.
fn lambda_rate(x: &[f64], xdot: &[f64], v: &[f64]) -> f64 {
    let c = (0..x.len()).max_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap_or(0);
    let zdot: f64 = v.iter().zip(xdot).map(|(a, b)| a * b).sum();
    xdot.get(c).copied().unwrap_or(0.0) - zdot
}

/// Continues the branch from `u ≡ 0` towards `opts.critical_mass`,
/// passing exactly through every ρ in `hints` that lies below it.
pub fn continue_branch(mesh: &Mesh, weight: &WeightSpec, hints: &[f64], opts: &BranchOptions) -> Result<Branch> {
    if !(opts.lambda_cap > 0.0) {
        return Err(Error::InvalidArgument("lambda_cap must be positive".into()));
    }
    let problem = MfeProblem::new(mesh, weight)?;
    let mut newton = Newton::new(&problem);
    newton.max_iterations = opts.max_iterations;
    let crit = opts.critical_mass;
    let mut hints: Vec<f64> = hints.iter().copied().filter(|&r| r > 0.0 && r < crit).collect();
    hints.sort_by(f64::total_cmp);
    hints.dedup();

    let mut points = Vec::new();
    let mut rho = 0.0f64;
    let mut x = vec![0.0; problem.dim()];
    let mut step = opts.initial_step;
    let termination = loop {
        if points.len() >= opts.max_points {
            break Termination::StepUnderflow;
        }
        let m = problem.moments(&x)?;
        let jac = Jacobian::new(&problem, rho, &m)?;
        let xdot = jac.tangent()?;
        let v: Vec<f64> = m.load.iter().map(|b| b / m.z).collect();
        let rate = lambda_rate(&x, &xdot, &v).abs();
        let mut outcome: Option<(f64, NewtonOutcome)> = None;
        while step >= opts.min_step {
            let limit = if rate > 0.0 { opts.max_lambda_step / rate } else { f64::INFINITY };
            let mut target = rho + step.min(limit);
            if let Some(&h) = hints.iter().find(|&&h| h > rho * (1.0 + 1e-14)) {
                target = target.min(h);
            }
            if target >= crit {
                target = crit;
            }
            let d = target - rho;
            let x0: Vec<f64> = x.iter().zip(&xdot).map(|(a, b)| a + d * b).collect();
            let out = newton.run(target, &x0)?;
            if out.converged {
                if out.iterations <= 4 {
                    step = (d * 1.3).max(step);
                } else {
                    step = d;
                }
                outcome = Some((target, out));
                break;
            }
            step = 0.5 * d;
        }
        let Some((target, out)) = outcome else { break Termination::StepUnderflow };
        let point = solution_point(&problem, target, &out)?;
        let lam = point.lambda_blow;
        x = out.x;
        rho = target;
        points.push(point);
        if lam > opts.lambda_cap {
            break Termination::BlowupDetected { lambda_cap: opts.lambda_cap };
        }
        if rho >= crit {
            break Termination::ConvergedAt8pi;
        }
    };
    Ok(Branch { points, termination, critical_mass: crit })
}

/// Least-squares fit of `log(critical_mass − ρ)` against `lambda_blow` over
/// the points with `lambda_blow > 5`.
pub fn fit_blowup_rate(branch: &Branch) -> Result<(f64, f64)> {
    if !matches!(branch.termination, Termination::BlowupDetected { .. }) {
        let found = branch.points.iter().filter(|p| p.lambda_blow > TAIL_START).count();
        return Err(Error::InsufficientTail { found, required: MIN_TAIL });
    }
    fit_blowup_tail(&branch.rho_lambda(), branch.critical_mass)
}

/// The same fit on bare `(ρ, λ)` pairs.
pub fn fit_blowup_tail(points: &[(f64, f64)], critical_mass: f64) -> Result<(f64, f64)> {
    let tail: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > TAIL_START && p.0 < critical_mass)
        .map(|&(rho, lam)| (lam, (critical_mass - rho).ln()))
        .collect();
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientTail { found: tail.len(), required: MIN_TAIL });
    }
    Ok(linear_fit(&tail))
}

/// `(slope, intercept)` of the least-squares line through `pts`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// The blow-up mass of the unit disk meshed with `grading` moved to the
/// origin. On a graded mesh the discrete branch satisfies
/// `ρ = ρ* − C e^{−λ}` deep in the tail, and `ρ*` replaces `8π`.
pub fn discrete_critical_mass(target_h: f64, grading: Grading) -> Result<f64> {
    let grading = Grading { center: [0.0, 0.0], ..grading };
    let mesh = crate::geometry::triangulate_graded(&DomainSpec::unit_disk(), target_h, grading)?;
    let opts = BranchOptions { critical_mass: f64::INFINITY, lambda_cap: 11.0, ..Default::default() };
    let branch = continue_branch(&mesh, &WeightSpec::ConstantOne, &[], &opts)?;
    let n = branch.points.len();
    if !matches!(branch.termination, Termination::BlowupDetected { .. }) || n < 2 {
        return Err(Error::InsufficientTail { found: n, required: 2 });
    }
    let (a, b) = (&branch.points[n - 2], &branch.points[n - 1]);
    let (ea, eb) = ((-a.lambda_blow).exp(), (-b.lambda_blow).exp());
    let c = (b.rho - a.rho) / (ea - eb);
    Ok(b.rho + c * eb)
}
