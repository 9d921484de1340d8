//! Maximizers of `log h + 4πγ` and the first/second kind verdict.

use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::dcrit::{compute_d_with, fit_within, DOptions};
use super::WeightSpec;
use crate::error::{Error, Result};
use crate::geometry::{dist, DomainSpec, Mesh, Point};
use crate::laplace::DirichletSolver;

/// Samples on the circle used to average the regular part.
const CIRCLE_SAMPLES: usize = 128;
const FIT_ORDER: usize = 10;
const MAX_POLISH: usize = 40;

/// Relative stationarity tolerance, against the range of the field.
pub const STATIONARITY_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPoint {
    pub q: Point,
    /// `log h(q) + 4πγ(q)`.
    pub value: f64,
    pub gamma_q: f64,
    pub grad_norm: f64,
    pub hessian: [[f64; 2]; 2],
    /// Max minus min over the scan.
    pub range: f64,
    /// Set when another local maximum of the scan comes within the
    /// stationarity tolerance of the maximum, as on a circle of maximizers.
    pub degenerate: bool,
    /// Other local maxima of the scan, with their values.
    pub secondary: Vec<(Point, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FirstKind,
    SecondKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DCritReport {
    pub q: Point,
    pub gamma_q: f64,
    pub grad_norm: f64,
    pub hessian: [[f64; 2]; 2],
    #[serde(rename = "D_value")]
    pub d_value: f64,
    pub delta_used: f64,
    pub verdict: Kind,
    pub degenerate: bool,
}

/// `log h + 4πγ` at `p`, with `γ(p)` the circle mean of `G̃(·, p)`.
struct Objective<'a, 'm> {
    solver: &'a DirichletSolver<'m>,
    weight: &'a WeightSpec,
}

impl Objective<'_, '_> {
    fn gamma(&self, p: Point) -> Result<f64> {
        let robin = self.solver.green_regular(p)?;
        let r = 0.5 * self.solver.boundary_distance(p);
        robin.circle_mean(self.solver.mesh(), r, CIRCLE_SAMPLES).ok_or(Error::NonFiniteIntegrand { x: p[0], y: p[1] })
    }

    fn eval(&self, p: Point) -> Result<f64> {
        Ok(self.weight.log_h(p) + 4.0 * PI * self.gamma(p)?)
    }

    /// `∇(log h + 4πγ)(p)` and `γ(p)` from a harmonic fit of `G̃(·, p)`.
    fn gradient(&self, p: Point) -> Result<([f64; 2], f64)> {
        let h = self.solver.mesh().target_h();
        let d = self.solver.boundary_distance(p);
        let near = |e: Error| if d <= 4.0 * h { Error::MaximizerOnBoundaryRing { x: p[0], y: p[1] } } else { e };
        let robin = self.solver.green_regular(p).map_err(near)?;
        let mut fit = fit_within(self.solver.mesh(), &robin, d, FIT_ORDER);
        for order in [6, 4] {
            if fit.is_ok() {
                break;
            }
            fit = fit_within(self.solver.mesh(), &robin, d, order);
        }
        let (e, _) = fit.map_err(near)?;
        let g = e.gradient_at_center();
        let w = self.weight.grad_log_h(p);
        Ok(([w[0] + 8.0 * PI * g[0], w[1] + 8.0 * PI * g[1]], e.constant))
    }

    /// Hessian by central differences of [`Objective::gradient`].
    fn hessian(&self, p: Point, s: f64) -> Result<Matrix2<f64>> {
        let gx = (self.gradient([p[0] + s, p[1]])?.0, self.gradient([p[0] - s, p[1]])?.0);
        let gy = (self.gradient([p[0], p[1] + s])?.0, self.gradient([p[0], p[1] - s])?.0);
        let hxx = (gx.0[0] - gx.1[0]) / (2.0 * s);
        let hyy = (gy.0[1] - gy.1[1]) / (2.0 * s);
        let hxy = 0.25 * ((gx.0[1] - gx.1[1]) + (gy.0[0] - gy.1[0])) / s;
        Ok(Matrix2::new(hxx, hxy, hxy, hyy))
    }
}

type Grid = Vec<Vec<Option<(Point, f64)>>>;

fn scan(obj: &Objective, mesh: &Mesh) -> Result<(f64, Grid)> {
    let (lo, hi) = bbox(mesh);
    let area: f64 = (0..mesh.triangles().len()).map(|t| mesh.area(t)).sum();
    let spacing = (2.0 * mesh.target_h()).max((area / 250.0).sqrt());
    let nx = ((hi[0] - lo[0]) / spacing).ceil() as usize + 1;
    let ny = ((hi[1] - lo[1]) / spacing).ceil() as usize + 1;
    let required = 2.0 * mesh.target_h();
    let mut grid = vec![vec![None; ny]; nx];
    for (i, col) in grid.iter_mut().enumerate() {
        for (j, cell) in col.iter_mut().enumerate() {
            let p = [lo[0] + spacing * i as f64, lo[1] + spacing * j as f64];
            if mesh.locate(p).is_none() || obj.solver.boundary_distance(p) <= 1.5 * required {
                continue;
            }
            *cell = Some((p, obj.eval(p)?));
        }
    }
    Ok((spacing, grid))
}

fn bbox(mesh: &Mesh) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in mesh.nodes() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Local maxima of the scan grid over its 8-neighbourhoods.
fn local_maxima(grid: &[Vec<Option<(Point, f64)>>]) -> Vec<(Point, f64)> {
    let mut out = Vec::new();
    for i in 0..grid.len() {
        for j in 0..grid[i].len() {
            let Some((p, v)) = grid[i][j] else { continue };
            let mut is_max = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 {
                        continue;
                    }
                    if let Some(Some((_, w))) = grid.get(a as usize).and_then(|c| c.get(b as usize)) {
                        if *w > v {
                            is_max = false;
                        }
                    }
                }
            }
            if is_max {
                out.push((p, v));
            }
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Maximizer of `log h + 4πγ`: a grid scan followed by Newton steps with
/// gradients from local harmonic fits of `G̃` and a difference Hessian.
pub fn find_max_point(mesh: &Mesh, weight: &WeightSpec) -> Result<MaxPoint> {
    weight.validate()?;
    let solver = DirichletSolver::new(mesh)?;
    let obj = Objective { solver: &solver, weight };
    let (spacing, grid) = scan(&obj, mesh)?;
    let values: Vec<f64> = grid.iter().flatten().flatten().map(|c| c.1).collect();
    if values.is_empty() {
        return Err(Error::InvalidDomain("no interior sample points away from the boundary".into()));
    }
    let range =
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - values.iter().copied().fold(f64::INFINITY, f64::min);
    let maxima = local_maxima(&grid);
    let (mut q, _) = maxima[0];

    let ring = 2.0 * mesh.target_h();
    let fd = mesh.target_h();
    let mut grad = obj.gradient(q)?.0;
    let mut hess = obj.hessian(q, fd)?;
    for _ in 0..MAX_POLISH {
        let eig = SymmetricEigen::new(hess);
        let scale = eig.eigenvalues.abs().max();
        let mut step = [0.0; 2];
        for k in 0..2 {
            let lam = eig.eigenvalues[k];
            let v = eig.eigenvectors.column(k);
            let gv = v[0] * grad[0] + v[1] * grad[1];
            // ascent along directions that are not concave
            let c = if lam < -1e-3 * scale { -gv / lam } else { gv / scale };
            step[0] += c * v[0];
            step[1] += c * v[1];
        }
        let len = step[0].hypot(step[1]);
        let cap = 0.5 * spacing;
        if len > cap {
            step = [step[0] * cap / len, step[1] * cap / len];
        }
        q = [q[0] + step[0], q[1] + step[1]];
        if solver.boundary_distance(q) <= ring {
            return Err(Error::MaximizerOnBoundaryRing { x: q[0], y: q[1] });
        }
        grad = obj.gradient(q)?.0;
        if len < 1e-7 {
            break;
        }
        hess = obj.hessian(q, fd)?;
    }
    let (g, h) = (grad, hess);
    let grad_norm = g[0].hypot(g[1]);
    if !(grad_norm <= STATIONARITY_TOLERANCE * range.max(1e-300)) {
        return Err(Error::NotCritical { grad_norm, tolerance: STATIONARITY_TOLERANCE * range });
    }
    let value = obj.eval(q)?;
    let gamma_q = obj.gradient(q)?.1;
    let secondary: Vec<(Point, f64)> =
        maxima.into_iter().skip(1).filter(|(p, _)| dist(*p, q) > 2.0 * spacing).collect();
    let degenerate = secondary.iter().any(|s| s.1 >= value - STATIONARITY_TOLERANCE * range);
    Ok(MaxPoint {
        q,
        value,
        gamma_q,
        grad_norm,
        hessian: [[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]],
        range,
        degenerate,
        secondary,
    })
}

/// Maximizer, `D` at it, and the verdict `D > 0` ⇔ second kind.
pub fn classify(spec: &DomainSpec, mesh: &Mesh, weight: &WeightSpec) -> Result<DCritReport> {
    classify_with(spec, mesh, weight, &DOptions::default())
}

pub fn classify_with(spec: &DomainSpec, mesh: &Mesh, weight: &WeightSpec, opts: &DOptions) -> Result<DCritReport> {
    let max = find_max_point(mesh, weight)?;
    let solver = DirichletSolver::new(mesh)?;
    let robin = solver.green_regular(max.q)?;
    let delta = 0.25 * spec.distance_to_boundary(max.q);
    let d = compute_d_with(spec, mesh, weight, max.q, &robin, delta, opts)?;
    let verdict = if d.value > 0.0 { Kind::SecondKind } else { Kind::FirstKind };
    if verdict == Kind::FirstKind {
        let h = max.hessian;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if !(h[0][0] < 0.0 && det > 0.0) {
            return Err(Error::DegenerateMaximizer { d: d.value, hessian: h });
        }
    }
    Ok(DCritReport {
        q: max.q,
        gamma_q: d.gamma_q,
        grad_norm: max.grad_norm,
        hessian: max.hessian,
        d_value: d.value,
        delta_used: delta,
        verdict,
        degenerate: max.degenerate,
    })
}
