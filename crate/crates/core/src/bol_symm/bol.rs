//! The Bol inequality `2ℓ² ≥ m(8π − m)` on level sets of solutions, and
//! the radial counterexample with a conical singularity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::level::{level_set_metrics, LevelSetMetrics};
use crate::error::{Error, Result};
use crate::geometry::quadrature::composite_gauss;
use crate::geometry::{Mesh, ScalarField};
use crate::mfe_solver::SolutionPoint;
use crate::robin_dcrit::WeightSpec;

/// `C` in `tol_bol = C · h · max e^{v/2} · length(∂ω)`.
pub const BOL_TOLERANCE_FACTOR: f64 = 5.0;
const MAX_NUDGES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BolRow {
    pub t: f64,
    #[serde(flatten)]
    pub metrics: LevelSetMetrics,
    pub margin: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BolReport {
    pub rows: Vec<BolRow>,
    /// Every margin is at least `−tol`.
    pub overall_pass: bool,
    /// Every multiply connected level set has a positive margin.
    pub strict_when_multiply_connected: bool,
}

impl BolReport {
    pub fn thresholds(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,m,ell,margin,tol,components,simply_connected\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{}\n",
                r.t, r.metrics.m, r.metrics.ell, r.margin, r.tol, r.metrics.component_count, r.metrics.simply_connected
            ));
        }
        s
    }
}

/// `v = u + log h + β` with `∫ e^v = ρ`.
pub fn bol_metric(mesh: &Mesh, weight: &WeightSpec, solution: &SolutionPoint) -> Result<ScalarField> {
    if solution.u.values().len() != mesh.node_count() {
        return Err(Error::InvalidArgument("solution does not match mesh".into()));
    }
    let beta = solution.rho.ln() - solution.log_z;
    let values = mesh.nodes().iter().zip(solution.u.values()).map(|(p, u)| u + weight.log_h(*p) + beta).collect();
    ScalarField::new(mesh, values)
}

/// Bol margins on `n` equispaced levels of `v` between its largest
/// boundary value and its maximum.
pub fn bol_check(mesh: &Mesh, weight: &WeightSpec, solution: &SolutionPoint, n: usize) -> Result<BolReport> {
    if !(solution.rho <= 8.0 * PI * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!("rho = {} exceeds 8π", solution.rho)));
    }
    let v = bol_metric(mesh, weight, solution)?;
    bol_check_field(mesh, &v, n)
}

/// As [`bol_check`] for a given metric exponent `v`.
pub fn bol_check_field(mesh: &Mesh, v: &ScalarField, n: usize) -> Result<BolReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one threshold".into()));
    }
    let vals = v.values();
    let vb = (0..mesh.node_count()).filter(|&i| mesh.is_boundary(i)).map(|i| vals[i]).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (vb.max(v.min()), v.max());
    let range = v.max() - v.min();
    let peak = (0.5 * hi).exp();
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let mut t = lo + (hi - lo) * k as f64 / (n + 1) as f64;
        let mut metrics = None;
        for _ in 0..MAX_NUDGES {
            match level_set_metrics(mesh, v, t) {
                Err(Error::DegenerateThreshold(_)) => t += 2.0 * super::level::PLATEAU_TOLERANCE * range,
                other => {
                    metrics = Some(other?);
                    break;
                }
            }
        }
        let metrics = metrics.ok_or(Error::DegenerateThreshold(t))?;
        let margin = metrics.margin();
        let tol = BOL_TOLERANCE_FACTOR * mesh.target_h() * peak * metrics.length;
        rows.push(BolRow { t, metrics, margin, tol });
    }
    let overall_pass = rows.iter().all(|r| r.margin >= -r.tol);
    let strict_when_multiply_connected = rows.iter().filter(|r| !r.metrics.simply_connected).all(|r| r.margin > 0.0);
    Ok(BolReport { rows, overall_pass, strict_when_multiply_connected })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub alpha: f64,
    pub a: f64,
    pub r1: f64,
    pub r2: f64,
    /// `∫_{A_{r1,r2}} e^{v_α}`.
    pub m: f64,
    /// `∫_{∂A_{r1,r2}} e^{v_α/2} ds`.
    pub ell: f64,
    /// `2ℓ² − m(8π − m)`.
    pub margin_8pi: f64,
}

/// `e^{v_α/2} = √8 (1+α) a r^α / (1 + a² r^{2(1+α)})`.
fn half_density(alpha: f64, a: f64, r: f64) -> f64 {
    8f64.sqrt() * (1.0 + alpha) * a * r.powf(alpha) / (1.0 + a * a * r.powf(2.0 * (1.0 + alpha)))
}

fn check(alpha: f64, a: f64, r1: f64, r2: f64) -> Result<()> {
    if !(alpha > -1.0 && alpha < 0.0 && a > 0.0 && r1 > 0.0 && r1 < r2 && r2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need −1 < α < 0, a > 0, 0 < r1 < r2; got {alpha}, {a}, {r1}, {r2}"
        )));
    }
    Ok(())
}

/// Closed-form mass and perimeter of the annulus `A_{r1,r2}` for the
/// metric `e^{v_α}`, `v_α = log(8(1+α)²a²|x|^{2α}/(1 + a²|x|^{2(1+α)})²)`.
pub fn counterexample_metrics(alpha: f64, a: f64, r1: f64, r2: f64) -> Result<Counterexample> {
    check(alpha, a, r1, r2)?;
    let k = 2.0 * (1.0 + alpha);
    let m = 8.0 * PI * (1.0 + alpha) * (1.0 / (1.0 + a * a * r1.powf(k)) - 1.0 / (1.0 + a * a * r2.powf(k)));
    let ell = 2.0 * PI * (r1 * half_density(alpha, a, r1) + r2 * half_density(alpha, a, r2));
    Ok(Counterexample { alpha, a, r1, r2, m, ell, margin_8pi: 2.0 * ell * ell - m * (8.0 * PI - m) })
}

/// The same quantities by polar quadrature: geometric radial panels and
/// `angular` nodes on each circle.
pub fn counterexample_quadrature(alpha: f64, a: f64, r1: f64, r2: f64, angular: usize) -> Result<(f64, f64)> {
    check(alpha, a, r1, r2)?;
    if angular == 0 {
        return Err(Error::InvalidArgument("need angular nodes".into()));
    }
    let dth = 2.0 * PI / angular as f64;
    let ring = |f: &dyn Fn(f64) -> f64| (0..angular).map(|j| f(dth * (j as f64 + 0.5))).sum::<f64>() * dth;
    let mut m = 0.0;
    let mut lo = r1;
    while lo < r2 {
        let hi = (lo * 1.5).min(r2);
        for (r, w) in composite_gauss(lo, hi, 1, 20) {
            let d = half_density(alpha, a, r).powi(2);
            m += w * r * ring(&|_| d);
        }
        lo = hi;
    }
    let ell = r1 * ring(&|_| half_density(alpha, a, r1)) + r2 * ring(&|_| half_density(alpha, a, r2));
    Ok((m, ell))
}
