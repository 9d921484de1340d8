//! `I_{8π}` of the bubble-plus-Green test functions `v_ε` and the `ε²`
//! coefficient of its expansion, an estimator of `D` independent of the
//! singular integral.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::quadrature::{composite_gauss, integrate_split, CompensatedSum, TriangleRule};
use crate::geometry::{dist, DomainSpec, Mesh, Point};
use crate::laplace::{HarmonicExpansion, RobinData};
use crate::robin_dcrit::{fit_regular_part, WeightSpec};

const ANGULAR_NODES: usize = 64;
const RADIAL_ORDER: usize = 16;
const FIT_ORDER: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionEnergy {
    /// `(ε, I_{8π}(v_ε))`.
    pub values: Vec<(f64, f64)>,
    /// Radius of the ball carrying the bubble.
    pub scale: f64,
    pub c0: f64,
    /// Coefficient of `ε²` in the fit `I = C₀ + c₂ε² + c₄ε⁴`.
    pub c2: f64,
    pub c4: f64,
    /// `−c₂/(8 s²)`.
    pub d_estimate: f64,
    /// `C₀ + 8π + 8π log π + 8π(log h(q) + 4πγ(q))`.
    pub c0_check: f64,
}

/// `v_ε = 2 log((ε² + 1)/(ε² + |x−q|²/s²)) − 4 log s + 8πG̃(x, q)` inside
/// `B_s(q)` and `8πG(x, q)` outside, with `s = dist(q, ∂Ω)/2`.
pub fn test_function_energy(
    spec: &DomainSpec,
    mesh: &Mesh,
    robin: &RobinData,
    weight: &WeightSpec,
    epsilons: &[f64],
) -> Result<TestFunctionEnergy> {
    let q = robin.q;
    let d = if spec.contains(q) { spec.distance_to_boundary(q) } else { 0.0 };
    if !(d > 4.0 * mesh.target_h()) {
        return Err(Error::BallDoesNotFit);
    }
    if epsilons.len() < 3 || epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::InvalidArgument("need at least three ε in (0, 1)".into()));
    }
    let (g, fit_radius) = fit_regular_part(spec, mesh, robin, FIT_ORDER)?;
    let s = 0.5 * d;
    if fit_radius < s {
        return Err(Error::BallDoesNotFit);
    }
    let gamma = g.constant;
    let outer_energy = outer_dirichlet(&g, q, s);
    let outer_mass = outer_mass(mesh, robin, weight, q, s)?;
    let mut values = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let (energy, mass) = inner_parts(&g, weight, q, s, eps);
        let i = 0.5 * (energy + outer_energy) - 8.0 * PI * (mass + outer_mass).ln();
        values.push((eps, i));
    }
    let [c0, c2, c4] = quadratic_fit(&values.iter().map(|&(e, i)| (e * e, i)).collect::<Vec<_>>())?;
    let c0_check = c0 + 8.0 * PI + 8.0 * PI * PI.ln() + 8.0 * PI * (weight.log_h(q) + 4.0 * PI * gamma);
    Ok(TestFunctionEnergy { values, scale: s, c0, c2, c4, d_estimate: -c2 / (8.0 * s * s), c0_check })
}

/// Least-squares `y = c₀ + c₁x + c₂x²`.
fn quadratic_fit(pts: &[(f64, f64)]) -> Result<[f64; 3]> {
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| pts[i].0.powi(j as i32));
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let c = a.svd(true, true).solve(&y, 1e-14).map_err(|e| Error::SingularSystem(e.to_string()))?;
    Ok([c[0], c[1], c[2]])
}

/// Radial nodes on `[0, s]`, refined geometrically towards the bubble core.
fn radial_nodes(s: f64, core: f64) -> Vec<(f64, f64)> {
    let mut out = composite_gauss(0.0, core.min(s), 1, RADIAL_ORDER);
    let mut a = core;
    while a < s {
        let b = (2.0 * a).min(s);
        out.extend(composite_gauss(a, b, 1, RADIAL_ORDER));
        a = b;
    }
    out
}

/// `∫_{B_s} |∇v_ε|²` and `∫_{B_s} h e^{v_ε}` by polar quadrature.
fn inner_parts(g: &HarmonicExpansion, weight: &WeightSpec, q: Point, s: f64, eps: f64) -> (f64, f64) {
    let e2 = eps * eps;
    let mut energy = CompensatedSum::default();
    let mut mass = CompensatedSum::default();
    let dth = 2.0 * PI / ANGULAR_NODES as f64;
    for (r, wr) in radial_nodes(s, eps * s) {
        let t = r * r / (s * s);
        let dw = -4.0 * r / (s * s) / (e2 + t);
        let bubble = ((e2 + 1.0) / (e2 + t)).powi(2) / s.powi(4);
        let (mut ring_e, mut ring_m) = (0.0, 0.0);
        for j in 0..ANGULAR_NODES {
            let th = dth * (j as f64 + 0.5);
            let (c, sn) = (th.cos(), th.sin());
            let x = [q[0] + r * c, q[1] + r * sn];
            let gr = g.gradient(x);
            let grad = [dw * c + 8.0 * PI * gr[0], dw * sn + 8.0 * PI * gr[1]];
            ring_e += grad[0] * grad[0] + grad[1] * grad[1];
            ring_m += (weight.log_h(x) + 8.0 * PI * g.eval(x)).exp() * bubble;
        }
        energy.add(wr * r * dth * ring_e);
        mass.add(wr * r * dth * ring_m);
    }
    (energy.value(), mass.value())
}

/// `∫_{Ω∖B_s} |∇(8πG)|² = −∮_{∂B_s} φ ∂_r φ`, `φ = −4 log r + 8πG̃`.
fn outer_dirichlet(g: &HarmonicExpansion, q: Point, s: f64) -> f64 {
    let n = 4 * ANGULAR_NODES;
    let dth = 2.0 * PI / n as f64;
    let mut sum = CompensatedSum::default();
    for j in 0..n {
        let th = dth * (j as f64 + 0.5);
        let (c, sn) = (th.cos(), th.sin());
        let x = [q[0] + s * c, q[1] + s * sn];
        let gr = g.gradient(x);
        let phi = -4.0 * s.ln() + 8.0 * PI * g.eval(x);
        let dphi = -4.0 / s + 8.0 * PI * (gr[0] * c + gr[1] * sn);
        sum.add(-phi * dphi * s * dth);
    }
    sum.value()
}

/// `∫_{Ω∖B_s} h e^{8πG}` on the mesh, clipped at the circle.
fn outer_mass(mesh: &Mesh, robin: &RobinData, weight: &WeightSpec, q: Point, s: f64) -> Result<f64> {
    let field = robin.field.values();
    let (pos, _) = integrate_split(
        mesh,
        TriangleRule::DEGREE5,
        |x| dist(x, q) - s,
        |t, x| {
            let tri = mesh.triangles()[t];
            let b = mesh.barycentric(t, x);
            let gt = b[0] * field[tri[0]] + b[1] * field[tri[1]] + b[2] * field[tri[2]];
            (weight.log_h(x) + 8.0 * PI * gt).exp() / dist(x, q).powi(4)
        },
        3,
    )?;
    Ok(pos)
}
