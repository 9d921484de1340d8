//! The regularized singular integral
//! `D = ∫_{Ω∖B_δ} r̂/|x−q|⁴ + ∫_{B_δ} (r̂ − 1)/|x−q|⁴ − π/δ²`,
//! `r̂ = (h/h(q)) e^{8π(G̃(·,q) − γ(q))}`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WeightSpec;
use crate::error::{Error, Result};
use crate::geometry::quadrature::{composite_gauss, integrate_split, CompensatedSum, TriangleRule};
use crate::geometry::{dist, DomainSpec, Mesh, Point};
use crate::laplace::{HarmonicExpansion, RobinData};

/// Angular nodes of the polar grid around `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AngularRule {
    /// Equispaced nodes; contains every antipodal pair, so every
    /// `cos kθ`, `sin kθ` with `0 < k < count` sums to zero.
    Symmetric { count: usize },
    /// Equispaced nodes randomly displaced by up to half a spacing, for
    /// demonstrating that the cancellation matters.
    Jittered { count: usize, seed: u64 },
}

impl AngularRule {
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match *self {
            AngularRule::Symmetric { count } => {
                (0..count).map(|j| (2.0 * PI * (j as f64 + 0.5) / count as f64, 2.0 * PI / count as f64)).collect()
            }
            AngularRule::Jittered { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|j| {
                        let jit: f64 = rng.random::<f64>() - 0.5;
                        (2.0 * PI * (j as f64 + 0.5 + 0.5 * jit) / count as f64, 2.0 * PI / count as f64)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DOptions {
    pub angular: AngularRule,
    /// Radial Gauss points per panel.
    pub radial_order: usize,
    /// Degree of the harmonic polynomial fitted to `G̃(·,q)` near `q`.
    pub fit_order: usize,
    /// Largest accepted `‖∇(log h + 4πγ)(q)‖`.
    pub grad_tolerance: f64,
}

impl Default for DOptions {
    fn default() -> Self {
        DOptions {
            angular: AngularRule::Symmetric { count: 128 },
            radial_order: 16,
            fit_order: 10,
            grad_tolerance: 1e-2,
        }
    }
}

/// Pieces of `D` and the stationarity measure at `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DBreakdown {
    pub value: f64,
    /// `∫_{B_δ} (r̂ − 1)/|x−q|⁴`.
    pub inner: f64,
    /// `∫_{Ω∖B_δ} r̂/|x−q|⁴`.
    pub outer: f64,
    pub grad_norm: f64,
    pub gamma_q: f64,
}

/// Smooth cutoff equal to 1 below `a` and 0 above `b`.
fn cutoff(r: f64, a: f64, b: f64) -> f64 {
    if r <= a {
        return 1.0;
    }
    if r >= b {
        return 0.0;
    }
    let s = (r - a) / (b - a);
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    f(1.0 - s) / (f(1.0 - s) + f(s))
}

/// Local representation of `log r̂` near `q`.
struct Ratio<'a> {
    mesh: &'a Mesh,
    field: &'a [f64],
    weight: &'a WeightSpec,
    q: Point,
    log_hq: f64,
    gamma_q: f64,
    expansion: HarmonicExpansion,
    fit_radius: f64,
}

impl Ratio<'_> {
    /// `log r̂(x)`; the expansion inside the fit disk, P1 outside.
    fn log(&self, x: Point) -> Result<f64> {
        let g = if dist(x, self.q) <= self.fit_radius {
            self.expansion.eval(x)
        } else {
            self.mesh.interpolate(self.field, x).ok_or(Error::NonFiniteIntegrand { x: x[0], y: x[1] })?
        };
        Ok(self.weight.log_h(x) - self.log_hq + 8.0 * PI * (g - self.gamma_q))
    }

    /// `r̂ − 1` computed without cancellation.
    fn minus_one(&self, x: Point) -> Result<f64> {
        Ok(self.log(x)?.exp_m1())
    }
}

/// Radius of the largest disk about `q` inside the domain.
fn clearance(spec: &DomainSpec, q: Point) -> f64 {
    if spec.contains(q) {
        spec.distance_to_boundary(q)
    } else {
        0.0
    }
}

/// `‖∇(log h + 4πγ)(q)‖` from a local harmonic fit, using
/// `∇γ(q) = 2∇ₓG̃(x,q)|ₓ₌q`.
pub fn stationarity(weight: &WeightSpec, q: Point, expansion: &HarmonicExpansion) -> f64 {
    let g = expansion.gradient_at_center();
    let w = weight.grad_log_h(q);
    (w[0] + 8.0 * PI * g[0]).hypot(w[1] + 8.0 * PI * g[1])
}

pub fn fit_regular_part(
    spec: &DomainSpec,
    mesh: &Mesh,
    robin: &RobinData,
    order: usize,
) -> Result<(HarmonicExpansion, f64)> {
    fit_within(mesh, robin, clearance(spec, robin.q), order)
}

/// Harmonic fit of `G̃(·, q)` on a disk of radius at least `0.7 d`.
pub(crate) fn fit_within(mesh: &Mesh, robin: &RobinData, d: f64, order: usize) -> Result<(HarmonicExpansion, f64)> {
    let mut radius = 0.7 * d;
    loop {
        match HarmonicExpansion::fit(mesh, robin.field.values(), robin.q, radius, order) {
            Ok(e) => return Ok((e, radius)),
            Err(e) if radius >= 0.95 * d => return Err(e),
            Err(_) => radius = (radius * 1.15).min(0.95 * d),
        }
    }
}

/// `D_h(q)` with default options.
pub fn compute_d(
    spec: &DomainSpec,
    mesh: &Mesh,
    weight: &WeightSpec,
    q: Point,
    robin: &RobinData,
    delta: f64,
) -> Result<f64> {
    compute_d_with(spec, mesh, weight, q, robin, delta, &DOptions::default()).map(|b| b.value)
}

#[allow(clippy::too_many_arguments)]
pub fn compute_d_with(
    spec: &DomainSpec,
    mesh: &Mesh,
    weight: &WeightSpec,
    q: Point,
    robin: &RobinData,
    delta: f64,
    opts: &DOptions,
) -> Result<DBreakdown> {
    if dist(q, robin.q) > 1e-12 {
        return Err(Error::InvalidArgument("Robin data computed for a different source point".into()));
    }
    let d = clearance(spec, q);
    if !(delta > 0.0 && delta < d) {
        return Err(Error::DeltaTooLarge { delta, max: d });
    }
    let (expansion, fit_radius) = fit_regular_part(spec, mesh, robin, opts.fit_order)?;
    let grad_norm = stationarity(weight, q, &expansion);
    if !(grad_norm <= opts.grad_tolerance) {
        return Err(Error::NotCritical { grad_norm, tolerance: opts.grad_tolerance });
    }
    let ratio = Ratio {
        mesh,
        field: robin.field.values(),
        weight,
        q,
        log_hq: weight.log_h(q),
        gamma_q: expansion.constant,
        expansion,
        fit_radius,
    };
    let (ra, rb) = (0.3 * d, 0.6 * d);
    let angles = opts.angular.nodes();
    let point = |r: f64, th: f64| [q[0] + r * th.cos(), q[1] + r * th.sin()];

    // inner ball: ∫_0^δ ∫ (r̂ − 1) r⁻³ dθ dr
    let mut inner = CompensatedSum::default();
    let panels = ((delta / rb).ceil() as usize * 4).max(4);
    for (r, wr) in composite_gauss(0.0, delta, panels, opts.radial_order) {
        let mut ring = 0.0;
        for &(th, wt) in &angles {
            ring += wt * ratio.minus_one(point(r, th))?;
        }
        inner.add(wr * ring / (r * r * r));
    }

    // polar part of the outer integral: ψ r̂ on δ < r < R_b
    let mut outer = CompensatedSum::default();
    if delta < rb {
        let n = ((rb / delta).log2().ceil() as usize).max(1);
        let mut a = delta;
        for k in 0..n {
            let b = if k + 1 == n { rb } else { a * (rb / delta).powf(1.0 / n as f64) };
            for (r, wr) in composite_gauss(a, b, 1, opts.radial_order) {
                let psi = cutoff(r, ra, rb);
                if psi == 0.0 {
                    continue;
                }
                let mut ring = 0.0;
                for &(th, wt) in &angles {
                    ring += wt * ratio.log(point(r, th))?.exp();
                }
                outer.add(wr * psi * ring / (r * r * r));
            }
            a = b;
        }
    }

    // mesh part: (1 − ψ) r̂ on Ω ∖ B_δ, clipped at the circle
    let field = robin.field.values();
    let (mesh_part, _) = integrate_split(
        mesh,
        TriangleRule::DEGREE5,
        |x| dist(x, q) - delta,
        |t, x| {
            let r = dist(x, q);
            let psi = cutoff(r, ra, rb);
            if psi >= 1.0 {
                return 0.0;
            }
            let tri = mesh.triangles()[t];
            let b = mesh.barycentric(t, x);
            let g = b[0] * field[tri[0]] + b[1] * field[tri[1]] + b[2] * field[tri[2]];
            let lr = weight.log_h(x) - ratio.log_hq + 8.0 * PI * (g - ratio.gamma_q);
            (1.0 - psi) * lr.exp() / r.powi(4)
        },
        3,
    )?;
    outer.add(mesh_part);

    // portion of the domain missing from the mesh polygon is O(h²) and
    // ignored; the exterior term is exact
    let inner = inner.value();
    let outer = outer.value();
    Ok(DBreakdown { value: outer + inner - PI / (delta * delta), inner, outer, grad_norm, gamma_q: ratio.gamma_q })
}
