//! Rearrangement of a field `φ` on `(Ω, e^v)` into a radially decreasing
//! `φ*` on `(ℝ², e^U)` with equal level-set masses.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bubble::{bubble_mass, bubble_radius};
use super::level::{integrate_positive, positive_parts};
use crate::error::{Error, Result};
use crate::geometry::quadrature::{clip_triangle, CompensatedSum, TriangleRule};
use crate::geometry::{Mesh, Point, ScalarField};

const RADII: usize = 512;
const CHECK_LEVELS: usize = 20;
const BISECTIONS: usize = 60;
const BRACKETS: usize = 256;
/// Innermost nonzero radius relative to `R₀`.
const INNER_RADIUS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    /// `0` followed by log-spaced radii up to `R₀`.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    /// Piecewise linear in the mass coordinate `∫_{B_r} e^U`.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r >= self.radii[n - 1] {
            return 0.0;
        }
        let k = self.radii.partition_point(|&x| x <= r).clamp(1, n - 1);
        let (m0, m1) = (bubble_mass(self.radii[k - 1]), bubble_mass(self.radii[k]));
        let s = (bubble_mass(r) - m0) / (m1 - m0);
        self.values[k - 1] + s * (self.values[k] - self.values[k - 1])
    }

    /// Radius where the profile drops to `t`.
    pub fn radius_at(&self, t: f64) -> f64 {
        let n = self.radii.len();
        let k = self.values.partition_point(|&v| v > t).clamp(1, n - 1);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        let s = if v0 > v1 { (v0 - t) / (v0 - v1) } else { 0.0 };
        let (m0, m1) = (bubble_mass(self.radii[k - 1]), bubble_mass(self.radii[k]));
        bubble_radius(m0 + s * (m1 - m0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    /// `∫_{φ>0} e^v`.
    pub positive_mass: f64,
    /// `R₀` with `∫_{B_{R₀}} e^U = ∫_{φ>0} e^v`.
    pub outer_radius: f64,
    pub levels: Vec<f64>,
    /// `|∫_{φ*>t} e^U − ∫_{φ>t} e^v| / ∫_{φ>t} e^v` at each level.
    pub equimeasurability: Vec<f64>,
    /// `∫ (φ*)² e^U`.
    pub weighted_l2_star: f64,
    /// `∫_{φ>0} φ² e^v`.
    pub weighted_l2: f64,
    /// `∫_{B_{R₀}} |∇φ*|²`.
    pub dirichlet_star: f64,
    /// `∫_{φ>0} |∇φ|²`.
    pub dirichlet: f64,
}

impl SymmetrizationReport {
    pub fn max_equimeasurability(&self) -> f64 {
        self.equimeasurability.iter().copied().fold(0.0, f64::max)
    }
}

/// `t ↦ ∫_{φ>t} e^v` with the masses of whole triangles cached.
struct Distribution<'a> {
    mesh: &'a Mesh,
    phi: &'a [f64],
    v: &'a [f64],
    full: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl<'a> Distribution<'a> {
    fn new(mesh: &'a Mesh, phi: &'a [f64], v: &'a [f64]) -> Result<Self> {
        let mut full = Vec::with_capacity(mesh.triangles().len());
        let mut bounds = Vec::with_capacity(full.capacity());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let ph = tri.map(|i| phi[i]);
            bounds.push((
                ph.iter().copied().fold(f64::INFINITY, f64::min),
                ph.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ));
            full.push(triangle_integral(mesh.vertices(t), tri.map(|i| v[i]))?);
        }
        Ok(Distribution { mesh, phi, v, full, bounds })
    }

    fn at(&self, t: f64) -> Result<f64> {
        let mut sum = CompensatedSum::default();
        for (k, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo > t {
                sum.add(self.full[k]);
            } else if hi > t {
                let tri = self.mesh.triangles()[k];
                let verts = self.mesh.vertices(k);
                let vs = tri.map(|i| self.v[i]);
                for sub in clip_triangle(verts, tri.map(|i| self.phi[i] - t)).0 {
                    let at = |x: Point| {
                        let l = self.mesh.barycentric(k, x);
                        l[0] * vs[0] + l[1] * vs[1] + l[2] * vs[2]
                    };
                    sum.add(triangle_integral(sub, sub.map(at))?);
                }
            }
        }
        Ok(sum.value())
    }
}

/// `∫ e^v` over a triangle with `v` linear.
fn triangle_integral(tri: [Point; 3], vs: [f64; 3]) -> Result<f64> {
    let rule = TriangleRule::DEGREE5;
    let area = 0.5
        * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1])).abs();
    let mut local = 0.0;
    for (b, w) in rule.points.iter().zip(rule.weights) {
        let y = (b[0] * vs[0] + b[1] * vs[1] + b[2] * vs[2]).exp();
        if !y.is_finite() {
            let x = TriangleRule::map(*b, &tri);
            return Err(Error::NonFiniteIntegrand { x: x[0], y: x[1] });
        }
        local += w * y;
    }
    Ok(area * local)
}

pub fn symmetrize(mesh: &Mesh, phi: &ScalarField, v: &ScalarField) -> Result<(RadialProfile, SymmetrizationReport)> {
    let (p, w) = (phi.values(), v.values());
    if p.len() != mesh.node_count() || w.len() != mesh.node_count() {
        return Err(Error::InvalidArgument("field does not match mesh".into()));
    }
    let top = phi.max();
    if !(top > 0.0) {
        return Err(Error::EmptyPositivePart);
    }
    let distribution = Distribution::new(mesh, p, w)?;
    let total = distribution.at(0.0)?;
    if !(total < 8.0 * PI) {
        return Err(Error::InvalidArgument(format!("positive part carries mass {total} ≥ 8π")));
    }
    let outer = bubble_radius(total);

    let mut radii = vec![0.0];
    let r_min = INNER_RADIUS * outer;
    for k in 0..RADII {
        radii.push(r_min * (outer / r_min).powf(k as f64 / (RADII - 1) as f64));
    }
    // μ(t) on a coarse grid brackets each bisection
    let grid: Vec<(f64, f64)> = (0..=BRACKETS)
        .map(|k| {
            let t = top * k as f64 / BRACKETS as f64;
            Ok((t, if k == BRACKETS { 0.0 } else { distribution.at(t)? }))
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(radii.len());
    values.push(top);
    for &r in &radii[1..radii.len() - 1] {
        let target = bubble_mass(r);
        let k = grid.partition_point(|g| g.1 > target).clamp(1, BRACKETS);
        let (mut lo, mut up) = (grid[k - 1].0, grid[k].0);
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + up);
            if distribution.at(mid)? > target {
                lo = mid;
            } else {
                up = mid;
            }
            if up - lo <= 1e-12 * top {
                break;
            }
        }
        values.push((0.5 * (lo + up)).min(*values.last().unwrap()));
    }
    values.push(0.0);
    let profile = RadialProfile { radii, values };

    let mut levels = Vec::with_capacity(CHECK_LEVELS);
    let mut equimeasurability = Vec::with_capacity(CHECK_LEVELS);
    for k in 1..=CHECK_LEVELS {
        let t = top * k as f64 / (CHECK_LEVELS + 1) as f64;
        let exact = distribution.at(t)?;
        let star = bubble_mass(profile.radius_at(t));
        levels.push(t);
        equimeasurability.push((star - exact).abs() / exact);
    }

    let mut l2_star = 0.0;
    let mut dir_star = 0.0;
    for k in 1..profile.radii.len() {
        let (r0, r1) = (profile.radii[k - 1], profile.radii[k]);
        let (f0, f1) = (profile.values[k - 1], profile.values[k]);
        // trapezoid in the mass coordinate; exact for the piecewise linear profile
        let dm = bubble_mass(r1) - bubble_mass(r0);
        l2_star += dm * (f0 * f0 + f0 * f1 + f1 * f1) / 3.0;
        let slope = (f1 - f0) / (r1 - r0);
        dir_star += slope * slope * PI * (r1 * r1 - r0 * r0);
    }
    // φ² e^v with φ recovered from the interpolant of φ + v
    let sum: Vec<f64> = p.iter().zip(w).map(|(a, b)| a + b).collect();
    let weighted_l2 = integrate_positive(mesh, p, &sum, |t, x, s| {
        let tri = mesh.triangles()[t];
        let b = mesh.barycentric(t, x);
        let vx = b[0] * w[tri[0]] + b[1] * w[tri[1]] + b[2] * w[tri[2]];
        (s - vx).powi(2) * vx.exp()
    })?;
    let mut dirichlet = 0.0;
    for (t, parts) in positive_parts(mesh, p) {
        let g = mesh.gradient(p, t);
        let area: f64 = parts
            .iter()
            .map(|s| {
                0.5 * ((s[1][0] - s[0][0]) * (s[2][1] - s[0][1]) - (s[2][0] - s[0][0]) * (s[1][1] - s[0][1])).abs()
            })
            .sum();
        dirichlet += (g[0] * g[0] + g[1] * g[1]) * area;
    }
    let report = SymmetrizationReport {
        positive_mass: total,
        outer_radius: outer,
        levels,
        equimeasurability,
        weighted_l2_star: l2_star,
        weighted_l2,
        dirichlet_star: dir_star,
        dirichlet,
    };
    Ok((profile, report))
}
