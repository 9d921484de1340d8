//! The entire solution `U = −2 log(1 + |x|²/8)` of `ΔU + e^U = 0` and the
//! kernel element `z = (8 − r²)/(8 + r²)` of its linearization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::quadrature::{composite_gauss, TriangleRule};
use crate::geometry::{triangulate, BoundaryCurve, DomainSpec, Point};
use crate::laplace::{eig_smallest, FemSpace};

pub const BUBBLE_ZERO: f64 = 2.828_427_124_746_190_3;

pub fn bubble_u(x: Point) -> f64 {
    bubble_u_radial(x[0].hypot(x[1]))
}

pub fn bubble_u_radial(r: f64) -> f64 {
    -2.0 * (1.0 + r * r / 8.0).ln()
}

pub fn bubble_z(r: f64) -> f64 {
    (8.0 - r * r) / (8.0 + r * r)
}

/// `∫_{B_r} e^U = 8πr²/(8 + r²)`.
pub fn bubble_mass(r: f64) -> f64 {
    if r.is_infinite() {
        return 8.0 * PI;
    }
    8.0 * PI * r * r / (8.0 + r * r)
}

/// Radius of the ball carrying mass `m ∈ [0, 8π)` of `e^U`.
pub fn bubble_radius(m: f64) -> f64 {
    if m >= 8.0 * PI {
        return f64::INFINITY;
    }
    (8.0 * m.max(0.0) / (8.0 * PI - m)).sqrt()
}

/// `ΔU + e^U` from the radial derivatives.
pub fn bubble_residual(r: f64) -> f64 {
    let s = 8.0 + r * r;
    let u1 = -4.0 * r / s;
    let u2 = -4.0 * (8.0 - r * r) / (s * s);
    let lap = if r > 0.0 { u2 + u1 / r } else { 2.0 * u2 };
    lap + bubble_u_radial(r).exp()
}

/// `Δz + e^U z` from the radial derivatives.
pub fn z_residual(r: f64) -> f64 {
    let s = 8.0 + r * r;
    let z1 = -32.0 * r / (s * s);
    let z2 = -32.0 * (8.0 - 3.0 * r * r) / (s * s * s);
    let lap = if r > 0.0 { z2 + z1 / r } else { 2.0 * z2 };
    lap + bubble_u_radial(r).exp() * bubble_z(r)
}

/// `∫_{B_R} e^U` by Gauss quadrature in the radius.
pub fn bubble_mass_quadrature(radius: f64, panels: usize) -> f64 {
    composite_gauss(0.0, radius, panels, 16).into_iter().map(|(r, w)| w * 2.0 * PI * r * bubble_u_radial(r).exp()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleEigen {
    /// Smallest `μ` with `Δψ + e^U ψ + μ e^U ψ = 0` on `B_√8`, `ψ = 0` on
    /// the boundary.
    pub value: f64,
    /// `|⟨ψ, z⟩| / (‖ψ‖ ‖z‖)` in `L²(e^U)`.
    pub correlation: f64,
    pub target_h: f64,
}

/// First eigenpair of `Δ + e^U` on `B_√8` with weight `e^U`.
pub fn bubble_eigen(target_h: f64) -> Result<BubbleEigen> {
    let spec = DomainSpec::new(BoundaryCurve::disk([0.0, 0.0], BUBBLE_ZERO), vec![])?;
    let mesh = triangulate(&spec, target_h)?;
    let space = FemSpace::new(&mesh)?;
    let rule = TriangleRule::DEGREE5;
    let mut w = Vec::with_capacity(mesh.triangles().len() * rule.weights.len());
    for t in 0..mesh.triangles().len() {
        let v = mesh.vertices(t);
        for b in rule.points {
            w.push(bubble_u(TriangleRule::map(*b, &v)).exp());
        }
    }
    let b = space.weighted_mass(rule, &w);
    let pair = eig_smallest(&space.stiffness(), &b, 1)?.remove(0);
    let z: Vec<f64> = space
        .free_nodes()
        .iter()
        .map(|&i| {
            let p = mesh.nodes()[i];
            bubble_z(p[0].hypot(p[1]))
        })
        .collect();
    let bz = b.apply(&z);
    let bpsi = b.apply(&pair.vector);
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let correlation = dot(&pair.vector, &bz).abs() / (dot(&pair.vector, &bpsi) * dot(&z, &bz)).sqrt();
    Ok(BubbleEigen { value: pair.value, correlation, target_h })
}
