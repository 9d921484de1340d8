//! Domains, triangulation, and quadrature.

mod domain;
mod mesh;
mod mesher;
pub mod polar;
pub mod quadrature;

pub use domain::{BoundaryCurve, CurveId, DomainSpec};
pub use mesh::{Grading, Mesh, NodeMarker, ScalarField};
pub use mesher::{triangulate, triangulate_graded, triangulate_with, MeshOptions};
pub use polar::exterior_inverse_quartic;
pub use quadrature::{integrate, integrate_field};

/// A point in the plane.
pub type Point = [f64; 2];

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
