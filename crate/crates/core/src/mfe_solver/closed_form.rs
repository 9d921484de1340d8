//! The radial family `u_μ(r) = 2 log((1+μ²)/(1+μ²r²))` solving the problem
//! on the unit disk with `h ≡ 1` and `ρ = 8πμ²/(1+μ²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mesh, ScalarField};

/// Exact diagnostics of `u_μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskBubble {
    pub mu: f64,
    pub rho: f64,
    pub lambda_blow: f64,
    #[serde(rename = "I_value")]
    pub i_value: f64,
    pub energy_e: f64,
    pub entropy_s: f64,
    pub max_u: f64,
    pub log_z: f64,
}

impl DiskBubble {
    /// The member with `μ² = ρ/(8π − ρ)`.
    pub fn at_rho(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 8.0 * PI) {
            return Err(Error::InvalidArgument(format!("rho = {rho} outside (0, 8π)")));
        }
        Ok(Self::at_mu((rho / (8.0 * PI - rho)).sqrt()))
    }

    pub fn at_mu(mu: f64) -> Self {
        let m2 = mu * mu;
        let a = 1.0 + m2;
        let log_a = a.ln();
        let rho = 8.0 * PI * m2 / a;
        // ∫|∇u|² = 16π(log A − μ²/A), ∫e^u = πA, ∫u e^u = 2πA²(log A − μ²/A)/μ²
        let dirichlet = 16.0 * PI * (log_a - m2 / a);
        let log_z = (PI * a).ln();
        let mean_u = if m2 > 1e-4 { 2.0 * a * log_a / m2 - 2.0 } else { m2 * (1.0 - m2 / 3.0 + m2 * m2 / 6.0) };
        DiskBubble {
            mu,
            rho,
            lambda_blow: log_a - PI.ln(),
            i_value: 0.5 * dirichlet - rho * log_z,
            energy_e: if rho > 0.0 { dirichlet / (2.0 * rho * rho) } else { 0.0 },
            entropy_s: log_z - mean_u,
            max_u: 2.0 * log_a,
            log_z,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let m2 = self.mu * self.mu;
        2.0 * ((1.0 + m2) / (1.0 + m2 * r * r)).ln()
    }

    /// `u_μ` at the nodes of `mesh`, with boundary nodes set to zero.
    pub fn field(&self, mesh: &Mesh) -> ScalarField {
        let mut f = ScalarField::from_fn(mesh, |p| self.eval(p[0].hypot(p[1])));
        for (i, v) in f.values_mut().iter_mut().enumerate() {
            if mesh.is_boundary(i) {
                *v = 0.0;
            }
        }
        f
    }
}
