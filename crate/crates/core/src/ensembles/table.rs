use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfe_solver::{Branch, Termination};
use crate::robin_dcrit::Kind;

/// Fewest rows [`legendre_check`] accepts.
pub const MIN_ROWS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub beta: f64,
    pub lambda: f64,
    /// Free energy per unit inverse temperature, `J_λ` at the solution.
    pub f: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "S")]
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTable {
    pub domain: String,
    pub kind: Kind,
    /// Sorted by increasing `beta`.
    pub rows: Vec<EnsembleRow>,
}

impl EnsembleTable {
    /// Rows whose `λ` lies within `tol` of an entry of `lambdas`.
    pub fn restrict(&self, lambdas: &[f64], tol: f64) -> EnsembleTable {
        let rows = self.rows.iter().filter(|r| lambdas.iter().any(|l| (r.lambda - l).abs() <= tol)).copied().collect();
        EnsembleTable { domain: self.domain.clone(), kind: self.kind, rows }
    }

    /// `E` at the `ρ = 8π` end of a second-kind branch.
    pub fn critical_energy(&self) -> Option<f64> {
        match self.kind {
            Kind::SecondKind => self.rows.first().map(|r| r.energy),
            Kind::FirstKind => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("beta,lambda,f,F,E,S\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.beta, r.lambda, r.f, r.big_f, r.energy, r.entropy
            ));
        }
        s
    }
}

/// `n` values of `λ` in `[lo, hi]`, uniform in `log(8π − λ)` so that rows
/// cluster where `E` grows.
pub fn ensemble_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let c = 8.0 * PI;
    if !(n >= 2 && lo > 0.0 && lo < hi && hi < c) {
        return Err(Error::InvalidArgument(format!("need 0 < lo < hi < 8π and n ≥ 2; got {lo}, {hi}, {n}")));
    }
    let (a, b) = ((c - lo).ln(), (c - hi).ln());
    Ok((0..n).map(|k| c - (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect())
}

/// One row per branch point, with `β = −ρ`.
pub fn canonical_table(branch: &Branch, domain: &str) -> Result<EnsembleTable> {
    let mut rows: Vec<EnsembleRow> = branch
        .points
        .iter()
        .filter(|p| p.rho > 0.0)
        .map(|p| {
            let lambda = p.rho;
            // ∫|∇u|² = 2λ²E
            let f = -p.energy_e + p.log_z / lambda;
            EnsembleRow { beta: -lambda, lambda, f, big_f: lambda * f, energy: p.energy_e, entropy: p.entropy_s }
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyBranch);
    }
    rows.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    let kind = match branch.termination {
        Termination::ConvergedAt8pi => Kind::SecondKind,
        _ => Kind::FirstKind,
    };
    Ok(EnsembleTable { domain: domain.to_string(), kind, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreReport {
    /// `max |S − (F + βE)|` over interior rows.
    pub residual_s: f64,
    /// `max |E + F′(β)|` over interior rows, `F′` by centered differences.
    pub residual_e: f64,
    pub max_abs_f: f64,
    pub max_abs_e: f64,
    /// Discrete second differences of `F` are positive.
    pub convex: bool,
    /// First differences of `F` are negative.
    pub decreasing: bool,
    /// First differences of `E` are negative.
    pub energy_decreasing: bool,
}

impl LegendreReport {
    pub fn passes(&self, tol_s: f64, tol_e: f64) -> bool {
        self.residual_s <= tol_s * self.max_abs_f && self.residual_e <= tol_e * self.max_abs_e
    }
}

pub fn legendre_check(table: &EnsembleTable) -> Result<LegendreReport> {
    let rows = &table.rows;
    if rows.len() < MIN_ROWS {
        return Err(Error::TableTooSmall { rows: rows.len(), required: MIN_ROWS });
    }
    let (mut residual_s, mut residual_e) = (0.0f64, 0.0f64);
    let mut convex = true;
    for w in rows.windows(3) {
        let [a, b, c] = [w[0], w[1], w[2]];
        residual_s = residual_s.max((b.entropy - (b.big_f + b.beta * b.energy)).abs());
        let (h0, h1) = (b.beta - a.beta, c.beta - b.beta);
        // second-order derivative on a nonuniform grid
        let slope =
            (-h1 / (h0 * (h0 + h1))) * a.big_f + ((h1 - h0) / (h0 * h1)) * b.big_f + (h0 / (h1 * (h0 + h1))) * c.big_f;
        residual_e = residual_e.max((b.energy + slope).abs());
        convex &= (c.big_f - b.big_f) / h1 > (b.big_f - a.big_f) / h0;
    }
    let decreasing = rows.windows(2).all(|w| w[1].big_f < w[0].big_f);
    let energy_decreasing = rows.windows(2).all(|w| w[1].energy < w[0].energy);
    Ok(LegendreReport {
        residual_s,
        residual_e,
        max_abs_f: rows.iter().map(|r| r.big_f.abs()).fold(0.0, f64::max),
        max_abs_e: rows.iter().map(|r| r.energy.abs()).fold(0.0, f64::max),
        convex,
        decreasing,
        energy_decreasing,
    })
}
