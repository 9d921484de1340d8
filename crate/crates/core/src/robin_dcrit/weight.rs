//! Weights `h = exp(P)` with `P` a polynomial, harmonic unless a quartic
//! perturbation is switched on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// `coef · x₁^px · x₂^py`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub px: u32,
    pub py: u32,
    pub coef: f64,
}

impl Monomial {
    pub fn new(px: u32, py: u32, coef: f64) -> Self {
        Monomial { px, py, coef }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    #[default]
    ConstantOne,
    ExpHarmonic {
        terms: Vec<Monomial>,
    },
    /// `exp(P(x) − t·x₁⁴)`; not log-harmonic when `t ≠ 0`.
    ExpHarmonicPlusQuartic {
        harmonic: Vec<Monomial>,
        t: f64,
    },
}

impl WeightSpec {
    /// `exp(P)` after checking `ΔP = 0` coefficient by coefficient.
    pub fn exp_harmonic(terms: Vec<Monomial>) -> Result<Self> {
        let w = WeightSpec::ExpHarmonic { terms };
        w.validate()?;
        Ok(w)
    }

    pub fn exp_harmonic_plus_quartic(harmonic: Vec<Monomial>, t: f64) -> Result<Self> {
        let w = WeightSpec::ExpHarmonicPlusQuartic { harmonic, t };
        w.validate()?;
        Ok(w)
    }

    /// `ε((x₁ − q₁)² − (x₂ − q₂)²)` expanded into monomials.
    pub fn saddle_perturbation(eps: f64, q: Point) -> Vec<Monomial> {
        vec![
            Monomial::new(2, 0, eps),
            Monomial::new(1, 0, -2.0 * eps * q[0]),
            Monomial::new(0, 2, -eps),
            Monomial::new(0, 1, 2.0 * eps * q[1]),
            Monomial::new(0, 0, eps * (q[0] * q[0] - q[1] * q[1])),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let terms = self.harmonic_terms();
        if terms.iter().any(|m| !m.coef.is_finite()) {
            return Err(Error::InvalidWeight("non-finite coefficient".into()));
        }
        if let WeightSpec::ExpHarmonicPlusQuartic { t, .. } = self {
            if !t.is_finite() {
                return Err(Error::InvalidWeight("non-finite quartic coefficient".into()));
            }
        }
        let lap = laplacian(terms);
        let scale = terms.iter().map(|m| m.coef.abs()).fold(0.0, f64::max).max(1.0);
        if let Some(m) = lap.iter().find(|m| m.coef.abs() > 1e-12 * scale) {
            return Err(Error::InvalidWeight(format!(
                "log h is not harmonic: Laplacian has coefficient {} on x^{} y^{}",
                m.coef, m.px, m.py
            )));
        }
        Ok(())
    }

    /// True only for the kinds whose logarithm is harmonic.
    pub fn log_harmonic(&self) -> bool {
        match self {
            WeightSpec::ExpHarmonicPlusQuartic { t, .. } => *t == 0.0,
            _ => true,
        }
    }

    fn harmonic_terms(&self) -> &[Monomial] {
        match self {
            WeightSpec::ConstantOne => &[],
            WeightSpec::ExpHarmonic { terms } => terms,
            WeightSpec::ExpHarmonicPlusQuartic { harmonic, .. } => harmonic,
        }
    }

    fn quartic(&self) -> f64 {
        match self {
            WeightSpec::ExpHarmonicPlusQuartic { t, .. } => *t,
            _ => 0.0,
        }
    }

    pub fn log_h(&self, p: Point) -> f64 {
        let t = self.quartic();
        eval(self.harmonic_terms(), p) - t * p[0].powi(4)
    }

    pub fn h(&self, p: Point) -> f64 {
        self.log_h(p).exp()
    }

    pub fn grad_log_h(&self, p: Point) -> [f64; 2] {
        let terms = self.harmonic_terms();
        let t = self.quartic();
        [eval(&dx(terms), p) - 4.0 * t * p[0].powi(3), eval(&dy(terms), p)]
    }

    pub fn hessian_log_h(&self, p: Point) -> [[f64; 2]; 2] {
        let terms = self.harmonic_terms();
        let t = self.quartic();
        let xy = eval(&dy(&dx(terms)), p);
        [[eval(&dx(&dx(terms)), p) - 12.0 * t * p[0].powi(2), xy], [xy, eval(&dy(&dy(terms)), p)]]
    }

    pub fn laplacian_log_h(&self, p: Point) -> f64 {
        let hs = self.hessian_log_h(p);
        hs[0][0] + hs[1][1]
    }
}

fn eval(terms: &[Monomial], p: Point) -> f64 {
    terms.iter().map(|m| m.coef * p[0].powi(m.px as i32) * p[1].powi(m.py as i32)).sum()
}

fn dx(terms: &[Monomial]) -> Vec<Monomial> {
    terms.iter().filter(|m| m.px > 0).map(|m| Monomial::new(m.px - 1, m.py, m.coef * m.px as f64)).collect()
}

fn dy(terms: &[Monomial]) -> Vec<Monomial> {
    terms.iter().filter(|m| m.py > 0).map(|m| Monomial::new(m.px, m.py - 1, m.coef * m.py as f64)).collect()
}

/// Laplacian with like terms collected.
fn laplacian(terms: &[Monomial]) -> Vec<Monomial> {
    let mut all = dx(&dx(terms));
    all.extend(dy(&dy(terms)));
    let mut out: Vec<Monomial> = Vec::new();
    for m in all {
        match out.iter_mut().find(|o| o.px == m.px && o.py == m.py) {
            Some(o) => o.coef += m.coef,
            None => out.push(m),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_is_harmonic() {
        let w = WeightSpec::exp_harmonic(WeightSpec::saddle_perturbation(0.3, [0.2, -0.1])).unwrap();
        assert!(w.log_harmonic());
        assert!(w.laplacian_log_h([0.4, 0.7]).abs() < 1e-14);
        assert!((w.log_h([0.2, -0.1])).abs() < 1e-15);
    }

    #[test]
    fn non_harmonic_polynomial_rejected() {
        let r = WeightSpec::exp_harmonic(vec![Monomial::new(2, 0, 1.0)]);
        assert!(matches!(r, Err(Error::InvalidWeight(_))));
    }

    #[test]
    fn quartic_flagged() {
        let w = WeightSpec::exp_harmonic_plus_quartic(vec![Monomial::new(1, 0, 0.5)], 2.0).unwrap();
        assert!(!w.log_harmonic());
        let p = [0.3, 0.4];
        assert!((w.laplacian_log_h(p) + 24.0 * 0.09).abs() < 1e-12);
        let g = w.grad_log_h(p);
        assert!((g[0] - (0.5 - 8.0 * 0.027)).abs() < 1e-12 && g[1] == 0.0);
    }

    #[test]
    fn serde_roundtrip() {
        let w = WeightSpec::exp_harmonic(vec![Monomial::new(1, 0, 0.5)]).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("exp_harmonic"));
        let back: WeightSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
