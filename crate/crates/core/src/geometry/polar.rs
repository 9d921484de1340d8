//! Integrals in polar coordinates centred at an interior point, using the
//! exact ray/boundary crossings of the analytic domain.

use std::f64::consts::PI;

use super::quadrature::{composite_gauss, CompensatedSum};
use super::{DomainSpec, Point};
use crate::error::{Error, Result};

/// Radial intervals `[a, b)` along the ray from `q` (inside the domain) in
/// direction `dir` that lie inside the domain. The last exterior stretch is
/// unbounded and not returned.
pub fn inside_intervals(spec: &DomainSpec, q: Point, dir: Point) -> Vec<(f64, f64)> {
    let mut hits: Vec<f64> = spec.curves().flat_map(|(_, c)| c.ray_crossings(q, dir)).collect();
    hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(hits.len() / 2 + 1);
    let mut start = 0.0;
    let mut inside = true;
    for t in hits {
        if inside {
            out.push((start, t));
        } else {
            start = t;
        }
        inside = !inside;
    }
    out
}

/// Angular nodes and weights on `[0, 2π)` with panel breaks at the
/// directions where crossings are not smooth.
pub fn angular_rule(spec: &DomainSpec, q: Point, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let mut breaks: Vec<f64> =
        spec.curves().flat_map(|(_, c)| c.angular_breakpoints(q)).map(|a| a.rem_euclid(2.0 * PI)).collect();
    breaks.push(0.0);
    breaks.push(2.0 * PI);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        let pieces = ((len / (2.0 * PI) * panels as f64).ceil() as usize).max(1);
        out.extend(composite_gauss(w[0], w[1], pieces, order));
    }
    out
}

/// `∫_{Ω^c} |x − q|⁻⁴ dx`, evaluated through the identity
/// `π/δ² − ∫_{Ω∖B(q,δ)} |x − q|⁻⁴ dx` with the radial integral done in
/// closed form on each ray.
pub fn exterior_inverse_quartic(spec: &DomainSpec, q: Point, delta: f64) -> Result<f64> {
    let max = if spec.contains(q) { spec.distance_to_boundary(q) } else { 0.0 };
    if !(delta > 0.0 && delta < max) {
        return Err(Error::DeltaTooLarge { delta, max });
    }
    let mut inner = CompensatedSum::default();
    for (theta, w) in angular_rule(spec, q, 256, 20) {
        let dir = [theta.cos(), theta.sin()];
        let mut ray = 0.0;
        for (k, (a, b)) in inside_intervals(spec, q, dir).into_iter().enumerate() {
            let a = if k == 0 { delta } else { a };
            ray += 0.5 * (a.powi(-2) - b.powi(-2));
        }
        inner.add(w * ray);
    }
    Ok(PI / (delta * delta) - inner.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;

    #[test]
    fn unit_disk_center_gives_pi() {
        let v = exterior_inverse_quartic(&DomainSpec::unit_disk(), [0.0, 0.0], 0.1).unwrap();
        assert!((v - PI).abs() < 1e-10);
    }

    #[test]
    fn delta_independence() {
        let spec = DomainSpec::annulus([0.4, 0.1], 0.15).unwrap();
        let q = [-0.2, 0.05];
        let a = exterior_inverse_quartic(&spec, q, 0.1).unwrap();
        let b = exterior_inverse_quartic(&spec, q, 0.2).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn off_center_disk_matches_closed_form() {
        // ∫_{|x|>1} |x−q|⁻⁴ = π/(1−|q|²)² by inversion
        let q = [0.3, -0.4];
        let v = exterior_inverse_quartic(&DomainSpec::unit_disk(), q, 0.2).unwrap();
        let r2 = q[0] * q[0] + q[1] * q[1];
        assert!((v - PI / (1.0 - r2).powi(2)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn square_exterior_matches_polar_closed_form() {
        // 8 · ½∫_0^{π/4} cos²θ dθ = π/2 + 1
        let spec = DomainSpec::new(BoundaryCurve::rectangle(2.0, 2.0), vec![]).unwrap();
        let v = exterior_inverse_quartic(&spec, [0.0, 0.0], 0.5).unwrap();
        assert!((v - (PI / 2.0 + 1.0)).abs() < 1e-10, "{v}");
    }

    #[test]
    fn oversized_delta_rejected() {
        let r = exterior_inverse_quartic(&DomainSpec::unit_disk(), [0.5, 0.0], 0.6);
        assert!(matches!(r, Err(Error::DeltaTooLarge { .. })));
    }
}
