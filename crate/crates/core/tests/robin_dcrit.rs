use std::f64::consts::PI;

use mfelab::geometry::{triangulate, BoundaryCurve, DomainSpec};
use mfelab::laplace::green_regular;
use mfelab::robin_dcrit::{
    classify, compute_d, compute_d_with, find_max_point, AngularRule, DOptions, Kind, Monomial, WeightSpec,
};
use mfelab::Error;

fn offset_annulus() -> DomainSpec {
    DomainSpec::annulus([0.3, 0.0], 0.02).unwrap()
}

#[test]
fn disk_maximizer_at_center_and_first_kind() {
    let spec = DomainSpec::unit_disk();
    let mesh = triangulate(&spec, 0.04).unwrap();
    let m = find_max_point(&mesh, &WeightSpec::ConstantOne).unwrap();
    assert!(m.q[0].hypot(m.q[1]) < 1e-3, "{:?}", m.q);
    assert!(m.grad_norm <= 1e-3 * m.range);
    // 4πγ = 2 log(1 − r²) has Hessian −4 I at the center
    assert!((m.hessian[0][0] + 4.0).abs() < 0.05 && (m.hessian[1][1] + 4.0).abs() < 0.05);
    assert!(!m.degenerate && m.secondary.is_empty());

    let r = classify(&spec, &mesh, &WeightSpec::ConstantOne).unwrap();
    assert_eq!(r.verdict, Kind::FirstKind);
    assert!((r.d_value + PI).abs() < 0.02 * PI, "D = {}", r.d_value);
}

#[test]
fn disks_of_any_radius_and_center() {
    for (c, radius) in [([0.0, 0.0], 0.5), ([0.7, -0.3], 2.0)] {
        let spec = DomainSpec::new(BoundaryCurve::disk(c, radius), vec![]).unwrap();
        let mesh = triangulate(&spec, 0.04 * radius).unwrap();
        let robin = green_regular(&mesh, c).unwrap();
        let d = compute_d(&spec, &mesh, &WeightSpec::ConstantOne, c, &robin, 0.3 * radius).unwrap();
        let exact = -PI / (radius * radius);
        assert!((d - exact).abs() < 0.02 * exact.abs(), "R = {radius}: {d} vs {exact}");
    }
}

#[test]
fn ellipse_maximizer_at_center() {
    let spec = DomainSpec::new(BoundaryCurve::ellipse(2.0, 0.5), vec![]).unwrap();
    let mesh = triangulate(&spec, 0.04).unwrap();
    let m = find_max_point(&mesh, &WeightSpec::ConstantOne).unwrap();
    assert!(m.q[0].hypot(m.q[1]) < 1e-3, "{:?}", m.q);
}

#[test]
fn concentric_annulus_has_circle_of_maximizers() {
    let spec = DomainSpec::annulus([0.0, 0.0], 0.25).unwrap();
    let mesh = triangulate(&spec, 0.04).unwrap();
    let m = find_max_point(&mesh, &WeightSpec::ConstantOne).unwrap();
    assert!(m.degenerate);
    let radius = m.q[0].hypot(m.q[1]);
    assert!(radius > 0.4 && radius < 0.8);
    for k in 0..8 {
        let th = 2.0 * PI * k as f64 / 8.0;
        let p = [radius * th.cos(), radius * th.sin()];
        let g = green_regular(&mesh, p).unwrap().circle_mean(&mesh, 0.1, 128).unwrap();
        assert!((4.0 * PI * g - m.value).abs() < 1e-3, "θ = {th}: {} vs {}", 4.0 * PI * g, m.value);
    }
    let r = classify(&spec, &mesh, &WeightSpec::ConstantOne).unwrap();
    assert_eq!(r.verdict, Kind::SecondKind);
    assert!(r.d_value > 0.0);
}

#[test]
fn offset_hole_annulus_is_first_kind() {
    let spec = offset_annulus();
    let mesh = triangulate(&spec, 0.04).unwrap();
    let r = classify(&spec, &mesh, &WeightSpec::ConstantOne).unwrap();
    assert_eq!(r.verdict, Kind::FirstKind);
    assert!((r.q[0] + 0.253).abs() < 0.01 && r.q[1].abs() < 1e-3, "{:?}", r.q);
    let h = r.hessian;
    assert!(h[0][0] < 0.0 && h[0][0] * h[1][1] - h[0][1] * h[1][0] > 0.0);
    // the maximizer is unique
    let m = find_max_point(&mesh, &WeightSpec::ConstantOne).unwrap();
    assert!(m.secondary.iter().all(|s| s.1 < m.value - 1e-3));
}

#[test]
fn d_is_delta_independent() {
    let spec = offset_annulus();
    let mesh = triangulate(&spec, 0.04).unwrap();
    let q = find_max_point(&mesh, &WeightSpec::ConstantOne).unwrap().q;
    let robin = green_regular(&mesh, q).unwrap();
    let d1 = compute_d(&spec, &mesh, &WeightSpec::ConstantOne, q, &robin, 0.1).unwrap();
    let d2 = compute_d(&spec, &mesh, &WeightSpec::ConstantOne, q, &robin, 0.05).unwrap();
    let d3 = compute_d(&spec, &mesh, &WeightSpec::ConstantOne, q, &robin, 0.025).unwrap();
    assert!((d1 - d2).abs() < 1e-4 && (d2 - d3).abs() < 1e-4, "{d1} {d2} {d3}");
}

#[test]
fn symmetric_angular_rule_is_needed() {
    let spec = offset_annulus();
    let mesh = triangulate(&spec, 0.04).unwrap();
    let q = find_max_point(&mesh, &WeightSpec::ConstantOne).unwrap().q;
    let robin = green_regular(&mesh, q).unwrap();
    let inner = |rule: AngularRule, delta: f64| {
        let opts = DOptions { angular: rule, ..DOptions::default() };
        compute_d_with(&spec, &mesh, &WeightSpec::ConstantOne, q, &robin, delta, &opts).unwrap()
    };
    let sym = AngularRule::Symmetric { count: 16 };
    let jit = AngularRule::Jittered { count: 16, seed: 7 };
    let (s1, s2) = (inner(sym, 0.02).value, inner(sym, 1e-4).value);
    assert!((s1 - s2).abs() < 1e-4, "{s1} {s2}");
    let (j1, j2) = (inner(jit, 0.02).value, inner(jit, 1e-4).value);
    assert!((j1 - j2).abs() > 0.1, "{j1} {j2}");
}

#[test]
fn rectangle_is_second_kind() {
    let spec = DomainSpec::new(BoundaryCurve::rectangle(4.0, 0.5), vec![]).unwrap();
    let mesh = triangulate(&spec, 0.03).unwrap();
    let r = classify(&spec, &mesh, &WeightSpec::ConstantOne).unwrap();
    assert_eq!(r.verdict, Kind::SecondKind);
    assert!(r.q[1].abs() < 1e-3);
}

#[test]
fn non_critical_point_rejected() {
    let spec = DomainSpec::unit_disk();
    let mesh = triangulate(&spec, 0.05).unwrap();
    let q = [0.3, 0.0];
    let robin = green_regular(&mesh, q).unwrap();
    let r = compute_d(&spec, &mesh, &WeightSpec::ConstantOne, q, &robin, 0.1);
    assert!(matches!(r, Err(Error::NotCritical { .. })));
    let r =
        compute_d(&spec, &mesh, &WeightSpec::ConstantOne, [0.0, 0.0], &green_regular(&mesh, [0.0, 0.0]).unwrap(), 1.2);
    assert!(matches!(r, Err(Error::DeltaTooLarge { .. })));
}

#[test]
fn weight_can_shift_the_maximizer() {
    let spec = DomainSpec::unit_disk();
    let mesh = triangulate(&spec, 0.04).unwrap();
    // log h + 4πγ = x + 2 log(1 − r²) peaks where 4x = 1 − x²
    let w = WeightSpec::exp_harmonic(vec![Monomial::new(1, 0, 1.0)]).unwrap();
    let m = find_max_point(&mesh, &w).unwrap();
    let x = -2.0 + 5.0f64.sqrt();
    assert!((m.q[0] - x).abs() < 2e-3 && m.q[1].abs() < 1e-3, "{:?}", m.q);

    let steep = WeightSpec::exp_harmonic(vec![Monomial::new(1, 0, 60.0)]).unwrap();
    assert!(matches!(find_max_point(&mesh, &steep), Err(Error::MaximizerOnBoundaryRing { .. })));
}

#[test]
fn saddle_weight_keeps_center_critical() {
    let spec = DomainSpec::unit_disk();
    let mesh = triangulate(&spec, 0.04).unwrap();
    let w = WeightSpec::exp_harmonic(WeightSpec::saddle_perturbation(0.5, [0.0, 0.0])).unwrap();
    let robin = green_regular(&mesh, [0.0, 0.0]).unwrap();
    let d = compute_d(&spec, &mesh, &w, [0.0, 0.0], &robin, 0.2).unwrap();
    assert!(d.is_finite() && d < 0.0);
    let m = find_max_point(&mesh, &w).unwrap();
    assert!((m.hessian[0][0] - (-4.0 + 1.0)).abs() < 0.05, "{:?}", m.hessian);
    assert!((m.hessian[1][1] - (-4.0 - 1.0)).abs() < 0.05);
}
