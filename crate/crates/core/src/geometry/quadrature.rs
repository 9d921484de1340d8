//! Composite quadrature on meshes and one-dimensional Gauss rules.

use super::{Mesh, Point};
use crate::error::{Error, Result};

/// A symmetric rule on the reference triangle: barycentric points and
/// weights summing to one.
#[derive(Clone, Copy, Debug)]
pub struct TriangleRule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.091_576_213_509_771;
const W4A: f64 = 0.223_381_589_678_011;
const W4B: f64 = 0.109_951_743_655_322;

const A5: f64 = 0.101_286_507_323_456_33;
const B5: f64 = 0.470_142_064_105_115_05;
const W5A: f64 = 0.125_939_180_544_827_17;
const W5B: f64 = 0.132_394_152_788_506_16;

impl TriangleRule {
    /// Exact for quadratics.
    pub const DEGREE2: TriangleRule = TriangleRule {
        points: &[
            [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
            [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
        ],
        weights: &[1.0 / 3.0; 3],
    };

    /// Six points, exact for quartics.
    pub const DEGREE4: TriangleRule = TriangleRule {
        points: &[
            [A4, A4, 1.0 - 2.0 * A4],
            [A4, 1.0 - 2.0 * A4, A4],
            [1.0 - 2.0 * A4, A4, A4],
            [B4, B4, 1.0 - 2.0 * B4],
            [B4, 1.0 - 2.0 * B4, B4],
            [1.0 - 2.0 * B4, B4, B4],
        ],
        weights: &[W4A, W4A, W4A, W4B, W4B, W4B],
    };

    /// Seven points, exact for quintics.
    pub const DEGREE5: TriangleRule = TriangleRule {
        points: &[
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [A5, A5, 1.0 - 2.0 * A5],
            [A5, 1.0 - 2.0 * A5, A5],
            [1.0 - 2.0 * A5, A5, A5],
            [B5, B5, 1.0 - 2.0 * B5],
            [B5, 1.0 - 2.0 * B5, B5],
            [1.0 - 2.0 * B5, B5, B5],
        ],
        weights: &[0.225, W5A, W5A, W5A, W5B, W5B, W5B],
    };

    pub fn map(bary: [f64; 3], v: &[Point; 3]) -> Point {
        [
            bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0],
            bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1],
        ]
    }
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Composite integral of a pointwise function over the mesh.
pub fn integrate(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<f64> {
    integrate_with(mesh, TriangleRule::DEGREE5, |_, p, _| f(p), None)
}

/// Composite integral of `f(x, v(x))` where `v` is the P1 interpolant of
/// the nodal field `values`.
pub fn integrate_field(mesh: &Mesh, values: &[f64], f: impl Fn(Point, f64) -> f64) -> Result<f64> {
    integrate_with(mesh, TriangleRule::DEGREE5, |_, p, v| f(p, v), Some(values))
}

/// General form: `f(triangle, x, field value)` with a chosen rule.
pub fn integrate_with(
    mesh: &Mesh,
    rule: TriangleRule,
    f: impl Fn(usize, Point, f64) -> f64,
    values: Option<&[f64]>,
) -> Result<f64> {
    let mut total = CompensatedSum::default();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices(t);
        let area = mesh.area(t);
        let mut local = 0.0;
        for (b, w) in rule.points.iter().zip(rule.weights) {
            let x = TriangleRule::map(*b, &v);
            let fv = values.map_or(0.0, |vals| b[0] * vals[tri[0]] + b[1] * vals[tri[1]] + b[2] * vals[tri[2]]);
            let y = f(t, x, fv);
            if !y.is_finite() {
                return Err(Error::NonFiniteIntegrand { x: x[0], y: x[1] });
            }
            local += w * y;
        }
        total.add(area * local);
    }
    Ok(total.value())
}

/// Splits a triangle by the zero set of the linear interpolant of `phi`,
/// returning sub-triangles on the positive and the non-positive side.
pub fn clip_triangle(v: [Point; 3], phi: [f64; 3]) -> (Vec<[Point; 3]>, Vec<[Point; 3]>) {
    let pos: Vec<usize> = (0..3).filter(|&k| phi[k] > 0.0).collect();
    match pos.len() {
        0 => (vec![], vec![v]),
        3 => (vec![v], vec![]),
        _ => {
            let lone_positive = pos.len() == 1;
            let lone = if lone_positive { pos[0] } else { (0..3).find(|k| phi[*k] <= 0.0).unwrap() };
            let (a, b) = ((lone + 1) % 3, (lone + 2) % 3);
            let cut = |i: usize, j: usize| {
                let s = phi[i] / (phi[i] - phi[j]);
                [v[i][0] + s * (v[j][0] - v[i][0]), v[i][1] + s * (v[j][1] - v[i][1])]
            };
            let (pa, pb) = (cut(lone, a), cut(lone, b));
            let tip = vec![[v[lone], pa, pb]];
            let quad = vec![[pa, v[a], v[b]], [pa, v[b], pb]];
            if lone_positive {
                (tip, quad)
            } else {
                (quad, tip)
            }
        }
    }
}

fn tri_area(v: &[Point; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])).abs()
}

/// Integrals of `f(triangle, x)` over `{phi > 0}` and `{phi <= 0}`.
///
/// Triangles where `phi` changes sign are subdivided `depth` times and the
/// leaves are clipped against the linear interpolant of `phi`.
pub fn integrate_split(
    mesh: &Mesh,
    rule: TriangleRule,
    phi: impl Fn(Point) -> f64,
    f: impl Fn(usize, Point) -> f64,
    depth: u32,
) -> Result<(f64, f64)> {
    let mut pos = CompensatedSum::default();
    let mut neg = CompensatedSum::default();
    let node_phi: Vec<f64> = mesh.nodes().iter().map(|&p| phi(p)).collect();
    let rule_sum = |t: usize, v: &[Point; 3]| -> Result<f64> {
        let mut s = 0.0;
        for (b, w) in rule.points.iter().zip(rule.weights) {
            let x = TriangleRule::map(*b, v);
            let y = f(t, x);
            if !y.is_finite() {
                return Err(Error::NonFiniteIntegrand { x: x[0], y: x[1] });
            }
            s += w * y;
        }
        Ok(s * tri_area(v))
    };
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices(t);
        let ph = [node_phi[tri[0]], node_phi[tri[1]], node_phi[tri[2]]];
        if ph.iter().all(|&x| x > 0.0) {
            pos.add(rule_sum(t, &v)?);
            continue;
        }
        if ph.iter().all(|&x| x <= 0.0) {
            neg.add(rule_sum(t, &v)?);
            continue;
        }
        let mut stack = vec![(v, ph, 0u32)];
        while let Some((v, ph, d)) = stack.pop() {
            let mixed = ph.iter().any(|&x| x > 0.0) && ph.iter().any(|&x| x <= 0.0);
            if !mixed {
                let s = rule_sum(t, &v)?;
                if ph[0] > 0.0 {
                    pos.add(s)
                } else {
                    neg.add(s)
                }
            } else if d >= depth {
                let (p, n) = clip_triangle(v, ph);
                for sub in p {
                    pos.add(rule_sum(t, &sub)?);
                }
                for sub in n {
                    neg.add(rule_sum(t, &sub)?);
                }
            } else {
                let m = |i: usize, j: usize| [(v[i][0] + v[j][0]) * 0.5, (v[i][1] + v[j][1]) * 0.5];
                let (m01, m12, m20) = (m(0, 1), m(1, 2), m(2, 0));
                let (f01, f12, f20) = (phi(m01), phi(m12), phi(m20));
                stack.push(([v[0], m01, m20], [ph[0], f01, f20], d + 1));
                stack.push(([m01, v[1], m12], [f01, ph[1], f12], d + 1));
                stack.push(([m20, m12, v[2]], [f20, f12, ph[2]], d + 1));
                stack.push(([m01, m12, m20], [f01, f12, f20], d + 1));
            }
        }
    }
    Ok((pos.value(), neg.value()))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `pieces` panels.
pub fn composite_gauss(a: f64, b: f64, pieces: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::with_capacity(pieces * order);
    let h = (b - a) / pieces as f64;
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}
