//! Analytic descriptions of bounded planar domains with holes.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{dist, Point};
use crate::error::{Error, Result};

/// One closed boundary curve.
///
/// Shapes are stored in their natural counterclockwise parametrization;
/// curves used as holes are traversed clockwise when sampled for a mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum BoundaryCurve {
    Disk {
        center: Point,
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: Point,
        a: f64,
        b: f64,
    },
    Rectangle {
        #[serde(default)]
        center: Point,
        width: f64,
        height: f64,
    },
    Polygon {
        vertices: Vec<Point>,
    },
}

/// Which curve of a domain a boundary object belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveId {
    Outer,
    Hole(usize),
}

impl BoundaryCurve {
    pub fn disk(center: Point, radius: f64) -> Self {
        BoundaryCurve::Disk { center, radius }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        BoundaryCurve::Ellipse { center: [0.0, 0.0], a, b }
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        BoundaryCurve::Rectangle { center: [0.0, 0.0], width, height }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidDomain(m.to_string()));
        match self {
            BoundaryCurve::Disk { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return bad("disk radius must be positive and finite");
                }
            }
            BoundaryCurve::Ellipse { a, b, .. } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return bad("ellipse semi-axes must be positive");
                }
            }
            BoundaryCurve::Rectangle { width, height, .. } => {
                if !(width.is_finite() && height.is_finite() && *width > 0.0 && *height > 0.0) {
                    return bad("rectangle sides must be positive");
                }
            }
            BoundaryCurve::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return bad("polygon needs at least three vertices");
                }
                if signed_area(vertices) <= 0.0 {
                    return bad("polygon vertices must be counterclockwise");
                }
                let n = vertices.len();
                for i in 0..n {
                    for j in i + 1..n {
                        if j == i + 1 || (i == 0 && j == n - 1) {
                            continue;
                        }
                        if segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]) {
                            return bad("polygon is not simple");
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn corners(&self) -> Option<Vec<Point>> {
        match self {
            BoundaryCurve::Rectangle { center, width, height } => {
                let (w, h) = (0.5 * width, 0.5 * height);
                Some(vec![
                    [center[0] - w, center[1] - h],
                    [center[0] + w, center[1] - h],
                    [center[0] + w, center[1] + h],
                    [center[0] - w, center[1] + h],
                ])
            }
            BoundaryCurve::Polygon { vertices } => Some(vertices.clone()),
            _ => None,
        }
    }

    /// Strict interior test.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            BoundaryCurve::Disk { center, radius } => dist(p, *center) < *radius,
            BoundaryCurve::Ellipse { center, a, b } => {
                let (x, y) = ((p[0] - center[0]) / a, (p[1] - center[1]) / b);
                x * x + y * y < 1.0
            }
            BoundaryCurve::Rectangle { center, width, height } => {
                (p[0] - center[0]).abs() < 0.5 * width && (p[1] - center[1]).abs() < 0.5 * height
            }
            BoundaryCurve::Polygon { vertices } => {
                point_in_polygon(p, vertices) && polyline_distance(p, vertices) > 0.0
            }
        }
    }

    /// Unsigned distance from `p` to the curve.
    pub fn distance(&self, p: Point) -> f64 {
        match self {
            BoundaryCurve::Disk { center, radius } => (dist(p, *center) - radius).abs(),
            BoundaryCurve::Ellipse { .. } => dist(p, self.project(p)),
            _ => polyline_distance(p, &self.corners().unwrap()),
        }
    }

    /// Nearest point on the curve.
    pub fn project(&self, p: Point) -> Point {
        match self {
            BoundaryCurve::Disk { center, radius } => {
                let d = dist(p, *center);
                if d == 0.0 {
                    return [center[0] + radius, center[1]];
                }
                [center[0] + radius * (p[0] - center[0]) / d, center[1] + radius * (p[1] - center[1]) / d]
            }
            BoundaryCurve::Ellipse { center, a, b } => {
                let t = ellipse_closest_param(p[0] - center[0], p[1] - center[1], *a, *b);
                [center[0] + a * t.cos(), center[1] + b * t.sin()]
            }
            _ => {
                let v = self.corners().unwrap();
                let n = v.len();
                let mut best = v[0];
                let mut best_d = f64::INFINITY;
                for i in 0..n {
                    let c = closest_on_segment(p, v[i], v[(i + 1) % n]);
                    let d = dist(p, c);
                    if d < best_d {
                        best_d = d;
                        best = c;
                    }
                }
                best
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            BoundaryCurve::Disk { radius, .. } => PI * radius * radius,
            BoundaryCurve::Ellipse { a, b, .. } => PI * a * b,
            BoundaryCurve::Rectangle { width, height, .. } => width * height,
            BoundaryCurve::Polygon { vertices } => signed_area(vertices),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            BoundaryCurve::Disk { radius, .. } => 2.0 * PI * radius,
            BoundaryCurve::Ellipse { a, b, .. } => {
                let table = ellipse_arc_table(*a, *b);
                *table.last().unwrap()
            }
            _ => {
                let v = self.corners().unwrap();
                (0..v.len()).map(|i| dist(v[i], v[(i + 1) % v.len()])).sum()
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            BoundaryCurve::Disk { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            BoundaryCurve::Ellipse { center, a, b } => ([center[0] - a, center[1] - b], [center[0] + a, center[1] + b]),
            _ => {
                let v = self.corners().unwrap();
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for p in &v {
                    for k in 0..2 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Points on the curve in counterclockwise order with arc-length
    /// spacing at most `spacing` and at least `min_count` points.
    /// Corners of polygons are always included.
    pub fn sample(&self, spacing: f64, min_count: usize) -> Vec<Point> {
        match self {
            BoundaryCurve::Disk { center, radius } => {
                let n = ((2.0 * PI * radius / spacing).ceil() as usize).max(min_count).max(3);
                (0..n)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / n as f64;
                        [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                    })
                    .collect()
            }
            BoundaryCurve::Ellipse { center, a, b } => {
                let table = ellipse_arc_table(*a, *b);
                let total = *table.last().unwrap();
                let n = ((total / spacing).ceil() as usize).max(min_count).max(3);
                let m = table.len() - 1;
                let mut out = Vec::with_capacity(n);
                let mut j = 0;
                for k in 0..n {
                    let s = total * k as f64 / n as f64;
                    while j + 1 < m && table[j + 1] < s {
                        j += 1;
                    }
                    let seg = table[j + 1] - table[j];
                    let frac = if seg > 0.0 { (s - table[j]) / seg } else { 0.0 };
                    let t = 2.0 * PI * (j as f64 + frac) / m as f64;
                    out.push([center[0] + a * t.cos(), center[1] + b * t.sin()]);
                }
                out
            }
            _ => {
                let v = self.corners().unwrap();
                let per: f64 = self.perimeter();
                let spacing = spacing.min(per / min_count.max(3) as f64);
                let n = v.len();
                let mut out = Vec::new();
                for i in 0..n {
                    let (p0, p1) = (v[i], v[(i + 1) % n]);
                    let m = ((dist(p0, p1) / spacing).ceil() as usize).max(1);
                    for k in 0..m {
                        let s = k as f64 / m as f64;
                        out.push([p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])]);
                    }
                }
                out
            }
        }
    }

    /// Distances `t > 0` at which the ray `origin + t·dir` (unit `dir`)
    /// crosses the curve.
    pub fn ray_crossings(&self, origin: Point, dir: Point) -> Vec<f64> {
        let quad = |qa: f64, qb: f64, qc: f64| -> Vec<f64> {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc <= 0.0 {
                return vec![];
            }
            let s = disc.sqrt();
            // stable roots
            let q = -0.5 * (qb + qb.signum() * s);
            let mut r = vec![q / qa, qc / q];
            r.retain(|t| *t > 0.0 && t.is_finite());
            r.sort_by(|x, y| x.partial_cmp(y).unwrap());
            r
        };
        match self {
            BoundaryCurve::Disk { center, radius } => {
                let o = [origin[0] - center[0], origin[1] - center[1]];
                quad(1.0, 2.0 * (o[0] * dir[0] + o[1] * dir[1]), o[0] * o[0] + o[1] * o[1] - radius * radius)
            }
            BoundaryCurve::Ellipse { center, a, b } => {
                let o = [(origin[0] - center[0]) / a, (origin[1] - center[1]) / b];
                let d = [dir[0] / a, dir[1] / b];
                quad(d[0] * d[0] + d[1] * d[1], 2.0 * (o[0] * d[0] + o[1] * d[1]), o[0] * o[0] + o[1] * o[1] - 1.0)
            }
            _ => {
                let v = self.corners().unwrap();
                let n = v.len();
                let mut out = Vec::new();
                for i in 0..n {
                    let (p0, p1) = (v[i], v[(i + 1) % n]);
                    let e = [p1[0] - p0[0], p1[1] - p0[1]];
                    let den = dir[0] * e[1] - dir[1] * e[0];
                    if den.abs() < 1e-300 {
                        continue;
                    }
                    let w = [p0[0] - origin[0], p0[1] - origin[1]];
                    let t = (w[0] * e[1] - w[1] * e[0]) / den;
                    let s = (w[0] * dir[1] - w[1] * dir[0]) / den;
                    // half-open edge parameter so a ray through a vertex counts once
                    if t > 0.0 && (0.0..1.0).contains(&s) {
                        out.push(t);
                    }
                }
                out.sort_by(|x, y| x.partial_cmp(y).unwrap());
                out
            }
        }
    }

    /// Angles (seen from `q`) at which the ray-crossing distances are not
    /// smooth: polygon corners and tangent directions to disks.
    pub fn angular_breakpoints(&self, q: Point) -> Vec<f64> {
        match self {
            BoundaryCurve::Disk { center, radius } => {
                let d = dist(q, *center);
                if d <= *radius {
                    return vec![];
                }
                let base = (center[1] - q[1]).atan2(center[0] - q[0]);
                let half = (radius / d).asin();
                vec![base - half, base + half]
            }
            BoundaryCurve::Ellipse { .. } => vec![],
            _ => self.corners().unwrap().iter().map(|v| (v[1] - q[1]).atan2(v[0] - q[0])).collect(),
        }
    }
}

/// An open bounded planar domain: an outer curve with zero or more holes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub outer: BoundaryCurve,
    #[serde(default)]
    pub holes: Vec<BoundaryCurve>,
}

impl DomainSpec {
    pub fn new(outer: BoundaryCurve, holes: Vec<BoundaryCurve>) -> Result<Self> {
        let spec = DomainSpec { outer, holes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit_disk() -> Self {
        DomainSpec { outer: BoundaryCurve::disk([0.0, 0.0], 1.0), holes: vec![] }
    }

    /// Unit disk with one circular hole.
    pub fn annulus(hole_center: Point, hole_radius: f64) -> Result<Self> {
        DomainSpec::new(BoundaryCurve::disk([0.0, 0.0], 1.0), vec![BoundaryCurve::disk(hole_center, hole_radius)])
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.check()?;
        for h in &self.holes {
            h.check()?;
        }
        let scale = self.diameter();
        for (k, h) in self.holes.iter().enumerate() {
            let pts = h.sample(h.perimeter() / 1024.0, 64);
            if pts.iter().any(|p| !self.outer.contains(*p) || self.outer.distance(*p) < 1e-12 * scale) {
                return Err(Error::InvalidDomain(format!("hole {k} is not strictly inside the outer boundary")));
            }
            for (j, g) in self.holes.iter().enumerate().skip(k + 1) {
                let other = g.sample(g.perimeter() / 1024.0, 64);
                let touches = |a: &BoundaryCurve, pts: &[Point]| {
                    pts.iter().any(|p| a.contains(*p) || a.distance(*p) < 1e-12 * scale)
                };
                if touches(g, &pts) || touches(h, &other) {
                    return Err(Error::InvalidDomain(format!("holes {k} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    pub fn multiply_connected(&self) -> bool {
        !self.holes.is_empty()
    }

    /// The simply connected fill obtained by closing every hole.
    pub fn fill(&self) -> DomainSpec {
        DomainSpec { outer: self.outer.clone(), holes: vec![] }
    }

    pub fn curves(&self) -> impl Iterator<Item = (CurveId, &BoundaryCurve)> {
        std::iter::once((CurveId::Outer, &self.outer))
            .chain(self.holes.iter().enumerate().map(|(k, h)| (CurveId::Hole(k), h)))
    }

    pub fn curve(&self, id: CurveId) -> &BoundaryCurve {
        match id {
            CurveId::Outer => &self.outer,
            CurveId::Hole(k) => &self.holes[k],
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.outer.contains(p) && self.holes.iter().all(|h| !h.contains(p) && h.distance(p) > 0.0)
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.curves().map(|(_, c)| c.distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn area(&self) -> f64 {
        self.outer.area() - self.holes.iter().map(|h| h.area()).sum::<f64>()
    }

    /// Diagonal of the outer bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.outer.bbox();
        dist(lo, hi)
    }
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>()
}

fn point_in_polygon(p: Point, v: &[Point]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let e = [b[0] - a[0], b[1] - a[1]];
    let len2 = e[0] * e[0] + e[1] * e[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    [a[0] + t * e[0], a[1] + t * e[1]]
}

fn polyline_distance(p: Point, v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| dist(p, closest_on_segment(p, v[i], v[(i + 1) % n]))).fold(f64::INFINITY, f64::min)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    o1 * o2 <= 0.0 && o3 * o4 <= 0.0 && !(o1 == 0.0 && o2 == 0.0)
}

/// Cumulative arc length of an ellipse over a uniform parameter grid.
fn ellipse_arc_table(a: f64, b: f64) -> Vec<f64> {
    const M: usize = 8192;
    let mut table = Vec::with_capacity(M + 1);
    table.push(0.0);
    let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    let dt = 2.0 * PI / M as f64;
    let mut acc = 0.0;
    for j in 0..M {
        let t0 = j as f64 * dt;
        // Simpson on each cell
        acc += dt / 6.0 * (speed(t0) + 4.0 * speed(t0 + 0.5 * dt) + speed(t0 + dt));
        table.push(acc);
    }
    table
}

/// Parameter of the closest point on the ellipse `(a cos t, b sin t)`.
fn ellipse_closest_param(px: f64, py: f64, a: f64, b: f64) -> f64 {
    let (x, y) = (px.abs(), py.abs());
    let d2 = |t: f64| (a * t.cos() - x).powi(2) + (b * t.sin() - y).powi(2);
    let mut t = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..=64 {
        let s = 0.5 * PI * k as f64 / 64.0;
        let v = d2(s);
        if v < best {
            best = v;
            t = s;
        }
    }
    for _ in 0..50 {
        let (s, c) = t.sin_cos();
        let f = (a * a - b * b) * s * c - a * x * s + b * y * c;
        let df = (a * a - b * b) * (c * c - s * s) - a * x * c - b * y * s;
        if df.abs() < 1e-300 {
            break;
        }
        let next = (t - f / df).clamp(0.0, 0.5 * PI);
        if (next - t).abs() < 1e-15 {
            t = next;
            break;
        }
        t = next;
    }
    let (s, c) = t.sin_cos();
    let (sx, sy) = (c.abs() * px.signum(), s.abs() * py.signum());
    sy.atan2(sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hole_outside_outer_rejected() {
        let err = DomainSpec::annulus([0.9, 0.0], 0.2).unwrap_err();
        assert!(matches!(err, Error::InvalidDomain(_)));
    }

    #[test]
    fn overlapping_holes_rejected() {
        let r = DomainSpec::new(
            BoundaryCurve::disk([0.0, 0.0], 1.0),
            vec![BoundaryCurve::disk([0.1, 0.0], 0.2), BoundaryCurve::disk([-0.1, 0.0], 0.2)],
        );
        assert!(matches!(r, Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn clockwise_polygon_rejected() {
        let r = DomainSpec::new(BoundaryCurve::Polygon { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]] }, vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn fill_drops_holes() {
        let a = DomainSpec::annulus([0.3, 0.0], 0.1).unwrap();
        assert!(a.multiply_connected());
        assert!(!a.fill().multiply_connected());
        assert!(!a.contains([0.3, 0.0]));
        assert!(a.fill().contains([0.3, 0.0]));
    }

    #[test]
    fn ellipse_distance_and_perimeter() {
        let e = BoundaryCurve::ellipse(2.0, 0.5);
        assert!((e.distance([0.0, 0.0]) - 0.5).abs() < 1e-12);
        assert!((e.distance([1.0, 0.0]) - e.distance([-1.0, 0.0])).abs() < 1e-12);
        // Ramanujan approximation
        let (a, b) = (2.0f64, 0.5f64);
        let h = ((a - b) / (a + b)).powi(2);
        let ram = PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
        assert!((e.perimeter() - ram).abs() < 1e-4);
        for p in e.sample(0.05, 8) {
            assert!(((p[0] / a).powi(2) + (p[1] / b).powi(2) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ray_crossings_of_annulus() {
        let spec = DomainSpec::annulus([0.5, 0.0], 0.1).unwrap();
        let mut hits: Vec<f64> = spec.curves().flat_map(|(_, c)| c.ray_crossings([0.0, 0.0], [1.0, 0.0])).collect();
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(hits.len(), 3);
        assert!((hits[0] - 0.4).abs() < 1e-14 && (hits[1] - 0.6).abs() < 1e-14 && (hits[2] - 1.0).abs() < 1e-14);
        let sq = BoundaryCurve::rectangle(2.0, 2.0);
        let h = sq.ray_crossings([0.0, 0.0], [std::f64::consts::FRAC_1_SQRT_2; 2]);
        assert_eq!(h.len(), 1);
        assert!((h[0] - 2f64.sqrt()).abs() < 1e-12);
    }
}
