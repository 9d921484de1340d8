//! Superlevel sets of P1 fields: weighted area, weighted perimeter, and
//! topology from the contour graph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::quadrature::{clip_triangle, CompensatedSum, TriangleRule};
use crate::geometry::{dist, Mesh, Point, ScalarField};

/// Nodes closer than this fraction of the range to a threshold make it
/// degenerate.
pub const PLATEAU_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetMetrics {
    /// `∫_ω e^v`.
    pub m: f64,
    /// `∫_{∂ω} e^{v/2} ds`.
    pub ell: f64,
    /// Unweighted length of `∂ω`.
    pub length: f64,
    pub component_count: usize,
    /// Number of closed boundary curves.
    pub loop_count: usize,
    /// Every component has exactly one boundary loop.
    pub simply_connected: bool,
}

impl LevelSetMetrics {
    /// `2ℓ² − m(8π − m)`.
    pub fn margin(&self) -> f64 {
        2.0 * self.ell * self.ell - self.m * (8.0 * std::f64::consts::PI - self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Vertex {
    Node(usize),
    Cut(usize, usize),
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// `∫_a^b e^{v/2} ds` along a segment on which `v` is linear.
fn weighted_length(p: Point, q: Point, va: f64, vb: f64) -> f64 {
    let len = dist(p, q);
    let d = 0.5 * (vb - va);
    if d.abs() < 1e-8 {
        len * (0.5 * (va + vb) / 2.0).exp() * (1.0 + d * d / 24.0)
    } else {
        len * ((0.5 * vb).exp() - (0.5 * va).exp()) / d
    }
}

/// Triangles of `mesh` restricted to `{phi > 0}`, each as sub-triangles of
/// the exact clip of the P1 interpolant.
pub(crate) fn positive_parts(mesh: &Mesh, phi: &[f64]) -> Vec<(usize, Vec<[Point; 3]>)> {
    let mut out = Vec::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ph = [phi[tri[0]], phi[tri[1]], phi[tri[2]]];
        if ph.iter().all(|&x| x <= 0.0) {
            continue;
        }
        let v = mesh.vertices(t);
        let parts = if ph.iter().all(|&x| x > 0.0) { vec![v] } else { clip_triangle(v, ph).0 };
        out.push((t, parts));
    }
    out
}

/// `∫_{phi > 0} f(t, x, v(x))` with `v` the P1 interpolant of `values`.
pub(crate) fn integrate_positive(
    mesh: &Mesh,
    phi: &[f64],
    values: &[f64],
    f: impl Fn(usize, Point, f64) -> f64,
) -> Result<f64> {
    let rule = TriangleRule::DEGREE5;
    let mut sum = CompensatedSum::default();
    for (t, parts) in positive_parts(mesh, phi) {
        let tri = mesh.triangles()[t];
        let at = |x: Point| {
            let l = mesh.barycentric(t, x);
            l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]]
        };
        for sub in parts {
            let area = 0.5
                * ((sub[1][0] - sub[0][0]) * (sub[2][1] - sub[0][1])
                    - (sub[2][0] - sub[0][0]) * (sub[1][1] - sub[0][1]))
                    .abs();
            let vs = [at(sub[0]), at(sub[1]), at(sub[2])];
            let mut local = 0.0;
            for (b, w) in rule.points.iter().zip(rule.weights) {
                let x = TriangleRule::map(*b, &sub);
                let y = f(t, x, b[0] * vs[0] + b[1] * vs[1] + b[2] * vs[2]);
                if !y.is_finite() {
                    return Err(Error::NonFiniteIntegrand { x: x[0], y: x[1] });
                }
                local += w * y;
            }
            sum.add(area * local);
        }
    }
    Ok(sum.value())
}

/// Segments of the zero contour of the P1 interpolant of `phi`.
pub fn contour_segments(mesh: &Mesh, phi: &[f64]) -> Vec<[Point; 2]> {
    let nodes = mesh.nodes();
    let cut = |i: usize, j: usize| {
        let s = phi[i] / (phi[i] - phi[j]);
        [nodes[i][0] + s * (nodes[j][0] - nodes[i][0]), nodes[i][1] + s * (nodes[j][1] - nodes[i][1])]
    };
    let mut out = Vec::new();
    for tri in mesh.triangles() {
        let crossings: Vec<Point> = [(0, 1), (1, 2), (2, 0)]
            .iter()
            .map(|&(a, b)| (tri[a], tri[b]))
            .filter(|&(i, j)| (phi[i] > 0.0) != (phi[j] > 0.0))
            .map(|(i, j)| cut(i, j))
            .collect();
        if crossings.len() == 2 {
            out.push([crossings[0], crossings[1]]);
        }
    }
    out
}

/// Metrics of `ω = {phi > 0}` for the conformal metric `e^v`, where both
/// fields are P1 on `mesh`. Parts of `∂Ω` bounding `ω` count towards `ℓ`.
pub fn region_metrics(mesh: &Mesh, v: &[f64], phi: &[f64]) -> Result<LevelSetMetrics> {
    let n = mesh.node_count();
    if v.len() != n || phi.len() != n {
        return Err(Error::InvalidArgument("field does not match mesh".into()));
    }
    let nodes = mesh.nodes();
    let tris = mesh.triangles();
    let m = integrate_positive(mesh, phi, v, |_, _, vx| vx.exp())?;

    let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            edges.entry(edge(tri[a], tri[b])).or_default().push(t);
        }
    }

    let mut tri_uf = UnionFind::new(tris.len());
    for (&(i, j), ts) in &edges {
        if ts.len() == 2 && (phi[i] > 0.0 || phi[j] > 0.0) {
            tri_uf.union(ts[0], ts[1]);
        }
    }
    let active: Vec<usize> = (0..tris.len()).filter(|&t| tris[t].iter().any(|&i| phi[i] > 0.0)).collect();

    let lerp = |i: usize, j: usize| {
        let s = phi[i] / (phi[i] - phi[j]);
        let p = [nodes[i][0] + s * (nodes[j][0] - nodes[i][0]), nodes[i][1] + s * (nodes[j][1] - nodes[i][1])];
        (p, v[i] + s * (v[j] - v[i]))
    };
    let position = |x: Vertex| match x {
        Vertex::Node(i) => (nodes[i], v[i]),
        Vertex::Cut(i, j) => lerp(i, j),
    };

    // (endpoints, owning triangle)
    let mut segments: Vec<([Vertex; 2], usize)> = Vec::new();
    for (t, tri) in tris.iter().enumerate() {
        let cuts: Vec<Vertex> = [(0, 1), (1, 2), (2, 0)]
            .iter()
            .map(|&(a, b)| edge(tri[a], tri[b]))
            .filter(|&(i, j)| (phi[i] > 0.0) != (phi[j] > 0.0))
            .map(|(i, j)| Vertex::Cut(i, j))
            .collect();
        if cuts.len() == 2 {
            segments.push(([cuts[0], cuts[1]], t));
        }
    }
    for (&(i, j), ts) in &edges {
        if ts.len() != 1 || !(phi[i] > 0.0 || phi[j] > 0.0) {
            continue;
        }
        let ends = match (phi[i] > 0.0, phi[j] > 0.0) {
            (true, true) => [Vertex::Node(i), Vertex::Node(j)],
            (true, false) => [Vertex::Node(i), Vertex::Cut(i, j)],
            _ => [Vertex::Cut(i, j), Vertex::Node(j)],
        };
        segments.push((ends, ts[0]));
    }

    let mut ids: BTreeMap<Vertex, usize> = BTreeMap::new();
    for (ends, _) in &segments {
        for e in ends {
            let next = ids.len();
            ids.entry(*e).or_insert(next);
        }
    }
    let mut loop_uf = UnionFind::new(ids.len());
    let (mut ell, mut length) = (CompensatedSum::default(), CompensatedSum::default());
    for (ends, _) in &segments {
        loop_uf.union(ids[&ends[0]], ids[&ends[1]]);
        let ((p, vp), (q, vq)) = (position(ends[0]), position(ends[1]));
        ell.add(weighted_length(p, q, vp, vq));
        length.add(dist(p, q));
    }

    let mut loops_of: BTreeMap<usize, std::collections::BTreeSet<usize>> = BTreeMap::new();
    for &t in &active {
        let root = tri_uf.find(t);
        loops_of.entry(root).or_default();
    }
    for (ends, t) in &segments {
        let root = tri_uf.find(*t);
        let l = loop_uf.find(ids[&ends[0]]);
        loops_of.entry(root).or_default().insert(l);
    }
    let component_count = loops_of.len();
    let loop_count = loops_of.values().map(|s| s.len()).sum();
    let simply_connected = component_count > 0 && loops_of.values().all(|s| s.len() == 1);
    Ok(LevelSetMetrics { m, ell: ell.value(), length: length.value(), component_count, loop_count, simply_connected })
}

/// Metrics of `ω_t = {v > t}` for the metric `e^v`.
pub fn level_set_metrics(mesh: &Mesh, v: &ScalarField, t: f64) -> Result<LevelSetMetrics> {
    let (lo, hi) = (v.min(), v.max());
    if !(t > lo && t < hi) {
        return Err(Error::InvalidArgument(format!("threshold {t} outside ({lo}, {hi})")));
    }
    let range = hi - lo;
    if v.values().iter().any(|&x| (x - t).abs() <= PLATEAU_TOLERANCE * range) {
        return Err(Error::DegenerateThreshold(t));
    }
    let phi: Vec<f64> = v.values().iter().map(|x| x - t).collect();
    region_metrics(mesh, v.values(), &phi)
}
