//! Triangulations with boundary markers and nodal fields.

use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{dist, DomainSpec, Point};
use crate::error::{Error, Result};

/// Where a node sits relative to the domain boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeMarker {
    Interior,
    Outer,
    Hole(usize),
}

impl NodeMarker {
    pub fn is_boundary(self) -> bool {
        !matches!(self, NodeMarker::Interior)
    }
}

/// Geometric refinement toward a point: rings of constant node count whose
/// radii grow by a fixed ratio, from `h_min` out to the target edge length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub center: Point,
    pub h_min: f64,
    /// Edge length relative to distance from the center.
    pub ratio: f64,
}

/// A conforming triangulation with counterclockwise triangles.
#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    markers: Vec<NodeMarker>,
    target_h: f64,
    grading: Option<Grading>,
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
    locator: OnceLock<Locator>,
}

impl Mesh {
    /// Builds a mesh from raw arrays, orienting triangles counterclockwise.
    pub fn from_parts(
        nodes: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        markers: Vec<NodeMarker>,
        target_h: f64,
        grading: Option<Grading>,
    ) -> Result<Self> {
        if markers.len() != nodes.len() {
            return Err(Error::MeshFailure("marker count differs from node count".into()));
        }
        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        for t in triangles.iter_mut() {
            if t.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::MeshFailure("triangle references a missing node".into()));
            }
            let mut a = signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            if a < 0.0 {
                t.swap(1, 2);
                a = -a;
            }
            if !(a > 0.0) {
                return Err(Error::MeshFailure(format!("degenerate triangle {:?}", t)));
            }
            let p = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
            let mut g = [[0.0; 2]; 3];
            for k in 0..3 {
                let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                g[k] = [(b[1] - c[1]) / (2.0 * a), (c[0] - b[0]) / (2.0 * a)];
            }
            areas.push(a);
            grads.push(g);
        }
        Ok(Mesh { nodes, triangles, markers, target_h, grading, areas, grads, locator: OnceLock::new() })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn markers(&self) -> &[NodeMarker] {
        &self.markers
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn target_h(&self) -> f64 {
        self.target_h
    }

    pub fn grading(&self) -> Option<Grading> {
        self.grading
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    /// Gradients of the three barycentric coordinates on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        self.grads[t]
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.markers[i].is_boundary()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Largest edge length.
    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = std::f64::consts::PI;
        for t in 0..self.triangles.len() {
            let p = self.vertices(t);
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1])
                    / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt());
                best = best.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let v = self.vertices(t);
        let g = self.grads[t];
        let l1 = g[1][0] * (p[0] - v[0][0]) + g[1][1] * (p[1] - v[0][1]);
        let l2 = g[2][0] * (p[0] - v[0][0]) + g[2][1] * (p[1] - v[0][1]);
        [1.0 - l1 - l2, l1, l2]
    }

    /// Triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let loc = self.locator.get_or_init(|| Locator::build(self));
        let tol = -1e-12;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in loc.candidates(p) {
            let b = self.barycentric(t, p);
            let m = b[0].min(b[1]).min(b[2]);
            if m >= 0.0 {
                return Some((t, b));
            }
            if m >= tol && best.as_ref().is_none_or(|x| m > x.2) {
                best = Some((t, b, m));
            }
        }
        best.map(|(t, b, _)| (t, b))
    }

    /// P1 interpolation of nodal `values` at `p`; `None` outside the mesh.
    pub fn interpolate(&self, values: &[f64], p: Point) -> Option<f64> {
        self.locate(p).map(|(t, b)| {
            let tri = self.triangles[t];
            b[0] * values[tri[0]] + b[1] * values[tri[1]] + b[2] * values[tri[2]]
        })
    }

    /// Constant gradient of the P1 interpolant of `values` on triangle `t`.
    pub fn gradient(&self, values: &[f64], t: usize) -> [f64; 2] {
        let tri = self.triangles[t];
        let g = self.grads[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += values[tri[k]] * g[k][0];
            out[1] += values[tri[k]] * g[k][1];
        }
        out
    }

    /// Checks positivity, conformity, and that boundary nodes lie on
    /// their marked curves.
    pub fn validate(&self, spec: Option<&DomainSpec>) -> Result<()> {
        use std::collections::HashMap;
        let mut edges: HashMap<(usize, usize), u8> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for (&(a, b), &n) in &edges {
            if n > 2 {
                return Err(Error::MeshFailure(format!("edge ({a},{b}) shared by {n} triangles")));
            }
            if n == 1 && !(self.is_boundary(a) && self.is_boundary(b)) {
                return Err(Error::MeshFailure(format!("open edge ({a},{b}) between non-boundary nodes")));
            }
        }
        if let Some(spec) = spec {
            let tol = 1e-10 * spec.diameter();
            for (i, m) in self.markers.iter().enumerate() {
                let curve = match m {
                    NodeMarker::Interior => continue,
                    NodeMarker::Outer => &spec.outer,
                    NodeMarker::Hole(k) => &spec.holes[*k],
                };
                let d = curve.distance(self.nodes[i]);
                if d > tol {
                    return Err(Error::MeshFailure(format!("boundary node {i} is {d:e} off its curve")));
                }
            }
        }
        Ok(())
    }

    /// Plain-text export: header, `nodes N` then `x y marker` lines,
    /// `triangles M` then `a b c` lines. Markers are `i`, `o` or `h<k>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# mfelab mesh v1").unwrap();
        writeln!(s, "target_h {:.17e}", self.target_h).unwrap();
        if let Some(g) = self.grading {
            writeln!(s, "grading {:.17e} {:.17e} {:.17e} {:.17e}", g.center[0], g.center[1], g.h_min, g.ratio).unwrap();
        }
        writeln!(s, "nodes {}", self.nodes.len()).unwrap();
        for (p, m) in self.nodes.iter().zip(&self.markers) {
            let tag = match m {
                NodeMarker::Interior => "i".to_string(),
                NodeMarker::Outer => "o".to_string(),
                NodeMarker::Hole(k) => format!("h{k}"),
            };
            writeln!(s, "{:.17e} {:.17e} {}", p[0], p[1], tag).unwrap();
        }
        writeln!(s, "triangles {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::MeshFailure(format!("mesh text: {m}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut target_h = f64::NAN;
        let mut grading = None;
        let mut nodes = Vec::new();
        let mut markers = Vec::new();
        let mut triangles = Vec::new();
        while let Some(line) = lines.next() {
            let mut it = line.split_whitespace();
            let key = it.next().unwrap_or_default();
            let num = |s: Option<&str>| -> Result<f64> { s.and_then(|v| v.parse().ok()).ok_or_else(|| bad(line)) };
            match key {
                "target_h" => target_h = num(it.next())?,
                "grading" => {
                    let v: Vec<f64> = it.map(|x| x.parse().map_err(|_| bad(line))).collect::<Result<_>>()?;
                    if v.len() != 4 {
                        return Err(bad(line));
                    }
                    grading = Some(Grading { center: [v[0], v[1]], h_min: v[2], ratio: v[3] });
                }
                "nodes" => {
                    let n = num(it.next())? as usize;
                    for _ in 0..n {
                        let l = lines.next().ok_or_else(|| bad("truncated node list"))?;
                        let f: Vec<&str> = l.split_whitespace().collect();
                        if f.len() != 3 {
                            return Err(bad(l));
                        }
                        nodes.push([num(Some(f[0]))?, num(Some(f[1]))?]);
                        markers.push(match f[2] {
                            "i" => NodeMarker::Interior,
                            "o" => NodeMarker::Outer,
                            h if h.starts_with('h') => NodeMarker::Hole(h[1..].parse().map_err(|_| bad(l))?),
                            _ => return Err(bad(l)),
                        });
                    }
                }
                "triangles" => {
                    let n = num(it.next())? as usize;
                    for _ in 0..n {
                        let l = lines.next().ok_or_else(|| bad("truncated triangle list"))?;
                        let f: Vec<usize> =
                            l.split_whitespace().map(|x| x.parse().map_err(|_| bad(l))).collect::<Result<_>>()?;
                        if f.len() != 3 {
                            return Err(bad(l));
                        }
                        triangles.push([f[0], f[1], f[2]]);
                    }
                }
                _ => return Err(bad(line)),
            }
        }
        Mesh::from_parts(nodes, triangles, markers, target_h, grading)
    }

    /// Same mesh with nodes relabelled: new index of old node `i` is `perm[i]`.
    pub fn renumbered(&self, perm: &[usize]) -> Result<Mesh> {
        let n = self.nodes.len();
        let mut nodes = vec![[0.0; 2]; n];
        let mut markers = vec![NodeMarker::Interior; n];
        for i in 0..n {
            nodes[perm[i]] = self.nodes[i];
            markers[perm[i]] = self.markers[i];
        }
        let triangles = self.triangles.iter().map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]]).collect();
        Mesh::from_parts(nodes, triangles, markers, self.target_h, self.grading)
    }
}

/// Nodal real values on a mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        Ok(ScalarField { values })
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        ScalarField { values: vec![0.0; mesh.node_count()] }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        ScalarField { values: mesh.nodes().iter().map(|&p| f(p)).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Clone, Debug)]
struct Locator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    fn build(mesh: &Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &mesh.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
        let cell = if mesh.target_h.is_finite() && mesh.target_h > 0.0 { 2.0 * mesh.target_h } else { span / 64.0 };
        let cell = cell.max(span / 2048.0);
        let nx = ((hi[0] - lo[0]) / cell).floor() as usize + 1;
        let ny = ((hi[1] - lo[1]) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for t in 0..mesh.triangles.len() {
            let v = mesh.vertices(t);
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in &v {
                for k in 0..2 {
                    a[k] = a[k].min(p[k]);
                    b[k] = b[k].max(p[k]);
                }
            }
            let i0 = ((a[0] - lo[0]) / cell).floor() as usize;
            let i1 = (((b[0] - lo[0]) / cell).floor() as usize).min(nx - 1);
            let j0 = ((a[1] - lo[1]) / cell).floor() as usize;
            let j1 = (((b[1] - lo[1]) / cell).floor() as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        Locator { origin: lo, cell, nx, ny, buckets }
    }

    fn candidates(&self, p: Point) -> &[usize] {
        let fi = (p[0] - self.origin[0]) / self.cell;
        let fj = (p[1] - self.origin[1]) / self.cell;
        if !(fi >= -1e-9 && fj >= -1e-9) {
            return &[];
        }
        let (i, j) = (fi.max(0.0) as usize, fj.max(0.0) as usize);
        if i >= self.nx || j >= self.ny {
            return &[];
        }
        &self.buckets[j * self.nx + i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Mesh {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let mut markers = vec![NodeMarker::Outer; 4];
        markers.push(NodeMarker::Interior);
        Mesh::from_parts(nodes, vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]], markers, 0.5, None).unwrap()
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let m = square();
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.markers(), m.markers());
    }

    #[test]
    fn interpolation_reproduces_linears() {
        let m = square();
        let f: Vec<f64> = m.nodes().iter().map(|p| 2.0 * p[0] - p[1] + 0.5).collect();
        for p in [[0.1, 0.2], [0.9, 0.3], [0.5, 0.99]] {
            let v = m.interpolate(&f, p).unwrap();
            assert!((v - (2.0 * p[0] - p[1] + 0.5)).abs() < 1e-14);
        }
        assert!(m.interpolate(&f, [1.5, 0.5]).is_none());
        let g = m.gradient(&f, 2);
        assert!((g[0] - 2.0).abs() < 1e-14 && (g[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let m = Mesh::from_parts(nodes, vec![[0, 2, 1]], vec![NodeMarker::Outer; 3], 1.0, None).unwrap();
        assert!((m.area(0) - 0.5).abs() < 1e-15);
        assert!(m.validate(None).is_ok());
    }
}
