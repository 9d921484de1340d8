//! Point placement and constrained Delaunay triangulation.
//!
//! Boundary curves are sampled at arc-length spacing at most `target_h`,
//! the interior is filled with a hexagonal lattice, and optional ring
//! families refine toward a point or around small circular holes. The
//! points are triangulated with boundary edges as constraints and
//! triangles outside the domain are dropped.

use std::f64::consts::PI;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{dist, BoundaryCurve, CurveId, DomainSpec, Grading, Mesh, NodeMarker, Point};
use crate::error::{Error, Result};

/// Minimum number of nodes on any boundary curve.
const MIN_CURVE_NODES: usize = 24;

/// Meshing parameters beyond the target edge length.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeshOptions {
    pub grading: Option<Grading>,
}

/// Triangulates `spec` with edge-length scale `target_h`.
pub fn triangulate(spec: &DomainSpec, target_h: f64) -> Result<Mesh> {
    triangulate_with(spec, target_h, MeshOptions::default())
}

/// Triangulates with a refinement toward `grading.center`.
pub fn triangulate_graded(spec: &DomainSpec, target_h: f64, grading: Grading) -> Result<Mesh> {
    triangulate_with(spec, target_h, MeshOptions { grading: Some(grading) })
}

pub fn triangulate_with(spec: &DomainSpec, target_h: f64, opts: MeshOptions) -> Result<Mesh> {
    spec.validate()?;
    let diameter = spec.diameter();
    if !(target_h > 0.0 && target_h < diameter / 4.0) {
        return Err(Error::InvalidArgument(format!(
            "target_h {target_h} must lie in (0, diameter/4 = {})",
            diameter / 4.0
        )));
    }
    if let Some(g) = opts.grading {
        if !(g.h_min > 0.0 && g.h_min < target_h && g.ratio > 0.0 && g.ratio < 1.0) {
            return Err(Error::InvalidArgument("grading needs 0 < h_min < target_h and 0 < ratio < 1".into()));
        }
        if !spec.contains(g.center) {
            return Err(Error::InvalidArgument("grading center lies outside the domain".into()));
        }
    }
    let shifts = [[0.0, 0.0], [0.31, 0.17], [0.47, 0.71]];
    let mut last = None;
    for s in shifts {
        match build(spec, target_h, opts, [s[0] * target_h, s[1] * target_h]) {
            Ok(m) => return Ok(m),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

struct RingFamily {
    center: Point,
    points: Vec<(Point, f64)>,
    outer_radius: f64,
}

/// Concentric rings with `count` nodes each, radii growing geometrically
/// from `r_start` until the ring spacing reaches `h`.
fn ring_family(center: Point, r_start: f64, count: usize, h: f64, include_first: bool) -> RingFamily {
    let g = 2.0 * PI / count as f64;
    let growth = 1.0 + g * 3f64.sqrt() / 2.0;
    let mut points = Vec::new();
    let mut r = r_start;
    let mut k = 0usize;
    let mut outer_radius = r_start;
    loop {
        let spacing = g * r;
        if spacing >= h {
            break;
        }
        if k > 0 || include_first {
            let phase = if k % 2 == 1 { 0.5 } else { 0.0 };
            for j in 0..count {
                let t = g * (j as f64 + phase);
                points.push(([center[0] + r * t.cos(), center[1] + r * t.sin()], spacing));
            }
            outer_radius = r;
        }
        r *= growth;
        k += 1;
    }
    RingFamily { center, points, outer_radius }
}

fn build(spec: &DomainSpec, h: f64, opts: MeshOptions, shift: Point) -> Result<Mesh> {
    let mut nodes: Vec<Point> = Vec::new();
    let mut markers: Vec<NodeMarker> = Vec::new();
    let mut loops: Vec<Vec<usize>> = Vec::new();

    let mut families: Vec<RingFamily> = Vec::new();
    for (id, curve) in spec.curves() {
        let mut pts = curve.sample(h, MIN_CURVE_NODES);
        if let CurveId::Hole(_) = id {
            pts.reverse();
            if let BoundaryCurve::Disk { center, radius } = curve {
                let spacing = 2.0 * PI * radius / pts.len() as f64;
                if spacing < 0.7 * h {
                    families.push(ring_family(*center, *radius, pts.len(), h, false));
                }
            }
        }
        let marker = match id {
            CurveId::Outer => NodeMarker::Outer,
            CurveId::Hole(k) => NodeMarker::Hole(k),
        };
        let start = nodes.len();
        for p in pts {
            nodes.push(p);
            markers.push(marker);
        }
        loops.push((start..nodes.len()).collect());
    }
    if let Some(g) = opts.grading {
        let count = ((2.0 * PI / g.ratio).ceil() as usize).max(6);
        let mut fam = ring_family(g.center, g.h_min, count, h, true);
        fam.points.insert(0, (g.center, g.h_min));
        families.push(fam);
    }

    let keep = |p: Point, local: f64| spec.contains(p) && spec.distance_to_boundary(p) >= 0.6 * local;
    for fam in &families {
        for &(p, spacing) in &fam.points {
            if keep(p, spacing) {
                nodes.push(p);
                markers.push(NodeMarker::Interior);
            }
        }
    }

    let (lo, hi) = spec.outer.bbox();
    let dy = h * 3f64.sqrt() / 2.0;
    let ny = ((hi[1] - lo[1]) / dy).ceil() as i64 + 1;
    let nx = ((hi[0] - lo[0]) / h).ceil() as i64 + 1;
    for j in 0..=ny {
        let y = lo[1] + shift[1] + j as f64 * dy;
        let off = if j % 2 == 1 { 0.5 * h } else { 0.0 };
        for i in -1..=nx {
            let p = [lo[0] + shift[0] + off + i as f64 * h, y];
            if !keep(p, h) {
                continue;
            }
            if families.iter().any(|f| dist(p, f.center) < f.outer_radius + 0.7 * h) {
                continue;
            }
            nodes.push(p);
            markers.push(NodeMarker::Interior);
        }
    }

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handle_of = Vec::with_capacity(nodes.len());
    for p in &nodes {
        let hnd = cdt.insert(Point2::new(p[0], p[1])).map_err(|e| Error::MeshFailure(format!("insertion: {e:?}")))?;
        handle_of.push(hnd);
    }
    // duplicate coordinates would collapse onto one handle
    let mut owner = vec![usize::MAX; cdt.num_vertices()];
    for (i, hnd) in handle_of.iter().enumerate() {
        if owner[hnd.index()] != usize::MAX {
            return Err(Error::MeshFailure("coincident mesh points".into()));
        }
        owner[hnd.index()] = i;
    }
    for lp in &loops {
        for k in 0..lp.len() {
            let (a, b) = (handle_of[lp[k]], handle_of[lp[(k + 1) % lp.len()]]);
            if !cdt.can_add_constraint(a, b) {
                return Err(Error::MeshFailure("boundary constraint crosses an existing constraint".into()));
            }
            cdt.add_constraint(a, b);
        }
    }
    if cdt.num_vertices() != nodes.len() {
        return Err(Error::MeshFailure("constraint insertion split a boundary edge".into()));
    }

    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let idx = [owner[vs[0].fix().index()], owner[vs[1].fix().index()], owner[vs[2].fix().index()]];
        let c = [
            (nodes[idx[0]][0] + nodes[idx[1]][0] + nodes[idx[2]][0]) / 3.0,
            (nodes[idx[0]][1] + nodes[idx[1]][1] + nodes[idx[2]][1]) / 3.0,
        ];
        if spec.contains(c) {
            triangles.push(idx);
        }
    }

    // drop nodes no kept triangle uses
    let mut used = vec![false; nodes.len()];
    for t in &triangles {
        for &i in t {
            used[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut kept_nodes = Vec::new();
    let mut kept_markers = Vec::new();
    for i in 0..nodes.len() {
        if used[i] {
            remap[i] = kept_nodes.len();
            kept_nodes.push(nodes[i]);
            kept_markers.push(markers[i]);
        } else if markers[i].is_boundary() {
            return Err(Error::MeshFailure("boundary node left without a triangle".into()));
        }
    }
    for t in triangles.iter_mut() {
        for i in t.iter_mut() {
            *i = remap[*i];
        }
    }
    let mesh = Mesh::from_parts(kept_nodes, triangles, kept_markers, h, opts.grading)?;
    let min_area = mesh.triangles().iter().enumerate().map(|(t, _)| mesh.area(t)).fold(f64::INFINITY, f64::min);
    let floor = 1e-6 * opts.grading.map_or(h, |g| g.h_min).powi(2);
    if min_area < floor {
        return Err(Error::MeshFailure(format!("sliver triangle with area {min_area:e}")));
    }
    mesh.validate(Some(spec))?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_boundary_nodes_on_circle() {
        let mesh = triangulate(&DomainSpec::unit_disk(), 0.05).unwrap();
        for (p, m) in mesh.nodes().iter().zip(mesh.markers()) {
            if m.is_boundary() {
                assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-10);
            } else {
                assert!(p[0] * p[0] + p[1] * p[1] < 1.0);
            }
        }
        assert!(mesh.min_angle() > 20f64.to_radians(), "min angle {}", mesh.min_angle().to_degrees());
    }

    #[test]
    fn annulus_markers_and_no_node_in_hole() {
        let spec = DomainSpec::annulus([0.3, 0.0], 0.2).unwrap();
        let mesh = triangulate(&spec, 0.03).unwrap();
        let mut holes = 0;
        for (p, m) in mesh.nodes().iter().zip(mesh.markers()) {
            let d = dist(*p, [0.3, 0.0]);
            assert!(d > 0.2 - 1e-10);
            match m {
                NodeMarker::Hole(k) => {
                    assert_eq!(*k, 0);
                    assert!((d - 0.2).abs() < 1e-10);
                    holes += 1;
                }
                NodeMarker::Outer => assert!((dist(*p, [0.0, 0.0]) - 1.0).abs() < 1e-10),
                NodeMarker::Interior => {}
            }
        }
        assert!(holes >= MIN_CURVE_NODES);
    }

    #[test]
    fn invalid_hole_is_rejected() {
        let spec = DomainSpec {
            outer: BoundaryCurve::disk([0.0, 0.0], 1.0),
            holes: vec![BoundaryCurve::disk([0.9, 0.0], 0.2)],
        };
        assert!(matches!(triangulate(&spec, 0.05), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn boundary_spacing_respects_target() {
        let spec = DomainSpec::new(BoundaryCurve::ellipse(2.0, 0.5), vec![]).unwrap();
        let mesh = triangulate(&spec, 0.04).unwrap();
        let b: Vec<Point> =
            mesh.nodes().iter().zip(mesh.markers()).filter(|(_, m)| m.is_boundary()).map(|(p, _)| *p).collect();
        for p in &b {
            let nearest = b.iter().filter(|q| *q != p).map(|q| dist(*p, *q)).fold(f64::INFINITY, f64::min);
            assert!(nearest <= 0.04 + 1e-12);
        }
    }

    #[test]
    fn graded_mesh_resolves_small_scales() {
        let g = Grading { center: [0.1, -0.05], h_min: 1e-4, ratio: 0.3 };
        let mesh = triangulate_graded(&DomainSpec::unit_disk(), 0.05, g).unwrap();
        let near = mesh.nodes().iter().filter(|p| dist(**p, g.center) < 1e-3).count();
        assert!(near > 20, "{near}");
        assert!(mesh.min_angle() > 15f64.to_radians(), "min angle {}", mesh.min_angle().to_degrees());
        assert!((mesh.total_area() - PI).abs() < 0.01);
    }

    #[test]
    fn small_hole_gets_ring_refinement() {
        let spec = DomainSpec::annulus([0.3, 0.0], 0.02).unwrap();
        let mesh = triangulate(&spec, 0.02).unwrap();
        assert!(mesh.min_angle() > 15f64.to_radians(), "min angle {}", mesh.min_angle().to_degrees());
        let hole_area = PI * 0.02 * 0.02;
        assert!((mesh.total_area() - (PI - hole_area)).abs() < 2e-3);
    }
}
