//! Structured meshes over planar domains.
//!
//! Interior vertices sit on a square lattice of spacing `h / sqrt 2` anchored
//! at the origin, so meshes built with targets `h, h/2, h/4, ...` nest.
//! Lattice points are joined to their eight neighbours; boundary curves are
//! sampled with a power-of-two count of points (again nested across levels)
//! and joined to every lattice vertex within `h`. Lattice cells whose four
//! corners are present carry two triangles.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::ops::ControlFlow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::domain::{BoundaryKind, Domain};
use super::path::PathPolyline;
use super::quadrature::{contour_integrate, Integral, QuadOptions, VectorForm};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub length: f64,
}

/// Boundary membership of a vertex; `None` for interior vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VertexFlag {
    pub boundary: Option<BoundaryKind>,
    pub component: Option<u32>,
}

impl VertexFlag {
    pub fn is_ideal(&self) -> bool {
        self.boundary == Some(BoundaryKind::Ideal)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshData {
    vertices: Vec<Complex64>,
    edges: Vec<Edge>,
    flags: Vec<VertexFlag>,
    #[serde(default)]
    triangles: Vec<[u32; 3]>,
    level: u32,
    target: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MeshData", into = "MeshData")]
pub struct Mesh {
    vertices: Vec<Complex64>,
    edges: Vec<Edge>,
    flags: Vec<VertexFlag>,
    triangles: Vec<[u32; 3]>,
    level: u32,
    target: f64,
    offsets: Vec<u32>,
    incidence: Vec<(u32, u32)>,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl From<Mesh> for MeshData {
    fn from(m: Mesh) -> Self {
        MeshData { vertices: m.vertices, edges: m.edges, flags: m.flags, triangles: m.triangles, level: m.level, target: m.target }
    }
}

impl TryFrom<MeshData> for Mesh {
    type Error = Error;

    fn try_from(d: MeshData) -> Result<Self> {
        if d.flags.len() != d.vertices.len() {
            return Err(Error::InvalidInput("one flag per vertex required".into()));
        }
        if !(d.target.is_finite() && d.target > 0.0) {
            return Err(Error::InvalidInput("mesh target must be positive".into()));
        }
        if d.vertices.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("mesh vertices must be finite".into()));
        }
        let n = d.vertices.len() as u32;
        for e in &d.edges {
            if e.a >= n || e.b >= n || !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::InvalidInput("edge out of range or with non-positive length".into()));
            }
        }
        if d.triangles.iter().flatten().any(|&v| v >= n) {
            return Err(Error::InvalidInput("triangle index out of range".into()));
        }
        let mesh = Mesh::assemble(d.vertices, d.edges, d.flags, d.triangles, d.level, d.target);
        if !mesh.is_connected() {
            return Err(Error::InvalidInput("mesh graph is not connected".into()));
        }
        Ok(mesh)
    }
}

/// Result of a single-source (or multi-source) shortest-path search.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// Incoming tree edge per vertex, `u32::MAX` for roots and unreached.
    pub pred: Vec<u32>,
}

#[derive(PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mesh {
    fn assemble(
        vertices: Vec<Complex64>,
        edges: Vec<Edge>,
        flags: Vec<VertexFlag>,
        triangles: Vec<[u32; 3]>,
        level: u32,
        target: f64,
    ) -> Mesh {
        let n = vertices.len();
        let mut degree = vec![0u32; n + 1];
        for e in &edges {
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut incidence = vec![(0u32, 0u32); edges.len() * 2];
        for (k, e) in edges.iter().enumerate() {
            incidence[fill[e.a as usize] as usize] = (e.b, k as u32);
            fill[e.a as usize] += 1;
            incidence[fill[e.b as usize] as usize] = (e.a, k as u32);
            fill[e.b as usize] += 1;
        }
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (k, z) in vertices.iter().enumerate() {
            buckets.entry(bucket_of(*z, target)).or_default().push(k as u32);
        }
        Mesh { vertices, edges, flags, triangles, level, target, offsets, incidence, buckets }
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn flags(&self) -> &[VertexFlag] {
        &self.flags
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// `(neighbour, edge index)` pairs of vertex `v`.
    pub fn neighbours(&self, v: usize) -> &[(u32, u32)] {
        &self.incidence[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Re-tag every boundary vertex of `component` as artificial, removing
    /// it from the ideal boundary.
    pub fn mark_artificial(&mut self, component: u32) {
        for f in &mut self.flags {
            if f.component == Some(component) {
                f.boundary = Some(BoundaryKind::Artificial);
            }
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in self.neighbours(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    queue.push_back(w as usize);
                }
            }
        }
        count == self.len()
    }

    /// Vertices within Euclidean distance `r` of `p`.
    pub fn vertices_within(&self, p: Complex64, r: f64) -> Vec<usize> {
        let reach = (r / self.target).ceil() as i64;
        let (bx, by) = bucket_of(p, self.target);
        let mut out = Vec::new();
        for i in bx - reach..=bx + reach {
            for j in by - reach..=by + reach {
                if let Some(list) = self.buckets.get(&(i, j)) {
                    out.extend(list.iter().map(|&v| v as usize).filter(|&v| (self.vertices[v] - p).norm() <= r));
                }
            }
        }
        out
    }

    pub fn nearest_vertex(&self, p: Complex64) -> Option<usize> {
        let (bx, by) = bucket_of(p, self.target);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.buckets.keys().map(|&(i, j)| (i - bx).abs().max((j - by).abs())).max()?;
        for ring in 0..=max_ring {
            for i in bx - ring..=bx + ring {
                for j in by - ring..=by + ring {
                    if (i - bx).abs().max((j - by).abs()) != ring {
                        continue;
                    }
                    if let Some(list) = self.buckets.get(&(i, j)) {
                        for &v in list {
                            let d = (self.vertices[v as usize] - p).norm();
                            if best.is_none_or(|(_, bd)| d < bd) {
                                best = Some((v as usize, d));
                            }
                        }
                    }
                }
            }
            if let Some((_, bd)) = best {
                if bd <= ring as f64 * self.target {
                    break;
                }
            }
        }
        best.map(|(v, _)| v)
    }

    /// Dijkstra from weighted sources. `weight` gives the cost of an edge by
    /// index; `settle` sees each vertex as its distance becomes final and may
    /// stop the search early.
    pub fn dijkstra<W, S>(&self, sources: &[(usize, f64)], mut weight: W, mut settle: S) -> ShortestPaths
    where
        W: FnMut(usize) -> f64,
        S: FnMut(usize, f64) -> ControlFlow<()>,
    {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![NONE; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &(v, d) in sources {
            if d < dist[v] {
                dist[v] = d;
                heap.push(HeapItem(d, v as u32));
            }
        }
        while let Some(HeapItem(d, v)) = heap.pop() {
            let v = v as usize;
            if done[v] || d > dist[v] {
                continue;
            }
            done[v] = true;
            if settle(v, d).is_break() {
                break;
            }
            for &(w, e) in self.neighbours(v) {
                let w = w as usize;
                if done[w] {
                    continue;
                }
                let nd = d + weight(e as usize);
                if nd < dist[w] {
                    dist[w] = nd;
                    pred[w] = e;
                    heap.push(HeapItem(nd, w as u32));
                }
            }
        }
        ShortestPaths { dist, pred }
    }

    /// Vertex sequence from a tree root to `v`.
    pub fn trace(&self, paths: &ShortestPaths, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while paths.pred[v] != NONE {
            let e = self.edges[paths.pred[v] as usize];
            v = if e.a as usize == v { e.b as usize } else { e.a as usize };
            out.push(v);
        }
        out.reverse();
        out
    }

    /// Euclidean shortest mesh path between two vertices.
    pub fn euclidean_path(&self, from: usize, to: usize) -> Option<(Vec<usize>, f64)> {
        let paths = self.dijkstra(&[(from, 0.0)], |e| self.edges[e].length, |v, _| {
            if v == to {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        paths.dist[to].is_finite().then(|| (self.trace(&paths, to), paths.dist[to]))
    }
}

fn bucket_of(z: Complex64, size: f64) -> (i64, i64) {
    ((z.re / size).floor() as i64, (z.im / size).floor() as i64)
}

/// Mesh of `domain` with maximum edge length `target`.
pub fn build_mesh(domain: &Domain, target: f64) -> Result<Mesh> {
    build_mesh_level(domain, target, 0)
}

/// Mesh at refinement `level`: target edge length `base_target / 2^level`.
pub fn build_mesh_level(domain: &Domain, base_target: f64, level: u32) -> Result<Mesh> {
    let target = base_target / f64::from(1u32 << level);
    if !(target.is_finite() && target > 0.0) || target >= domain.thickness() {
        return Err(Error::DegenerateDomain(format!(
            "target edge length {target} must be positive and below the domain thickness {}",
            domain.thickness()
        )));
    }
    let s = target / std::f64::consts::SQRT_2;
    let (lo, hi) = domain.bounding_box();
    let i0 = (lo[0] / s).floor() as i64;
    let i1 = (hi[0] / s).ceil() as i64;
    let j0 = (lo[1] / s).floor() as i64;
    let j1 = (hi[1] / s).ceil() as i64;
    let ni = (i1 - i0 + 1) as usize;
    let nj = (j1 - j0 + 1) as usize;
    let lattice = |i: i64, j: i64| Complex64::new(i as f64 * s, j as f64 * s);

    let mut vertices = Vec::new();
    let mut flags = Vec::new();
    let mut grid = vec![NONE; ni * nj];
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = lattice(i, j);
            if domain.region_contains(p) && domain.distance_to_region_boundary(p) >= 0.25 * s {
                grid[(j - j0) as usize * ni + (i - i0) as usize] = vertices.len() as u32;
                vertices.push(p);
                flags.push(VertexFlag::default());
            }
        }
    }
    let at = |i: i64, j: i64| -> u32 {
        if i < i0 || i > i1 || j < j0 || j > j1 {
            NONE
        } else {
            grid[(j - j0) as usize * ni + (i - i0) as usize]
        }
    };

    let mut edges = Vec::new();
    let push_edge = |edges: &mut Vec<Edge>, vertices: &[Complex64], a: u32, b: u32| {
        let length = (vertices[a as usize] - vertices[b as usize]).norm();
        if length > 0.0 {
            edges.push(Edge { a, b, length });
        }
    };
    let mut triangles = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let v = at(i, j);
            if v == NONE {
                continue;
            }
            for (di, dj) in [(1, 0), (0, 1), (1, 1), (-1, 1)] {
                let w = at(i + di, j + dj);
                if w != NONE {
                    let mid = (vertices[v as usize] + vertices[w as usize]) * 0.5;
                    if domain.region_contains(mid) {
                        push_edge(&mut edges, &vertices, v, w);
                    }
                }
            }
            let (v10, v11, v01) = (at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            if v10 != NONE && v11 != NONE && v01 != NONE {
                let center = (vertices[v as usize] + vertices[v11 as usize]) * 0.5;
                if domain.region_contains(center) {
                    triangles.push([v, v10, v11]);
                    triangles.push([v, v11, v01]);
                }
            }
        }
    }

    // boundary curves
    let dedupe_tol = 1e-12 * (1.0 + hi[0].abs().max(hi[1].abs()));
    let mut endpoints: Vec<u32> = Vec::new();
    for curve in domain.boundary_curves() {
        let count = ((curve.length / s).ceil() as usize).max(1).next_power_of_two();
        let last = if curve.closed { count - 1 } else { count };
        let mut chain: Vec<u32> = Vec::with_capacity(last + 1);
        for k in 0..=last {
            let p = curve.point(k as f64 / count as f64);
            let is_end = !curve.closed && (k == 0 || k == last);
            let existing = if is_end {
                endpoints.iter().copied().find(|&v| (vertices[v as usize] - p).norm() <= dedupe_tol)
            } else {
                None
            };
            let v = match existing {
                Some(v) => v,
                None => {
                    let v = vertices.len() as u32;
                    vertices.push(p);
                    flags.push(VertexFlag { boundary: Some(curve.kind), component: Some(curve.id as u32) });
                    if is_end {
                        endpoints.push(v);
                    }
                    let ci = (p.re / s).floor() as i64;
                    let cj = (p.im / s).floor() as i64;
                    let reach = 2;
                    for jj in cj - reach..=cj + reach + 1 {
                        for ii in ci - reach..=ci + reach + 1 {
                            let w = at(ii, jj);
                            if w == NONE {
                                continue;
                            }
                            let q = vertices[w as usize];
                            if (q - p).norm() <= target && domain.region_contains((q + p) * 0.5) {
                                push_edge(&mut edges, &vertices, v, w);
                            }
                        }
                    }
                    v
                }
            };
            chain.push(v);
        }
        if curve.closed {
            chain.push(chain[0]);
        }
        for w in chain.windows(2) {
            if w[0] != w[1] {
                push_edge(&mut edges, &vertices, w[0], w[1]);
            }
        }
    }

    let mesh = Mesh::assemble(vertices, edges, flags, triangles, level, target);
    if !mesh.is_connected() {
        return Err(Error::DegenerateDomain("mesh graph is disconnected at this resolution".into()));
    }
    Ok(mesh)
}

/// Integral of `form` from `p0` to `p1` along the Euclidean shortest mesh
/// path, optionally routed through `via`.
pub fn path_integrate<F: VectorForm + ?Sized>(
    form: &F,
    p0: Complex64,
    p1: Complex64,
    via: Option<Complex64>,
    mesh: &Mesh,
    opts: QuadOptions,
) -> Result<Integral> {
    let mut stops = vec![p0];
    stops.extend(via);
    stops.push(p1);
    let mut points = vec![p0];
    for pair in stops.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let va = mesh.nearest_vertex(a).ok_or(Error::PathNotFound { from: a, to: b })?;
        let vb = mesh.nearest_vertex(b).ok_or(Error::PathNotFound { from: a, to: b })?;
        let (route, _) = mesh.euclidean_path(va, vb).ok_or(Error::PathNotFound { from: a, to: b })?;
        points.extend(route.iter().map(|&v| mesh.vertices()[v]));
        points.push(b);
    }
    points.dedup();
    if points.len() < 2 {
        return Ok(Integral { value: vec![Complex64::new(0.0, 0.0); form.dim()], error: 0.0, evaluations: 0 });
    }
    let path = PathPolyline::new(points, false)?;
    contour_integrate(form, &path, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::quadrature::scalar_form;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disc_mesh_contract() {
        let d = Domain::disc(1.0).unwrap();
        let m = build_mesh(&d, 0.1).unwrap();
        assert!(m.max_edge_length() <= 0.1 + 1e-12);
        assert!(m.is_connected());
        for (z, f) in m.vertices().iter().zip(m.flags()) {
            if f.boundary.is_some() {
                assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn annulus_flags_both_circles() {
        let d = Domain::annulus(0.5, 2.0).unwrap();
        let m = build_mesh(&d, 0.05).unwrap();
        let on = |r: f64| m.vertices().iter().zip(m.flags()).filter(|(z, f)| f.is_ideal() && (z.norm() - r).abs() < 1e-12).count();
        assert!(on(0.5) > 0 && on(2.0) > 0);
        assert!(m.max_edge_length() <= 0.05 + 1e-12);
    }

    #[test]
    fn wedge_flags_rays_and_truncation_arc() {
        let d = Domain::right_wedge(10.0).unwrap();
        let m = build_mesh(&d, 0.1).unwrap();
        let mut saw_ray = [false; 2];
        let mut saw_arc = false;
        for (z, f) in m.vertices().iter().zip(m.flags()) {
            match (f.boundary, f.component) {
                (Some(BoundaryKind::Ideal), Some(k)) => {
                    // on a ray: |Re z| = Im z
                    assert!((z.re.abs() - z.im).abs() < 1e-12, "{z}");
                    saw_ray[k as usize] = true;
                }
                (Some(BoundaryKind::Artificial), _) => {
                    assert!((z.norm() - 10.0).abs() < 1e-9);
                    assert!(z.im >= z.re.abs() - 1e-9);
                    saw_arc = true;
                }
                (None, _) => assert!(d.contains(*z) && z.norm() < 10.0),
                _ => unreachable!(),
            }
        }
        assert!(saw_ray[0] && saw_ray[1] && saw_arc);
    }

    #[test]
    fn degenerate_target_rejected() {
        let d = Domain::annulus(0.5, 0.6).unwrap();
        assert!(matches!(build_mesh(&d, 0.2), Err(Error::DegenerateDomain(_))));
        assert!(build_mesh(&d, -1.0).is_err());
    }

    #[test]
    fn refinement_keeps_paths_short() {
        let d = Domain::annulus(0.5, 2.0).unwrap();
        let coarse = build_mesh_level(&d, 0.2, 0).unwrap();
        let fine = build_mesh_level(&d, 0.2, 1).unwrap();
        assert!(fine.is_connected());
        for (a, b) in [(c(1.0, 0.0), c(-1.0, 0.0)), (c(0.0, 1.5), c(0.7, -0.7))] {
            let (ca, cb) = (coarse.nearest_vertex(a).unwrap(), coarse.nearest_vertex(b).unwrap());
            let (fa, fb) = (fine.nearest_vertex(coarse.vertices()[ca]).unwrap(), fine.nearest_vertex(coarse.vertices()[cb]).unwrap());
            assert_eq!(coarse.vertices()[ca], fine.vertices()[fa]);
            let lc = coarse.euclidean_path(ca, cb).unwrap().1;
            let lf = fine.euclidean_path(fa, fb).unwrap().1;
            assert!(lf <= lc + coarse.target(), "{lf} vs {lc}");
        }
    }

    #[test]
    fn path_integration_examples() {
        let d = Domain::disc(3.0).unwrap();
        let m = build_mesh(&d, 0.2).unwrap();
        let one = scalar_form(|_| c(1.0, 0.0));
        let r = path_integrate(&one, c(0.0, 0.0), c(1.0, 1.0), None, &m, QuadOptions::default()).unwrap();
        assert!((r.value[0] - c(1.0, 1.0)).norm() < 1e-12);
        let lin = scalar_form(|z| 2.0 * z);
        let r = path_integrate(&lin, c(0.0, 0.0), c(2.0, 0.0), None, &m, QuadOptions::default()).unwrap();
        assert!((r.value[0] - c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn branch_of_log_depends_on_route() {
        let d = Domain::annulus(0.5, 2.0).unwrap();
        let m = build_mesh(&d, 0.1).unwrap();
        let inv = scalar_form(|z: Complex64| 1.0 / z);
        let upper = path_integrate(&inv, c(1.0, 0.0), c(-1.0, 0.0), Some(c(0.0, 1.0)), &m, QuadOptions::default()).unwrap();
        let lower = path_integrate(&inv, c(1.0, 0.0), c(-1.0, 0.0), Some(c(0.0, -1.0)), &m, QuadOptions::default()).unwrap();
        // oracle: log branches differ by the residue 2 pi i
        assert!((upper.value[0] - lower.value[0] - c(0.0, std::f64::consts::TAU)).norm() < 1e-10);
        assert!((upper.value[0] - c(0.0, std::f64::consts::PI)).norm() < 1e-10);
    }

    #[test]
    fn json_round_trip_rebuilds_adjacency() {
        let d = Domain::disc(1.0).unwrap();
        let m = build_mesh(&d, 0.3).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: Mesh = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), m.len());
        assert_eq!(back.neighbours(0).len(), m.neighbours(0).len());
    }
}
