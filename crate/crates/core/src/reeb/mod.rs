//! Leaf space of `F` (the Reeb graph) and the combinatorics of singular leaves.

mod leafgraph;
mod mesh;

use std::f64::consts::PI;

use serde::Serialize;

pub use leafgraph::{LeafArc, LeafGraph, LoopFamily};
pub use mesh::{icosphere, mesh_for_system, pl_reeb, Mesh, PlCritical, PlEdge, PlKind, Sites};

use crate::error::{Error, Result};
use crate::geometry::{SingularKind, SingularPoint, SurfaceSystem};
use crate::report::round_sig;
use crate::trace::{flow_to_level, project_to_level, trace_leaf, trace_to_any, LeafFamily, LeafPath, TraceOptions};
use crate::transport::EdgeEnd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    EllipticExtremum,
    HyperbolicLeaf,
    /// Leaves leave the described region here (planar charts).
    Open,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReebVertex {
    pub kind: VertexKind,
    pub critical_value: f64,
    pub singular_points: Vec<SingularPoint>,
    /// Embedded position of one representative point.
    pub position: [f64; 3],
}

/// Edge oriented by increasing `F`, holding the leaves with `lo < F < hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReebEdge {
    pub lower: usize,
    pub upper: usize,
    pub lo: f64,
    pub hi: f64,
    pub family: Option<LeafFamily>,
}

/// Vertex `(kind, down-degree, up-degree)` triples and edge end kinds.
pub type Signature = (Vec<(VertexKind, usize, usize)>, Vec<(VertexKind, VertexKind)>);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReebGraph {
    pub vertices: Vec<ReebVertex>,
    pub edges: Vec<ReebEdge>,
}

#[derive(Debug, Clone, Copy)]
pub struct ReebOptions {
    /// Approximate triangle count of the sweep mesh.
    pub mesh_triangles: usize,
    /// Fraction of the way from the last critical value to the cut that open
    /// edges extend.
    pub open_fraction: f64,
    pub trace: TraceOptions,
}

impl Default for ReebOptions {
    fn default() -> Self {
        ReebOptions { mesh_triangles: 4000, open_fraction: 0.9, trace: TraceOptions::default() }
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Vertices and edges as found by the sweep, before any snapping.
fn assemble(mesh: &Mesh, crit: &[PlCritical], edges: &[PlEdge]) -> ReebGraph {
    let mut g = ReebGraph::default();
    for c in crit {
        g.vertices.push(ReebVertex {
            kind: if c.kind == PlKind::Saddle { VertexKind::HyperbolicLeaf } else { VertexKind::EllipticExtremum },
            critical_value: mesh.values[c.vertex],
            singular_points: Vec::new(),
            position: mesh.positions[c.vertex],
        });
    }
    for e in edges {
        let upper = match e.upper {
            Some(u) => u,
            None => {
                g.vertices.push(ReebVertex {
                    kind: VertexKind::Open,
                    critical_value: mesh.cut.unwrap_or(f64::INFINITY),
                    singular_points: Vec::new(),
                    position: [f64::NAN; 3],
                });
                g.vertices.len() - 1
            }
        };
        let lo = g.vertices[e.lower].critical_value;
        let hi = g.vertices[upper].critical_value;
        g.edges.push(ReebEdge { lower: e.lower, upper, lo, hi, family: None });
    }
    g
}

impl ReebGraph {
    /// Reeb graph of a sampled field.
    pub fn from_mesh(mesh: &Mesh) -> Result<ReebGraph> {
        let (crit, edges) = pl_reeb(mesh)?;
        let mut g = assemble(mesh, &crit, &edges);
        g.contract(1e-12);
        Ok(g)
    }

    /// Merges hyperbolic vertices joined by edges shorter than `tol`.
    fn contract(&mut self, tol: f64) {
        let n = self.vertices.len();
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(rep: &mut [usize], mut x: usize) -> usize {
            while rep[x] != x {
                x = rep[x];
            }
            x
        }
        let hyper = |v: &ReebVertex| v.kind == VertexKind::HyperbolicLeaf;
        let mut keep = Vec::new();
        for e in std::mem::take(&mut self.edges) {
            let short = e.hi - e.lo < tol * (1.0 + e.lo.abs());
            if short && hyper(&self.vertices[e.lower]) && hyper(&self.vertices[e.upper]) {
                let (a, b) = (find(&mut rep, e.lower), find(&mut rep, e.upper));
                if a != b {
                    rep[a.max(b)] = a.min(b);
                }
            } else {
                keep.push(e);
            }
        }
        let roots: Vec<usize> = (0..n).map(|v| find(&mut rep, v)).collect();
        let mut new_id = vec![usize::MAX; n];
        let mut verts: Vec<ReebVertex> = Vec::new();
        for v in 0..n {
            if roots[v] == v {
                new_id[v] = verts.len();
                verts.push(self.vertices[v].clone());
            }
        }
        for v in 0..n {
            if roots[v] != v {
                let pts = self.vertices[v].singular_points.clone();
                verts[new_id[roots[v]]].singular_points.extend(pts);
            }
        }
        for e in keep.iter_mut() {
            e.lower = new_id[roots[e.lower]];
            e.upper = new_id[roots[e.upper]];
        }
        self.vertices = verts;
        self.edges = keep;
    }

    pub fn count(&self, kind: VertexKind) -> usize {
        self.vertices.iter().filter(|v| v.kind == kind).count()
    }

    /// Number of singular points of each kind carried by the vertices.
    pub fn singular_counts(&self) -> (usize, usize) {
        let pts = self.vertices.iter().flat_map(|v| v.singular_points.iter());
        let (e, h): (Vec<_>, Vec<_>) = pts.partition(|p| p.kind == SingularKind::Elliptic);
        (e.len(), h.len())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.lower == v).count() + self.edges.iter().filter(|e| e.upper == v).count()
    }

    /// Kinds of the two ends of an edge.
    pub fn edge_ends(&self, e: usize) -> [EdgeEnd; 2] {
        let kind = |v: usize| match self.vertices[v].kind {
            VertexKind::EllipticExtremum => EdgeEnd::Elliptic,
            VertexKind::HyperbolicLeaf => EdgeEnd::Hyperbolic,
            VertexKind::Open => EdgeEnd::Open,
        };
        [kind(self.edges[e].lower), kind(self.edges[e].upper)]
    }

    /// Isomorphism invariant: sorted per-vertex `(kind, down-degree,
    /// up-degree)` and sorted edge end kinds.
    pub fn signature(&self) -> Signature {
        let key = |k: VertexKind| k as u8;
        let mut vs: Vec<(VertexKind, usize, usize)> = (0..self.vertices.len())
            .map(|v| {
                let down = self.edges.iter().filter(|e| e.upper == v).count();
                let up = self.edges.iter().filter(|e| e.lower == v).count();
                (self.vertices[v].kind, down, up)
            })
            .collect();
        vs.sort_by_key(|&(k, d, u)| (key(k), d, u));
        let mut es: Vec<(VertexKind, VertexKind)> =
            self.edges.iter().map(|e| (self.vertices[e.lower].kind, self.vertices[e.upper].kind)).collect();
        es.sort_by_key(|&(a, b)| (key(a), key(b)));
        (vs, es)
    }

    /// The leaf of edge `e` at `t = F - lo`.
    pub fn leaf_at(&self, system: &SurfaceSystem, e: usize, t: f64, opts: &TraceOptions) -> Result<LeafPath> {
        let edge = self.edges.get(e).ok_or_else(|| Error::OutOfRange(format!("no edge {e}")))?;
        let fam = edge
            .family
            .as_ref()
            .ok_or_else(|| Error::Unsupported("edge has no leaf sampler (sampled input)".into()))?;
        fam.leaf(system, t, opts)
    }

    /// Structured-text adjacency listing.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct V {
            id: usize,
            kind: VertexKind,
            critical_value: f64,
            singular_points: Vec<[f64; 3]>,
        }
        #[derive(Serialize)]
        struct E {
            id: usize,
            lower: usize,
            upper: usize,
            lo: f64,
            hi: f64,
        }
        #[derive(Serialize)]
        struct G {
            vertex: Vec<V>,
            edge: Vec<E>,
        }
        let g = G {
            vertex: self
                .vertices
                .iter()
                .enumerate()
                .map(|(id, v)| V {
                    id,
                    kind: v.kind,
                    critical_value: if v.critical_value.is_finite() { round_sig(v.critical_value) } else { f64::MAX },
                    singular_points: v.singular_points.iter().map(|p| p.position.map(round_sig)).collect(),
                })
                .collect(),
            edge: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| E { id, lower: e.lower, upper: e.upper, lo: round_sig(e.lo), hi: round_sig(e.hi) })
                .collect(),
        };
        toml::to_string(&g).unwrap_or_default()
    }
}

/// Reeb graph of an analytic system: PL sweep on a mesh, then vertex values
/// snapped to the given critical points, zero-length edges contracted, and a
/// leaf sampler attached to every edge.
pub fn build_reeb_graph(system: &SurfaceSystem, singular: &[SingularPoint], opts: &ReebOptions) -> Result<ReebGraph> {
    let (mesh, _sites) = mesh_for_system(system, opts.mesh_triangles)?;
    let (crit, pl_edges) = pl_reeb(&mesh)?;
    let mut g = assemble(&mesh, &crit, &pl_edges);

    // Snap PL critical vertices to the analytic ones, one to one.
    let inside: Vec<&SingularPoint> =
        singular.iter().filter(|p| mesh.cut.is_none_or(|c| p.critical_value < c)).collect();
    if inside.len() != crit.len() {
        return Err(Error::NonMorseInput(format!(
            "sweep found {} critical vertices but the system has {}; refine the mesh",
            crit.len(),
            inside.len()
        )));
    }
    let mut taken = vec![false; inside.len()];
    for (ci, c) in crit.iter().enumerate() {
        let want = if c.kind == PlKind::Saddle { SingularKind::Hyperbolic } else { SingularKind::Elliptic };
        let pos = mesh.positions[c.vertex];
        let best = (0..inside.len())
            .filter(|&k| !taken[k] && inside[k].kind == want)
            .min_by(|&a, &b| dist(inside[a].position, pos).total_cmp(&dist(inside[b].position, pos)))
            .ok_or_else(|| {
                Error::NonMorseInput(format!("no {} point left for sweep vertex {}", want.as_str(), c.vertex))
            })?;
        taken[best] = true;
        let v = &mut g.vertices[ci];
        v.critical_value = inside[best].critical_value;
        v.position = inside[best].position;
        v.singular_points = vec![inside[best].clone()];
    }
    // Open ends stop short of the cut.
    let n_open: Vec<usize> = (0..g.vertices.len()).filter(|&v| g.vertices[v].kind == VertexKind::Open).collect();
    for e in g.edges.iter_mut() {
        e.lo = g.vertices[e.lower].critical_value;
        e.hi = if n_open.contains(&e.upper) {
            e.lo + opts.open_fraction * (g.vertices[e.upper].critical_value - e.lo)
        } else {
            g.vertices[e.upper].critical_value
        };
    }
    for &v in &n_open {
        if let Some(e) = g.edges.iter().find(|e| e.upper == v) {
            g.vertices[v].critical_value = e.hi;
        }
    }

    // Seeds: the mid-level crossing of every edge, moved onto the analytic
    // mid-level.
    for (k, pe) in pl_edges.iter().enumerate() {
        let [a, b] = pe.crossing.ok_or_else(|| Error::TracingFailure(format!("edge {k} has no mid-level crossing")))?;
        let (fa, fb) = (mesh.values[a], mesh.values[b]);
        let mid_pl = 0.5
            * (mesh.values[crit[pe.lower].vertex]
                + pe.upper.map_or(mesh.cut.unwrap_or(fb), |u| mesh.values[crit[u].vertex]));
        let s = ((mid_pl - fa) / (fb - fa)).clamp(0.0, 1.0);
        let (pa, pb) = (mesh.positions[a], mesh.positions[b]);
        let pos = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1]), pa[2] + s * (pb[2] - pa[2])];
        let (chart, p) = (0..system.charts.len())
            .filter_map(|c| system.locate(c, pos).map(|q| (c, q, system.charts[c].margin_at(q))))
            .max_by(|x, y| x.2.total_cmp(&y.2))
            .map(|(c, q, _)| (c, q))
            .ok_or_else(|| Error::TracingFailure(format!("seed of edge {k} is not covered by a chart")))?;
        let e = &g.edges[k];
        if e.hi - e.lo < 1e-9 * (1.0 + e.lo.abs()) {
            continue;
        }
        let level = 0.5 * (e.lo + e.hi);
        let seed = flow_to_level(system, chart, p, level, &opts.trace)?;
        g.edges[k].family = Some(LeafFamily { lo: e.lo, hi: e.hi, seed, seed_level: level });
    }
    let scale = g.vertices.iter().map(|v| v.critical_value.abs()).filter(|x| x.is_finite()).fold(1.0, f64::max);
    g.contract(1e-9 * scale);
    Ok(g)
}

/// Rays of the level set through a hyperbolic point, counterclockwise, with
/// slot 0 incoming. Returned as angles in chart coordinates.
fn saddle_rays(system: &SurfaceSystem, p: &SingularPoint, delta: f64) -> Result<[f64; 4]> {
    let [[a, b], [_, c]] = p.hessian;
    let th = 0.5 * (2.0 * b).atan2(a - c);
    let disc = ((0.5 * (a - c)).powi(2) + b * b).sqrt();
    let (l_hi, l_lo) = (0.5 * (a + c) + disc, 0.5 * (a + c) - disc);
    if !(l_hi > 0.0 && l_lo < 0.0) {
        return Err(Error::InvalidInput("point is not hyperbolic".into()));
    }
    let e_hi = [th.cos(), th.sin()];
    let e_lo = [-th.sin(), th.cos()];
    let mut angles: Vec<f64> = Vec::new();
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let v = [
                s1 * (l_hi.sqrt() * e_lo[0] + s2 * (-l_lo).sqrt() * e_hi[0]),
                s1 * (l_hi.sqrt() * e_lo[1] + s2 * (-l_lo).sqrt() * e_hi[1]),
            ];
            angles.push(v[1].atan2(v[0]));
        }
    }
    angles.sort_by(f64::total_cmp);
    let ch = &system.charts[p.chart];
    let outgoing = |ang: f64| {
        let d = [ang.cos(), ang.sin()];
        let x = ch.hamiltonian_field([p.location[0] + delta * d[0], p.location[1] + delta * d[1]]);
        x[0] * d[0] + x[1] * d[1] > 0.0
    };
    let first_in =
        (0..4).find(|&i| !outgoing(angles[i])).ok_or_else(|| Error::TracingFailure("no incoming separatrix".into()))?;
    let rays = [0, 1, 2, 3].map(|k| angles[(first_in + k) % 4]);
    for (k, &r) in rays.iter().enumerate() {
        if outgoing(r) != (k % 2 == 1) {
            return Err(Error::TracingFailure("separatrices do not alternate in and out".into()));
        }
    }
    Ok(rays)
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Direction from `p` to an embedded point, in the chart of `p`.
fn direction_to(system: &SurfaceSystem, p: &SingularPoint, pos: [f64; 3]) -> Option<f64> {
    let q = system.locate(p.chart, pos)?;
    let ch = &system.charts[p.chart];
    let mut d = [q[0] - p.location[0], q[1] - p.location[1]];
    for (axis, di) in d.iter_mut().enumerate() {
        if let Some(per) = ch.period(axis) {
            *di -= per * (*di / per).round();
        }
    }
    Some(d[1].atan2(d[0]))
}

/// Arc and loop-family structure of the singular leaf at vertex `v`, traced
/// from the separatrices; loop families are matched to Reeb edges.
pub fn leaf_graph(system: &SurfaceSystem, reeb: &ReebGraph, v: usize, opts: &TraceOptions) -> Result<LeafGraph> {
    let vert = reeb.vertices.get(v).ok_or_else(|| Error::OutOfRange(format!("no vertex {v}")))?;
    if vert.kind != VertexKind::HyperbolicLeaf {
        return Err(Error::InvalidInput(format!("vertex {v} is not a hyperbolic leaf")));
    }
    let pts = &vert.singular_points;
    let c = vert.critical_value;
    let delta = |p: &SingularPoint| 2e-3 * system.charts[p.chart].domain.diameter();
    let rays: Vec<[f64; 4]> = pts.iter().map(|p| saddle_rays(system, p, delta(p))).collect::<Result<_>>()?;
    let targets: Vec<[f64; 3]> = pts.iter().map(|p| p.position).collect();
    let radius = pts
        .iter()
        .map(|p| {
            let a = system.position(p.chart, [p.location[0] + delta(p), p.location[1]]);
            dist(a, p.position)
        })
        .fold(0.0, f64::max)
        * 1.5;

    let mut arcs = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        for slot in [1, 3] {
            let d = [rays[i][slot].cos(), rays[i][slot].sin()];
            let start = [p.location[0] + delta(p) * d[0], p.location[1] + delta(p) * d[1]];
            let start = project_to_level(system, p.chart, start, c, opts.newton_tol)?;
            let (path, j) = trace_to_any(system, (p.chart, start), c, &targets, radius, opts)?;
            let end = *path.positions(system).last().expect("non-empty path");
            let ang = direction_to(system, &pts[j], end)
                .ok_or_else(|| Error::TracingFailure("separatrix end is not covered by the saddle chart".into()))?;
            let in_slot = if angle_diff(ang, rays[j][0]) < angle_diff(ang, rays[j][2]) { 0 } else { 2 };
            arcs.push(LeafArc { from: (i, slot), to: (j, in_slot) });
        }
    }
    let mut g = LeafGraph::from_arcs(pts.len(), arcs)?;

    // Match loop families to adjacent Reeb edges.
    let mut used = vec![false; reeb.edges.len()];
    for fam in g.loop_families.iter_mut() {
        let cands: Vec<usize> = (0..reeb.edges.len())
            .filter(|&e| !used[e] && if fam.side > 0 { reeb.edges[e].lower == v } else { reeb.edges[e].upper == v })
            .collect();
        let pick = if cands.len() == 1 {
            cands[0]
        } else {
            let (i, q) = fam.corners[0];
            let p = &pts[i];
            let (a0, a1) = (rays[i][q], rays[i][(q + 1) % 4]);
            let bis = a0 + 0.5 * (a1 - a0).rem_euclid(2.0 * PI);
            let b = [p.location[0] + delta(p) * bis.cos(), p.location[1] + delta(p) * bis.sin()];
            let level = system.charts[p.chart].value(b);
            if (level - c).signum() as i8 != fam.side {
                return Err(Error::TracingFailure("quadrant bisector lies on the wrong side".into()));
            }
            let probe = trace_leaf(system, p.chart, b, level, opts)?.positions(system);
            let mut best = (usize::MAX, f64::INFINITY);
            for &e in &cands {
                let Some(f) = &reeb.edges[e].family else { continue };
                let (ch, q) = f.point_at(system, level - f.lo, opts)?;
                let here = system.position(ch, q);
                let d = probe.iter().map(|&x| dist(x, here)).fold(f64::INFINITY, f64::min);
                if d < best.1 {
                    best = (e, d);
                }
            }
            if best.0 == usize::MAX {
                return Err(Error::TracingFailure(format!("no Reeb edge matches a loop family at vertex {v}")));
            }
            best.0
        };
        used[pick] = true;
        fam.edge = Some(pick);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{detect_singularities, double_well, euler_sphere, sphere_height, standing_torus};

    fn build(sys: &SurfaceSystem, tris: usize) -> ReebGraph {
        let pts = detect_singularities(sys).unwrap();
        build_reeb_graph(sys, &pts, &ReebOptions { mesh_triangles: tris, ..Default::default() }).unwrap()
    }

    #[test]
    fn sphere_height_is_one_edge() {
        let g = build(&sphere_height(4.0), 1000);
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges.len(), 1);
        let r = 2f64.sqrt();
        assert!((g.edges[0].lo + r).abs() < 1e-9 && (g.edges[0].hi - r).abs() < 1e-9);
    }

    #[test]
    fn torus_has_doubled_middle() {
        let sys = standing_torus(2.0, 0.3);
        let g = build(&sys, 1000);
        assert_eq!(g.count(VertexKind::EllipticExtremum), 2);
        assert_eq!(g.count(VertexKind::HyperbolicLeaf), 2);
        assert_eq!(g.edges.len(), 4);
        let mids = g
            .edges
            .iter()
            .filter(|e| {
                g.vertices[e.lower].kind == VertexKind::HyperbolicLeaf
                    && g.vertices[e.upper].kind == VertexKind::HyperbolicLeaf
            })
            .count();
        assert_eq!(mids, 2);
        assert_eq!(g.signature(), build(&sys, 10_000).signature());
        let (e, h) = g.singular_counts();
        assert_eq!(e as i64 - h as i64, sys.euler_characteristic.unwrap());
    }

    #[test]
    fn euler_leaf_is_a_double_lung() {
        let sys = euler_sphere(6.0, [1.0, 2.0, 3.0]);
        let g = build(&sys, 1000);
        assert_eq!(g.count(VertexKind::EllipticExtremum), 4);
        assert_eq!(g.count(VertexKind::HyperbolicLeaf), 1);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(g.singular_counts(), (4, 2));
        assert_eq!(g.signature(), build(&sys, 10_000).signature());
        let v = g.vertices.iter().position(|v| v.kind == VertexKind::HyperbolicLeaf).unwrap();
        let lg = leaf_graph(&sys, &g, v, &TraceOptions::default()).unwrap();
        assert_eq!((lg.vertex_count, lg.arcs.len(), lg.loop_families.len()), (2, 4, 4));
        let mut edges: Vec<usize> = lg.loop_families.iter().map(|f| f.edge.unwrap()).collect();
        edges.sort();
        assert_eq!(edges, vec![0, 1, 2, 3]);
    }

    #[test]
    fn torus_lower_saddle_is_a_figure_eight() {
        let sys = standing_torus(2.0, 0.3);
        let g = build(&sys, 2000);
        let v = (0..g.vertices.len())
            .filter(|&v| g.vertices[v].kind == VertexKind::HyperbolicLeaf)
            .min_by(|&a, &b| g.vertices[a].critical_value.total_cmp(&g.vertices[b].critical_value))
            .unwrap();
        let lg = leaf_graph(&sys, &g, v, &TraceOptions::default()).unwrap();
        assert_eq!((lg.vertex_count, lg.arcs.len(), lg.loop_families.len()), (1, 2, 3));
        // Leaves grow out of the lower saddle into two lobes.
        assert_eq!(lg.loop_families.iter().filter(|f| f.side > 0).count(), 2);
        for f in &lg.loop_families {
            let e = &g.edges[f.edge.unwrap()];
            assert!(if f.side > 0 { e.lower == v } else { e.upper == v });
        }
    }

    #[test]
    fn double_well_transversal_parameter() {
        let sys = double_well(2.0);
        let g = build(&sys, 4000);
        assert_eq!(g.count(VertexKind::HyperbolicLeaf), 1);
        assert_eq!(g.count(VertexKind::Open), 1);
        let v = g.vertices.iter().position(|v| v.kind == VertexKind::HyperbolicLeaf).unwrap();
        let lg = leaf_graph(&sys, &g, v, &TraceOptions::default()).unwrap();
        assert_eq!((lg.vertex_count, lg.arcs.len(), lg.loop_families.len()), (1, 2, 3));
        assert_eq!(lg.loop_families.iter().filter(|f| f.side < 0).count(), 2);
        let outer = g.edges.iter().position(|e| e.lower == v).unwrap();
        let opts = TraceOptions::default();
        let leaf = g.leaf_at(&sys, outer, 0.3, &opts).unwrap();
        assert!((leaf.level - 0.3).abs() < 1e-12 && leaf.level_deviation(&sys) < 1e-10);
        assert!(matches!(g.leaf_at(&sys, outer, -0.1, &opts), Err(Error::OutOfRange(_))));
        // Lobe leaves approach the lobe arc as t -> 0 from inside.
        let lobe = g.edges.iter().position(|e| e.upper == v && g.vertices[e.lower].position[0] > 0.0).unwrap();
        let hd: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&s| {
                let l = g.leaf_at(&sys, lobe, 0.25 - s, &opts).unwrap();
                // Distance to the exact lobe y^2 = x^2 - x^4, x in [0, 1].
                l.positions(&sys)
                    .iter()
                    .map(|p| (p[1].abs() - (p[0] * p[0] - p[0].powi(4)).max(0.0).sqrt()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(hd[0] > hd[1] && hd[1] > hd[2], "{hd:?}");
    }

    #[test]
    fn export_lists_vertices_and_edges() {
        let g = build(&sphere_height(4.0), 1000);
        let t = g.to_toml();
        assert!(t.contains("elliptic-extremum") && t.contains("[[edge]]"));
    }
}
