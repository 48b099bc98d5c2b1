//! Triangulated surfaces carrying a scalar field, and the PL sweep.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::SurfaceSystem;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub positions: Vec<[f64; 3]>,
    pub values: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
    /// Vertices at or above this value are outside the described region.
    pub cut: Option<f64>,
}

impl Mesh {
    /// Reads rows `v x y z f` and `t i j k` (0-based); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Mesh> {
        let mut m = Mesh::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or("");
            let rest: Vec<&str> = it.collect();
            let bad = || Error::Parse(format!("line {}: malformed `{line}`", no + 1));
            match (tag, rest.len()) {
                ("v", 4) => {
                    let x: Vec<f64> = rest
                        .iter()
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?;
                    m.positions.push([x[0], x[1], x[2]]);
                    m.values.push(x[3]);
                }
                ("t", 3) => {
                    let x: Vec<usize> = rest
                        .iter()
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?;
                    m.triangles.push([x[0], x[1], x[2]]);
                }
                _ => return Err(bad()),
            }
        }
        let n = m.positions.len();
        if let Some(t) = m.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::Parse(format!("triangle {t:?} references a missing vertex")));
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, f) in self.positions.iter().zip(&self.values) {
            let _ = writeln!(out, "v {} {} {} {}", p[0], p[1], p[2], f);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
        }
        out
    }

    /// Simulation-of-simplicity order: ties in value are broken by index.
    fn below(&self, a: usize, b: usize) -> bool {
        (self.values[a], a) < (self.values[b], b)
    }

    fn inside(&self, v: usize) -> bool {
        self.cut.is_none_or(|c| self.values[v] < c)
    }

    /// Cyclically ordered link of every vertex (a path for boundary
    /// vertices), with a flag for closed links.
    fn links(&self) -> Result<(Vec<Vec<usize>>, Vec<bool>)> {
        let n = self.positions.len();
        // For each vertex: map from a neighbour to the next neighbour in
        // triangle order.
        let mut next: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                if next[a].insert(b, c).is_some() {
                    return Err(Error::InvalidInput(format!("mesh is not an oriented manifold at vertex {a}")));
                }
            }
        }
        let mut links = Vec::with_capacity(n);
        let mut closed = Vec::with_capacity(n);
        for (v, nx) in next.iter().enumerate() {
            if nx.is_empty() {
                links.push(Vec::new());
                closed.push(false);
                continue;
            }
            // Start from a neighbour with no predecessor if the link is a path.
            let has_pred: std::collections::HashSet<usize> = nx.values().copied().collect();
            let mut start = *nx.keys().min().unwrap_or(&0);
            let open = nx.keys().filter(|k| !has_pred.contains(k)).min().copied();
            if let Some(s) = open {
                start = s;
            }
            closed.push(open.is_none());
            let mut link = vec![start];
            let mut cur = start;
            while let Some(&nb) = nx.get(&cur) {
                if nb == start {
                    break;
                }
                link.push(nb);
                cur = nb;
                if link.len() > nx.len() + 1 {
                    return Err(Error::InvalidInput(format!("link of vertex {v} is not a cycle")));
                }
            }
            links.push(link);
        }
        Ok((links, closed))
    }

    fn edges(&self) -> Vec<[usize; 2]> {
        let mut e: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|t| {
                (0..3).map(move |k| {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    [a.min(b), a.max(b)]
                })
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

/// A PL critical vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlKind {
    Minimum,
    Maximum,
    Saddle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlCritical {
    pub vertex: usize,
    pub kind: PlKind,
}

/// One Reeb edge found by the sweep: indices into the critical list, or
/// `None` above the cut.
#[derive(Debug, Clone, PartialEq)]
pub struct PlEdge {
    pub lower: usize,
    pub upper: Option<usize>,
    /// A mesh edge `[u, w]` with `f(u) < mid < f(w)` inside this Reeb edge,
    /// where `mid` is halfway between the end values.
    pub crossing: Option<[usize; 2]>,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Classifies vertices by sign changes around their link and sweeps the
/// slabs between consecutive critical values with union-find.
pub fn pl_reeb(mesh: &Mesh) -> Result<(Vec<PlCritical>, Vec<PlEdge>)> {
    let (links, closed) = mesh.links()?;
    let mut crit = Vec::new();
    for (v, link) in links.iter().enumerate() {
        if !mesh.inside(v) || link.is_empty() {
            continue;
        }
        if !closed[v] {
            // Boundary vertices never carry critical points of the region.
            continue;
        }
        let lower: Vec<bool> = link.iter().map(|&w| mesh.below(w, v)).collect();
        let n = lower.len();
        let changes = (0..n).filter(|&i| lower[i] != lower[(i + 1) % n]).count();
        let kind = match changes {
            0 if lower[0] => PlKind::Maximum,
            0 => PlKind::Minimum,
            2 => continue,
            4 => PlKind::Saddle,
            c => {
                return Err(Error::NonMorseInput(format!(
                    "vertex {v} at value {} has {c} sign changes around its link",
                    mesh.values[v]
                )))
            }
        };
        crit.push(PlCritical { vertex: v, kind });
    }
    crit.sort_by(|a, b| mesh.values[a.vertex].total_cmp(&mesh.values[b.vertex]).then(a.vertex.cmp(&b.vertex)));

    // Slab i lies between critical i and i + 1 (the last one ends at the cut or +inf).
    let key = |v: usize| (mesh.values[v], v);
    let keys: Vec<(f64, usize)> = crit.iter().map(|c| key(c.vertex)).collect();
    let edges = mesh.edges();
    let edge_id: HashMap<[usize; 2], usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let ns = keys.len();
    let ne = edges.len();
    let top = |i: usize| -> (f64, usize) {
        if i + 1 < ns {
            keys[i + 1]
        } else {
            (mesh.cut.unwrap_or(f64::INFINITY), usize::MAX)
        }
    };
    // Mesh edge oriented upwards.
    let up = |e: [usize; 2]| if mesh.below(e[0], e[1]) { e } else { [e[1], e[0]] };
    let in_slab = |i: usize, e: [usize; 2]| {
        let [a, b] = up(e);
        key(a) < top(i) && key(b) > keys[i]
    };
    let mut dsu = Dsu::new(ns * ne);
    for i in 0..ns {
        for t in &mesh.triangles {
            let ids: Vec<usize> = (0..3)
                .map(|k| {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    edge_id[&[a.min(b), a.max(b)]]
                })
                .filter(|&id| in_slab(i, edges[id]))
                .collect();
            for w in ids.windows(2) {
                dsu.union(i * ne + w[0], i * ne + w[1]);
            }
        }
        if i > 0 {
            // Pieces continue across level i except through the contour of
            // the critical vertex itself.
            let crosses = |id: usize| {
                let [a, b] = up(edges[id]);
                key(a) < keys[i] && key(b) > keys[i]
            };
            let centre = ne;
            let mut contour = Dsu::new(ne + 1);
            let cv = crit[i].vertex;
            for t in &mesh.triangles {
                let ids: Vec<usize> = (0..3)
                    .map(|k| {
                        let (a, b) = (t[k], t[(k + 1) % 3]);
                        edge_id[&[a.min(b), a.max(b)]]
                    })
                    .filter(|&id| crosses(id))
                    .collect();
                for w in ids.windows(2) {
                    contour.union(w[0], w[1]);
                }
                if t.contains(&cv) {
                    for id in ids {
                        contour.union(id, centre);
                    }
                }
            }
            let singular = contour.find(centre);
            for id in 0..ne {
                if crosses(id) && contour.find(id) != singular {
                    dsu.union((i - 1) * ne + id, i * ne + id);
                }
            }
        }
    }
    // Attach components to critical vertices.
    let mut lower_of: HashMap<usize, usize> = HashMap::new();
    let mut upper_of: HashMap<usize, usize> = HashMap::new();
    for (ci, c) in crit.iter().enumerate() {
        let v = c.vertex;
        for &w in &links[v] {
            let id = edge_id[&[v.min(w), v.max(w)]];
            if mesh.below(v, w) {
                let root = dsu.find(ci * ne + id);
                if let Some(&old) = lower_of.get(&root) {
                    if old != ci {
                        return Err(Error::NonMorseInput(format!(
                            "sweep component reaches two lower vertices ({old}, {ci})"
                        )));
                    }
                }
                lower_of.insert(root, ci);
            } else if ci > 0 {
                let root = dsu.find((ci - 1) * ne + id);
                upper_of.insert(root, ci);
            }
        }
    }
    let mut roots: Vec<usize> = lower_of.keys().copied().collect();
    roots.sort_unstable_by_key(|r| (lower_of[r], *r));
    let mut out = Vec::new();
    for root in roots {
        let lower = lower_of[&root];
        let upper = upper_of.get(&root).copied();
        if upper.is_none() && mesh.cut.is_none() {
            return Err(Error::NonMorseInput(format!(
                "sweep component above critical vertex {} never closes",
                crit[lower].vertex
            )));
        }
        let lo = mesh.values[crit[lower].vertex];
        let hi = upper.map_or(mesh.cut.unwrap_or(lo), |u| mesh.values[crit[u].vertex]);
        let mid = 0.5 * (lo + hi);
        let slab = (lower..upper.unwrap_or(ns)).find(|&i| top(i).0 > mid).unwrap_or(lower);
        let crossing = edges.iter().enumerate().find_map(|(id, &e)| {
            let [a, b] = up(e);
            (mesh.values[a] < mid && mesh.values[b] > mid && in_slab(slab, e) && dsu.find(slab * ne + id) == root)
                .then_some([a, b])
        });
        out.push(PlEdge { lower, upper, crossing });
    }
    if upper_of.keys().any(|r| !lower_of.contains_key(r)) {
        return Err(Error::NonMorseInput("sweep component without a lower critical vertex".into()));
    }
    Ok((crit, out))
}

/// Unit icosphere after `level` midpoint subdivisions (20 * 4^level faces).
pub fn icosphere(level: u32) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pts: Vec<[f64; 3]> = vec![
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let normalize = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    for q in pts.iter_mut() {
        *q = normalize(*q);
    }
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (u, v) = (pts[a], pts[b]);
                pts.push(normalize([u[0] + v[0], u[1] + v[1], u[2] + v[2]]));
                pts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for t in &tris {
            let ab = mid(t[0], t[1], &mut pts);
            let bc = mid(t[1], t[2], &mut pts);
            let ca = mid(t[2], t[0], &mut pts);
            next.extend([[t[0], ab, ca], [t[1], bc, ab], [t[2], ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (pts, tris)
}

/// `n x m` grid triangulation of the unit square with optional wrap-around.
fn grid(n: usize, m: usize, wrap: [bool; 2]) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let (nx, ny) = (if wrap[0] { n } else { n + 1 }, if wrap[1] { m } else { m + 1 });
    // Irrational offsets keep grid values away from symmetric ties.
    let (ox, oy) =
        if wrap[0] || wrap[1] { (std::f64::consts::FRAC_1_PI, 0.1 * std::f64::consts::E) } else { (0.0, 0.0) };
    let mut pts = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            pts.push([(i as f64 + ox) / n as f64, (j as f64 + oy) / m as f64]);
        }
    }
    let id = |i: usize, j: usize| (i % nx) * ny + (j % ny);
    let mut tris = Vec::with_capacity(2 * n * m);
    for i in 0..n {
        for j in 0..m {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    (pts, tris)
}

/// Mesh vertex sites in chart coordinates, next to the mesh itself.
pub type Sites = Vec<(usize, [f64; 2])>;

/// Samples a system on a triangulation of about `target` triangles.
/// Spheres use a randomly rotated icosphere, tori a grid over chart 0 (taken
/// as a fundamental domain), planar systems a grid cut below the smallest
/// boundary value.
pub fn mesh_for_system(system: &SurfaceSystem, target: usize) -> Result<(Mesh, Sites)> {
    let eval_site = |pos: [f64; 3]| -> Option<(usize, [f64; 2], f64)> {
        let mut best: Option<(usize, [f64; 2], f64)> = None;
        for b in 0..system.charts.len() {
            if let Some(q) = system.locate(b, pos) {
                let m = system.charts[b].margin_at(q);
                if best.is_none_or(|x| m > x.2) {
                    best = Some((b, q, m));
                }
            }
        }
        best.map(|(b, q, _)| (b, q, system.charts[b].value(q)))
    };
    let mut mesh = Mesh::default();
    let mut sites = Vec::new();
    match system.euler_characteristic {
        Some(2) => {
            let level = ((target as f64 / 20.0).ln() / 4f64.ln()).round().max(1.0) as u32;
            let (pts, tris) = icosphere(level);
            let c0 = &system.charts[0];
            let d = c0.domain;
            let probe = system.position(0, [0.5 * (d.x0 + d.x1), 0.5 * (d.y0 + d.y1)]);
            let r = (probe[0] * probe[0] + probe[1] * probe[1] + probe[2] * probe[2]).sqrt();
            let rot = random_rotation(0x5eed);
            for p in pts {
                let q = mat_vec(&rot, p);
                let pos = [r * q[0], r * q[1], r * q[2]];
                let (b, x, f) =
                    eval_site(pos).ok_or_else(|| Error::InvalidInput(format!("no chart covers {pos:?}")))?;
                mesh.positions.push(pos);
                mesh.values.push(f);
                sites.push((b, x));
            }
            mesh.triangles = tris;
        }
        Some(0) => {
            let n = ((target as f64 / 2.0).sqrt().round() as usize).max(4);
            let (pts, tris) = grid(n, n, [true, true]);
            let d = system.charts[0].domain;
            for u in pts {
                let x = [d.x0 + u[0] * d.width(), d.y0 + u[1] * d.height()];
                let pos = system.position(0, x);
                let (b, y, f) =
                    eval_site(pos).ok_or_else(|| Error::InvalidInput(format!("no chart covers {pos:?}")))?;
                mesh.positions.push(pos);
                mesh.values.push(f);
                sites.push((b, y));
            }
            mesh.triangles = tris;
        }
        Some(chi) => return Err(Error::Unsupported(format!("automatic meshing of compact surfaces with chi = {chi}"))),
        None => {
            let n = ((target as f64 / 2.0).sqrt().round() as usize).max(4);
            let (pts, tris) = grid(n, n, [false, false]);
            let c = &system.charts[0];
            let d = c.domain;
            let mut cut = f64::INFINITY;
            for (k, u) in pts.iter().enumerate() {
                let x = [d.x0 + u[0] * d.width(), d.y0 + u[1] * d.height()];
                let f = c.value(x);
                let (i, j) = (k / (n + 1), k % (n + 1));
                if i == 0 || j == 0 || i == n || j == n {
                    cut = cut.min(f);
                }
                mesh.positions.push(system.position(0, x));
                mesh.values.push(f);
                sites.push((0, x));
            }
            mesh.triangles = tris;
            mesh.cut = Some(cut);
        }
    }
    Ok((mesh, sites))
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Rotation from a seeded random unit quaternion.
fn random_rotation(seed: u64) -> [[f64; 3]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = [0.0f64; 4];
    for x in q.iter_mut() {
        *x = rng.random_range(-1.0..1.0);
    }
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(c: &[PlCritical]) -> [usize; 3] {
        let k = |kind| c.iter().filter(|x| x.kind == kind).count();
        [k(PlKind::Minimum), k(PlKind::Saddle), k(PlKind::Maximum)]
    }

    #[test]
    fn icosphere_is_closed() {
        let (pts, tris) = icosphere(2);
        assert_eq!(tris.len(), 320);
        // V - E + F = 2
        let m = Mesh { positions: pts, values: vec![0.0; 162], triangles: tris, cut: None };
        assert_eq!(m.positions.len() as i64 - m.edges().len() as i64 + m.triangles.len() as i64, 2);
    }

    #[test]
    fn height_on_icosphere_is_an_interval() {
        let (pts, tris) = icosphere(3);
        let values = pts.iter().map(|p| p[2] + 0.1 * p[0]).collect();
        let m = Mesh { positions: pts, values, triangles: tris, cut: None };
        let (crit, edges) = pl_reeb(&m).unwrap();
        assert_eq!(counts(&crit), [1, 0, 1]);
        assert_eq!(edges.len(), 1);
        assert!(edges[0].crossing.is_some());
    }

    #[test]
    fn text_round_trip() {
        let (pts, tris) = icosphere(1);
        let values = pts.iter().map(|p| p[0]).collect();
        let m = Mesh { positions: pts, values, triangles: tris, cut: None };
        let back = Mesh::parse(&m.to_text()).unwrap();
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.values, m.values);
        assert!(Mesh::parse("v 0 0 0\n").is_err());
        assert!(Mesh::parse("v 0 0 0 1\nt 0 1 2\n").is_err());
    }

    #[test]
    fn monkey_saddle_is_rejected() {
        // Hexagon fan around a centre with alternating neighbour values.
        let mut positions = vec![[0.0, 0.0, 0.0]];
        let mut values = vec![0.0];
        for k in 0..6 {
            let a = k as f64 * std::f64::consts::PI / 3.0;
            positions.push([a.cos(), a.sin(), 0.0]);
            values.push(if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        let m = Mesh { positions, values, triangles, cut: Some(0.5) };
        assert!(matches!(pl_reeb(&m), Err(Error::NonMorseInput(_))));
    }
}
