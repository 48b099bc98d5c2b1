//! Ribbon-graph model of a singular leaf.
//!
//! Every hyperbolic point has four slots numbered counterclockwise; slots
//! 0 and 2 carry arcs arriving along the flow of `X_F`, slots 1 and 3 arcs
//! leaving. Quadrant `q` lies between slots `q` and `q + 1`; even quadrants
//! are on the side `F > c`.

use crate::error::{Error, Result};

/// Directed arc of the singular leaf, from an outgoing slot to an incoming one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafArc {
    pub from: (usize, usize),
    pub to: (usize, usize),
}

/// Boundary cycle of one complementary annulus: the regular leaves next to
/// the singular leaf on one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopFamily {
    /// Corners `(vertex, quadrant)` in walk order.
    pub corners: Vec<(usize, usize)>,
    /// Arcs in walk order; the walk follows them forwards on the `+` side.
    pub arcs: Vec<usize>,
    /// `+1` for leaves with `F > c`, `-1` below.
    pub side: i8,
    /// Reeb edge holding these leaves, when known.
    pub edge: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafGraph {
    pub vertex_count: usize,
    pub arcs: Vec<LeafArc>,
    pub loop_families: Vec<LoopFamily>,
}

impl LeafGraph {
    /// Validates slot usage and computes the loop families by walking corners.
    pub fn from_arcs(vertex_count: usize, arcs: Vec<LeafArc>) -> Result<LeafGraph> {
        let mut used = vec![[usize::MAX; 4]; vertex_count];
        for (i, a) in arcs.iter().enumerate() {
            for (end, want_odd) in [(a.from, true), (a.to, false)] {
                let (v, s) = end;
                if v >= vertex_count || s >= 4 {
                    return Err(Error::InvalidInput(format!("arc {i} names slot {end:?} outside the graph")));
                }
                if (s % 2 == 1) != want_odd {
                    return Err(Error::InvalidInput(format!("arc {i} uses slot {s} of vertex {v} against the flow")));
                }
                if used[v][s] != usize::MAX {
                    return Err(Error::InvalidInput(format!("slot {s} of vertex {v} carries two arcs")));
                }
                used[v][s] = i;
            }
        }
        if let Some(v) = used.iter().position(|u| u.contains(&usize::MAX)) {
            return Err(Error::InvalidInput(format!("vertex {v} does not have four arc ends")));
        }
        let mut seen = vec![[false; 4]; vertex_count];
        let mut loop_families = Vec::new();
        for v0 in 0..vertex_count {
            for q0 in 0..4 {
                if seen[v0][q0] {
                    continue;
                }
                let mut corners = Vec::new();
                let mut walk = Vec::new();
                let (mut v, mut q) = (v0, q0);
                while !seen[v][q] {
                    seen[v][q] = true;
                    corners.push((v, q));
                    let slot = (q + 1) % 4;
                    let ai = used[v][slot];
                    let a = arcs[ai];
                    walk.push(ai);
                    (v, q) = if a.from == (v, slot) { a.to } else { a.from };
                }
                let side = if q0 % 2 == 0 { 1 } else { -1 };
                loop_families.push(LoopFamily { corners, arcs: walk, side, edge: None });
            }
        }
        Ok(LeafGraph { vertex_count, arcs, loop_families })
    }

    /// One hyperbolic point, two lobes.
    pub fn figure_eight() -> LeafGraph {
        Self::from_arcs(1, vec![LeafArc { from: (0, 3), to: (0, 0) }, LeafArc { from: (0, 1), to: (0, 2) }])
            .expect("valid")
    }

    /// Two hyperbolic points on a leaf with three lobes in a row.
    pub fn triple_eight() -> LeafGraph {
        Self::from_arcs(
            2,
            vec![
                LeafArc { from: (0, 1), to: (0, 2) },
                LeafArc { from: (0, 3), to: (1, 2) },
                LeafArc { from: (1, 3), to: (1, 0) },
                LeafArc { from: (1, 1), to: (0, 0) },
            ],
        )
        .expect("valid")
    }

    /// Two hyperbolic points joined by four arcs.
    pub fn double_lung() -> LeafGraph {
        Self::from_arcs(
            2,
            vec![
                LeafArc { from: (0, 1), to: (1, 2) },
                LeafArc { from: (0, 3), to: (1, 0) },
                LeafArc { from: (1, 1), to: (0, 2) },
                LeafArc { from: (1, 3), to: (0, 0) },
            ],
        )
        .expect("valid")
    }

    /// `n` hyperbolic points in a row separating `n + 1` lobes. `chain(1)` is
    /// the figure eight and `chain(2)` the triple eight, up to arc order.
    pub fn chain(n: usize) -> Result<LeafGraph> {
        if n == 0 {
            return Err(Error::InvalidInput("a chain needs at least one hyperbolic point".into()));
        }
        let mut arcs = vec![LeafArc { from: (0, 1), to: (0, 2) }];
        for i in 0..n - 1 {
            arcs.push(LeafArc { from: (i, 3), to: (i + 1, 2) });
            arcs.push(LeafArc { from: (i + 1, 1), to: (i, 0) });
        }
        arcs.push(LeafArc { from: (n - 1, 3), to: (n - 1, 0) });
        Self::from_arcs(n, arcs)
    }

    /// Named graphs: `figure-eight`, `triple-eight`, `double-lung` and
    /// `chain-<n>`.
    pub fn by_name(name: &str) -> Result<LeafGraph> {
        match name {
            "figure-eight" => Ok(Self::figure_eight()),
            "triple-eight" => Ok(Self::triple_eight()),
            "double-lung" => Ok(Self::double_lung()),
            _ => match name.strip_prefix("chain-").and_then(|n| n.parse().ok()) {
                Some(n) => Self::chain(n),
                None => Err(Error::InvalidInput(format!(
                    "unknown leaf graph `{name}` (figure-eight, triple-eight, double-lung, chain-<n>)"
                ))),
            },
        }
    }

    /// Arc attached at `(vertex, slot)`.
    pub fn arc_at(&self, v: usize, slot: usize) -> usize {
        self.arcs.iter().position(|a| a.from == (v, slot) || a.to == (v, slot)).expect("every slot carries an arc")
    }

    /// Euler characteristic of the closed surface obtained by capping every
    /// loop family with a disc.
    pub fn capped_euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.arcs.len() as i64 + self.loop_families.len() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sides(g: &LeafGraph) -> (usize, usize) {
        let p = g.loop_families.iter().filter(|f| f.side > 0).count();
        (p, g.loop_families.len() - p)
    }

    #[test]
    fn named_graphs() {
        let f8 = LeafGraph::figure_eight();
        assert_eq!((f8.vertex_count, f8.arcs.len(), f8.loop_families.len()), (1, 2, 3));
        assert_eq!(sides(&f8), (1, 2));
        let t8 = LeafGraph::triple_eight();
        assert_eq!((t8.vertex_count, t8.arcs.len(), t8.loop_families.len()), (2, 4, 4));
        assert_eq!(sides(&t8), (1, 3));
        let dl = LeafGraph::double_lung();
        assert_eq!((dl.vertex_count, dl.arcs.len()), (2, 4));
        assert_eq!(sides(&dl), (2, 2));
        for g in [f8, t8, dl] {
            assert_eq!(g.arcs.len(), 2 * g.vertex_count);
            assert_eq!(g.capped_euler_characteristic(), 2);
            // Each arc borders one family per side.
            for a in 0..g.arcs.len() {
                let mut s: Vec<i8> =
                    g.loop_families.iter().flat_map(|f| f.arcs.iter().filter(|&&x| x == a).map(|_| f.side)).collect();
                s.sort();
                assert_eq!(s, vec![-1, 1]);
            }
        }
    }

    #[test]
    fn bad_slot_usage() {
        assert!(LeafGraph::from_arcs(
            1,
            vec![LeafArc { from: (0, 0), to: (0, 1) }, LeafArc { from: (0, 3), to: (0, 2) }]
        )
        .is_err());
        assert!(LeafGraph::from_arcs(1, vec![LeafArc { from: (0, 1), to: (0, 0) }]).is_err());
        assert!(LeafGraph::by_name("pretzel").is_err());
        assert!(LeafGraph::chain(0).is_err());
    }

    #[test]
    fn chains() {
        for n in 1..6 {
            let g = LeafGraph::chain(n).unwrap();
            assert_eq!(g.arcs.len(), 2 * n);
            assert_eq!(g.loop_families.len(), n + 2);
            assert_eq!(sides(&g), (1, n + 1));
            assert_eq!(g.capped_euler_characteristic(), 2);
        }
        assert_eq!(LeafGraph::by_name("chain-3").unwrap().vertex_count, 3);
    }
}
