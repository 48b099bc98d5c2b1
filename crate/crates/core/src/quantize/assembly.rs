//! Splitting a system into pieces along regular leaves and summing them up
//! again.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{truncated_dim, Analysis, BsEntry};
use crate::error::{Error, Result};
use crate::reeb::VertexKind;

/// Contribution of one piece of the surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceReport {
    pub id: String,
    pub cn_factor_count: usize,
    pub bs_leaves: Vec<BsEntry>,
    pub truncated_dims: BTreeMap<usize, usize>,
}

impl PieceReport {
    pub fn new(id: impl Into<String>, cn_factor_count: usize, bs_leaves: Vec<BsEntry>, n_max: usize) -> PieceReport {
        let m = bs_leaves.len();
        PieceReport {
            id: id.into(),
            cn_factor_count,
            bs_leaves,
            truncated_dims: (0..=n_max).map(|n| (n, truncated_dim(cn_factor_count, m, n))).collect(),
        }
    }
}

/// Band of regular leaves `lo <= t <= hi` on one edge shared by two pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    pub edge: usize,
    pub lo: f64,
    pub hi: f64,
}

/// One piece per Reeb vertex, cut along the middle of every edge.
pub fn decompose(analysis: &Analysis, n_max: usize) -> (Vec<PieceReport>, Vec<Overlap>) {
    let g = &analysis.reeb;
    let mut owned: Vec<Vec<BsEntry>> = vec![Vec::new(); g.vertices.len()];
    let mut overlaps = Vec::new();
    for (e, edge) in g.edges.iter().enumerate() {
        let (cut, gap) = analysis.cut(e);
        overlaps.push(Overlap { edge: e, lo: cut - 0.25 * gap, hi: cut + 0.25 * gap });
        for b in analysis.bs_leaves[e].iter().filter(|b| !b.singular) {
            owned[if b.t < cut { edge.lower } else { edge.upper }].push(BsEntry::of(b));
        }
    }
    let pieces = owned
        .into_iter()
        .enumerate()
        .map(|(v, bs)| {
            let vert = &g.vertices[v];
            let cn = if vert.kind == VertexKind::HyperbolicLeaf { 2 * vert.singular_points.len() } else { 0 };
            PieceReport::new(format!("v{v:04}"), cn, bs, n_max)
        })
        .collect();
    (pieces, overlaps)
}

/// Direct sum of piece reports. Every overlap must be free of
/// Bohr-Sommerfeld leaves; the result does not depend on the order of the
/// pieces.
pub fn mayer_vietoris_assemble(pieces: &[PieceReport], overlaps: &[Overlap]) -> Result<PieceReport> {
    for o in overlaps {
        for p in pieces {
            if let Some(b) = p.bs_leaves.iter().find(|b| b.edge == o.edge && b.t >= o.lo && b.t <= o.hi) {
                return Err(Error::OverlapContainsBS(format!(
                    "leaf at t = {} on edge {} lies in the overlap [{}, {}] (piece {})",
                    b.t, o.edge, o.lo, o.hi, p.id
                )));
            }
        }
    }
    let mut sorted: Vec<&PieceReport> = pieces.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut bs: Vec<BsEntry> = sorted.iter().flat_map(|p| p.bs_leaves.iter().copied()).collect();
    bs.sort_by(|a, b| (a.edge, a.t).partial_cmp(&(b.edge, b.t)).expect("finite parameters"));
    let mut dims: BTreeMap<usize, usize> = BTreeMap::new();
    for p in &sorted {
        for (&n, &d) in &p.truncated_dims {
            *dims.entry(n).or_default() += d;
        }
    }
    // Orders missing from some piece are not meaningful in the sum.
    dims.retain(|n, _| sorted.iter().all(|p| p.truncated_dims.contains_key(n)));
    Ok(PieceReport {
        id: sorted.iter().map(|p| p.id.as_str()).collect::<Vec<_>>().join("+"),
        cn_factor_count: sorted.iter().map(|p| p.cn_factor_count).sum(),
        bs_leaves: bs,
        truncated_dims: dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn leaf(edge: usize, t: f64) -> BsEntry {
        BsEntry { edge, level: 1, t }
    }

    #[test]
    fn two_single_leaf_pieces() {
        let a = PieceReport::new("a", 0, vec![leaf(0, 0.2)], 3);
        let b = PieceReport::new("b", 0, vec![leaf(0, 0.8)], 3);
        let s = mayer_vietoris_assemble(&[a, b], &[Overlap { edge: 0, lo: 0.4, hi: 0.6 }]).unwrap();
        assert_eq!(s.bs_leaves.len(), 2);
        assert_eq!(s.truncated_dims[&3], 2);
    }

    #[test]
    fn overlap_with_leaf_is_rejected() {
        let a = PieceReport::new("a", 2, vec![leaf(1, 0.5)], 1);
        let err = mayer_vietoris_assemble(&[a], &[Overlap { edge: 1, lo: 0.4, hi: 0.6 }]).unwrap_err();
        assert!(matches!(err, Error::OverlapContainsBS(_)));
    }

    fn specs_and_order() -> impl Strategy<Value = (Vec<(usize, usize)>, Vec<usize>)> {
        proptest::collection::vec((0usize..3, 0usize..4), 1..6).prop_flat_map(|specs| {
            let order: Vec<usize> = (0..specs.len()).collect();
            (Just(specs), Just(order).prop_shuffle())
        })
    }

    proptest! {
        #[test]
        fn order_does_not_matter((specs, order) in specs_and_order()) {
            let pieces: Vec<PieceReport> = specs
                .iter()
                .enumerate()
                .map(|(i, &(cn, m))| {
                    let bs = (0..m).map(|j| leaf(i, 0.1 * (j + 1) as f64)).collect();
                    PieceReport::new(format!("p{i}"), 2 * cn, bs, 4)
                })
                .collect();
            let shuffled: Vec<PieceReport> = order.iter().map(|&i| pieces[i].clone()).collect();
            let a = mayer_vietoris_assemble(&pieces, &[]).unwrap();
            let b = mayer_vietoris_assemble(&shuffled, &[]).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
