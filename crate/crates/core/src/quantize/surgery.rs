//! Inserting a hyperbolic/elliptic pair into a cylinder of regular leaves.
//!
//! The surgery acts on the leaf space only: edge `e` is cut at `t_s`, the cut
//! becomes a figure-eight leaf `h`, and a new minimum `x` caps the extra lobe.
//! The lobe's area is taken out of the leaves above `h` on the continuing
//! edge, proportionally, so that the total area is unchanged.

use std::f64::consts::{SQRT_2, TAU};
use std::sync::Arc;

use super::Analysis;
use crate::error::{Error, Result};
use crate::geometry::{SingularKind, SingularPoint};
use crate::reeb::{LeafGraph, ReebEdge, ReebVertex, VertexKind};
use crate::transport::{ActionFn, ActionProfile, EdgeEnd, ProfileOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurgeryOp {
    pub target_edge: usize,
    /// Edge parameter of the new singular leaf, strictly inside the edge.
    pub position: f64,
    pub lobe_area: f64,
}

/// An irrational multiple of `2 pi` below half the budget, so the new lobe
/// is not accidentally Bohr-Sommerfeld.
pub fn default_lobe_area(budget: f64) -> f64 {
    let mut a = TAU * (SQRT_2 - 1.0);
    while a >= 0.5 * budget.abs() {
        a *= 0.5;
    }
    a
}

fn synthetic_point(kind: SingularKind, value: f64) -> SingularPoint {
    let s = if kind == SingularKind::Elliptic { 1.0 } else { -1.0 };
    SingularPoint {
        chart: 0,
        location: [f64::NAN; 2],
        position: [f64::NAN; 3],
        hessian: [[1.0, 0.0], [0.0, s]],
        kind,
        critical_value: value,
    }
}

pub fn surgery_insert_pair(analysis: &Analysis, op: &SurgeryOp, opts: &ProfileOptions) -> Result<Analysis> {
    let e = op.target_edge;
    let edge = analysis.reeb.edges.get(e).ok_or_else(|| Error::OutOfRange(format!("no edge {e}")))?.clone();
    let old = analysis.profiles[e].clone();
    let t_max = old.t_max;
    let ts = op.position;
    let margin = 1e-9 * t_max;
    if !(ts > margin && ts < t_max - margin) {
        return Err(Error::OutOfRange(format!("surgery position {ts} is not inside edge {e} (0, {t_max})")));
    }
    if !(op.lobe_area > 0.0) {
        return Err(Error::InvalidInput(format!("lobe area must be positive, got {}", op.lobe_area)));
    }
    let [bottom, top] = analysis.end_actions[e];
    let s = old.value(ts)?;
    let budget = top - s;
    if op.lobe_area >= budget.abs() {
        return Err(Error::InsufficientArea(format!(
            "lobe area {} does not fit in the area {} above t = {ts} on edge {e}",
            op.lobe_area,
            budget.abs()
        )));
    }
    let a = op.lobe_area * budget.signum();
    let shrink = 1.0 - op.lobe_area / budget.abs();
    let c_h = edge.lo + ts;
    let delta = 0.5 * ts.min(t_max - ts);

    let mut reeb = analysis.reeb.clone();
    let h = reeb.vertices.len();
    reeb.vertices.push(ReebVertex {
        kind: VertexKind::HyperbolicLeaf,
        critical_value: c_h,
        singular_points: vec![synthetic_point(SingularKind::Hyperbolic, c_h)],
        position: [f64::NAN; 3],
    });
    let x = h + 1;
    reeb.vertices.push(ReebVertex {
        kind: VertexKind::EllipticExtremum,
        critical_value: c_h - delta,
        singular_points: vec![synthetic_point(SingularKind::Elliptic, c_h - delta)],
        position: [f64::NAN; 3],
    });
    let lobe = reeb.edges.len();
    let cont = lobe + 1;
    reeb.edges[e] = ReebEdge { lower: edge.lower, upper: h, lo: edge.lo, hi: c_h, family: None };
    reeb.edges.push(ReebEdge { lower: x, upper: h, lo: c_h - delta, hi: c_h, family: None });
    reeb.edges.push(ReebEdge { lower: h, upper: edge.upper, lo: c_h, hi: edge.hi, family: None });

    let below = old.clone();
    let low_fn: ActionFn = Arc::new(move |t| below.value(t));
    let lobe_fn: ActionFn = Arc::new(move |t| Ok(a * t / delta));
    let above = old.clone();
    let cont_fn: ActionFn = Arc::new(move |t| Ok(s + a + (above.value(ts + t)? - s) * shrink));
    let mut profiles = analysis.profiles.clone();
    profiles[e] = ActionProfile::from_fn(e, ts, [old.ends[0], EdgeEnd::Hyperbolic], low_fn, opts)?;
    profiles.push(ActionProfile::from_fn(lobe, delta, [EdgeEnd::Elliptic, EdgeEnd::Hyperbolic], lobe_fn, opts)?);
    profiles.push(ActionProfile::from_fn(cont, t_max - ts, [EdgeEnd::Hyperbolic, old.ends[1]], cont_fn, opts)?);

    let mut leaf_graphs = analysis.leaf_graphs.clone();
    if let Some(g) = leaf_graphs.get_mut(&edge.upper) {
        for fam in g.loop_families.iter_mut().filter(|f| f.side < 0 && f.edge == Some(e)) {
            fam.edge = Some(cont);
        }
    }
    let mut g = LeafGraph::figure_eight();
    let mut lower_edges = [e, lobe].into_iter();
    for fam in g.loop_families.iter_mut() {
        fam.edge = Some(if fam.side > 0 { cont } else { lower_edges.next().expect("two lobes below") });
    }
    leaf_graphs.insert(h, g);

    let mut next = Analysis::assemble(
        analysis.system_name.clone(),
        analysis.euler_characteristic,
        reeb,
        profiles,
        leaf_graphs,
        analysis.bs_tol,
    )?;
    next.end_actions = analysis.end_actions.clone();
    next.end_actions[e] = [bottom, s];
    next.end_actions.push([0.0, a]);
    next.end_actions.push([s + a, top]);
    Ok(next)
}

/// `r` successive insertions, each at the middle of the edge with the most
/// area, with `default_lobe_area`.
pub fn insert_pairs(analysis: &Analysis, r: usize, opts: &ProfileOptions) -> Result<Analysis> {
    let mut cur = analysis.clone();
    for _ in 0..r {
        let e = (0..cur.profiles.len())
            .max_by(|&a, &b| cur.edge_area(a).total_cmp(&cur.edge_area(b)).then(b.cmp(&a)))
            .ok_or_else(|| Error::InvalidInput("no edge to operate on".into()))?;
        let position = 0.5 * cur.profiles[e].t_max;
        let budget = cur.end_actions[e][1] - cur.profiles[e].value(position)?;
        let op = SurgeryOp { target_edge: e, position, lobe_area: default_lobe_area(budget) };
        cur = surgery_insert_pair(&cur, &op, opts)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantize::tests::sphere_analysis;
    use crate::quantize::{poincare_hopf_check, quantize, rank_dim};

    #[test]
    fn one_pair_on_the_sphere() {
        let a = sphere_analysis(4.0);
        let opts = ProfileOptions::default();
        let t_max = a.profiles[0].t_max;
        let op = SurgeryOp { target_edge: 0, position: 0.5 * t_max, lobe_area: 1.0 };
        let b = surgery_insert_pair(&a, &op, &opts).unwrap();
        assert_eq!(b.singular_counts(), (3, 1));
        let ph = poincare_hopf_check(&b);
        assert!(ph.ok && ph.chi == 2);
        assert!((b.total_area() - a.total_area()).abs() < 1e-9);
        assert_eq!(b.reeb.edges.len(), 3);
        assert_eq!(b.reeb.degree(b.reeb.vertices.len() - 2), 3);
        // The new lobe's action ends at its area.
        assert!((b.end_actions[1][1] - 1.0).abs() < 1e-15);
        let r = quantize(&b, 3);
        assert_eq!(r.cn_factor_count, 2);
        assert_eq!(rank_dim(&b, 3, true).unwrap(), r.dim_at(3).unwrap());
    }

    #[test]
    fn repeated_insertions() {
        let a = sphere_analysis(4.0);
        let opts = ProfileOptions::default();
        for r in 1..=3 {
            let b = insert_pairs(&a, r, &opts).unwrap();
            assert_eq!(b.singular_counts(), (2 + r, r));
            assert_eq!(quantize(&b, 0).cn_factor_count, 2 * r);
            assert!(poincare_hopf_check(&b).ok);
            assert!((b.total_area() - a.total_area()).abs() < 1e-9);
            assert_eq!(rank_dim(&b, 2, false).unwrap(), quantize(&b, 2).dim_at(2).unwrap());
        }
    }

    #[test]
    fn bad_operations() {
        let a = sphere_analysis(4.0);
        let opts = ProfileOptions::default();
        let t_max = a.profiles[0].t_max;
        let at_end = SurgeryOp { target_edge: 0, position: t_max, lobe_area: 1.0 };
        assert!(matches!(surgery_insert_pair(&a, &at_end, &opts), Err(Error::OutOfRange(_))));
        let at_start = SurgeryOp { position: 0.0, ..at_end };
        assert!(matches!(surgery_insert_pair(&a, &at_start, &opts), Err(Error::OutOfRange(_))));
        let huge = SurgeryOp { target_edge: 0, position: 0.5 * t_max, lobe_area: 100.0 };
        assert!(matches!(surgery_insert_pair(&a, &huge, &opts), Err(Error::InsufficientArea(_))));
        let missing = SurgeryOp { target_edge: 7, ..huge };
        assert!(surgery_insert_pair(&a, &missing, &opts).is_err());
    }

    #[test]
    fn default_area_is_not_a_multiple() {
        for b in [0.5, 3.0, 25.0, 1e3] {
            let a = default_lobe_area(b);
            assert!(a < 0.5 * b);
            let r = a / TAU;
            assert!((r - r.round()).abs() > 1e-3);
        }
    }
}
