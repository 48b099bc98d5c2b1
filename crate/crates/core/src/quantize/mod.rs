//! Global quantization: per-edge Bohr-Sommerfeld data, per-singular-leaf
//! contributions and their assembly.

mod assembly;
mod surgery;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

pub use assembly::{decompose, mayer_vietoris_assemble, Overlap, PieceReport};
pub use surgery::{default_lobe_area, insert_pairs, surgery_insert_pair, SurgeryOp};

use crate::cech::{build_model, cohomology_dims, cohomology_dims_exact, CechComplex, EXACT_MAX_ORDER};
use crate::error::{Error, Result};
use crate::geometry::{detect_singularities_with, DetectOptions, SingularPoint, SurfaceSystem};
use crate::poly::Poly;
use crate::reeb::{build_reeb_graph, leaf_graph, LeafGraph, ReebGraph, ReebOptions, VertexKind};
use crate::report::round_sig;
use crate::transport::{find_bs_leaves, ActionProfile, BSLeaf, ProfileOptions};

/// Worker threads for per-edge work: `QUANT_THREADS` if set, otherwise the
/// available parallelism.
pub fn thread_count() -> usize {
    std::env::var("QUANT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// `f(0), ..., f(n - 1)` on a pool of `thread_count()` workers, in order.
pub fn parallel_map<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    match rayon::ThreadPoolBuilder::new().num_threads(thread_count()).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalysisOptions {
    pub detect: DetectOptions,
    pub reeb: ReebOptions,
    pub profile: ProfileOptions,
}

/// Everything the quantization needs about one system.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub system_name: String,
    /// Euler characteristic declared by the system, if it is closed.
    pub euler_characteristic: Option<i64>,
    pub reeb: ReebGraph,
    /// Action profile per Reeb edge.
    pub profiles: Vec<ActionProfile>,
    /// Action at the two ends of every edge, used for area bookkeeping.
    pub end_actions: Vec<[f64; 2]>,
    /// Bohr-Sommerfeld leaves per edge, singular ones included.
    pub bs_leaves: Vec<Vec<BSLeaf>>,
    /// Leaf graph per hyperbolic vertex, loop families matched to edges.
    pub leaf_graphs: BTreeMap<usize, LeafGraph>,
    pub bs_tol: f64,
}

/// Singularities, Reeb graph, action profiles, Bohr-Sommerfeld leaves and
/// singular-leaf graphs of a system.
pub fn analyze(system: &SurfaceSystem, opts: &AnalysisOptions) -> Result<Analysis> {
    let points = detect_singularities_with(system, &opts.detect)?;
    analyze_with_points(system, &points, opts)
}

pub fn analyze_with_points(
    system: &SurfaceSystem,
    points: &[SingularPoint],
    opts: &AnalysisOptions,
) -> Result<Analysis> {
    let reeb = build_reeb_graph(system, points, &opts.reeb)?;
    let profiles: Vec<ActionProfile> = parallel_map(reeb.edges.len(), |e| {
        let fam = reeb.edges[e]
            .family
            .as_ref()
            .ok_or_else(|| Error::TracingFailure(format!("edge {e} has no leaf family")))?;
        ActionProfile::traced(system, e, fam, reeb.edge_ends(e), &opts.profile)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let hyper: Vec<usize> =
        (0..reeb.vertices.len()).filter(|&v| reeb.vertices[v].kind == VertexKind::HyperbolicLeaf).collect();
    let graphs: Vec<LeafGraph> =
        parallel_map(hyper.len(), |i| leaf_graph(system, &reeb, hyper[i], &opts.profile.trace))
            .into_iter()
            .collect::<Result<_>>()?;
    Analysis::assemble(
        system.name.clone(),
        system.euler_characteristic,
        reeb,
        profiles,
        hyper.into_iter().zip(graphs).collect(),
        opts.detect.tol.bs_tol,
    )
}

impl Analysis {
    /// Fills in end actions and Bohr-Sommerfeld leaves.
    pub fn assemble(
        system_name: String,
        euler_characteristic: Option<i64>,
        reeb: ReebGraph,
        profiles: Vec<ActionProfile>,
        leaf_graphs: BTreeMap<usize, LeafGraph>,
        bs_tol: f64,
    ) -> Result<Analysis> {
        let end_actions = profiles.iter().map(ActionProfile::end_values).collect();
        let bs_leaves = parallel_map(profiles.len(), |e| find_bs_leaves(&profiles[e], bs_tol))
            .into_iter()
            .collect::<Result<_>>()?;
        Ok(Analysis { system_name, euler_characteristic, reeb, profiles, end_actions, bs_leaves, leaf_graphs, bs_tol })
    }

    /// `(s_e, s_h)`: singular points of each kind.
    pub fn singular_counts(&self) -> (usize, usize) {
        self.reeb.singular_counts()
    }

    pub fn regular_bs(&self) -> Vec<BSLeaf> {
        self.bs_leaves.iter().flatten().filter(|b| !b.singular).copied().collect()
    }

    pub fn singular_bs(&self) -> Vec<BSLeaf> {
        self.bs_leaves.iter().flatten().filter(|b| b.singular).copied().collect()
    }

    /// Symplectic area swept by the leaves of edge `e`.
    pub fn edge_area(&self, e: usize) -> f64 {
        (self.end_actions[e][1] - self.end_actions[e][0]).abs()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.end_actions.len()).map(|e| self.edge_area(e)).sum()
    }

    /// Cut parameter of edge `e` for the piece decomposition: the middle of
    /// the gap between Bohr-Sommerfeld leaves that contains the midpoint.
    pub fn cut(&self, e: usize) -> (f64, f64) {
        let t_max = self.profiles[e].t_max;
        let mut stops = vec![0.0];
        stops.extend(self.bs_leaves[e].iter().filter(|b| !b.singular).map(|b| b.t));
        stops.push(t_max);
        let mid = 0.5 * t_max;
        let i = stops.partition_point(|&s| s <= mid).clamp(1, stops.len() - 1);
        let (a, b) = (stops[i - 1], stops[i]);
        (0.5 * (a + b), b - a)
    }

    /// Čech model of the neighborhood of hyperbolic vertex `v` at order `N`:
    /// actions from the fitted profiles, in the distance from the singular
    /// level, pinned to `2 pi n` at the regular Bohr-Sommerfeld leaves
    /// on `v`'s side of each edge's cut.
    pub fn cech_model(&self, v: usize, order: usize) -> Result<CechComplex<f64>> {
        let g = self.leaf_graphs.get(&v).ok_or_else(|| Error::InvalidInput(format!("vertex {v} has no leaf graph")))?;
        let mut polys = Vec::new();
        let mut params = Vec::new();
        for fam in &g.loop_families {
            let e = fam.edge.ok_or_else(|| Error::InvalidInput(format!("a loop family at vertex {v} has no edge")))?;
            let prof = &self.profiles[e];
            let t_max = prof.t_max;
            let (cut, _) = self.cut(e);
            let above = fam.side > 0;
            let local = |t: f64| if above { t } else { t_max - t };
            let poly: Poly<f64> = if above { prof.fit.clone() } else { prof.fit.shift(t_max).rescale_arg(-1.0) };
            let mut pins = Vec::new();
            for b in self.bs_leaves[e].iter().filter(|b| !b.singular) {
                if (above && b.t < cut) || (!above && b.t > cut) {
                    pins.push((local(b.t), std::f64::consts::TAU * b.level as f64));
                }
            }
            polys.push(poly.pinned(&pins));
            params.push(pins.iter().map(|p| p.0).collect());
        }
        build_model(g, order, polys, params)
    }

    /// Regular Bohr-Sommerfeld leaves not owned by any hyperbolic vertex
    /// piece.
    pub fn regular_piece_bs(&self) -> usize {
        let mut n = 0;
        for (e, edge) in self.reeb.edges.iter().enumerate() {
            let (cut, _) = self.cut(e);
            let hyp = |v: usize| self.reeb.vertices[v].kind == VertexKind::HyperbolicLeaf;
            for b in self.bs_leaves[e].iter().filter(|b| !b.singular) {
                let owner = if b.t < cut { edge.lower } else { edge.upper };
                if !hyp(owner) {
                    n += 1;
                }
            }
        }
        n
    }
}

/// One Bohr-Sommerfeld leaf in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsEntry {
    pub edge: usize,
    pub level: i64,
    pub t: f64,
}

impl BsEntry {
    pub fn of(b: &BSLeaf) -> BsEntry {
        BsEntry { edge: b.edge_id, level: b.level, t: round_sig(b.t) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizationReport {
    pub bs_count: usize,
    pub bs_leaves: Vec<BsEntry>,
    pub chi: i64,
    pub chi_declared: Option<i64>,
    pub cn_factor_count: usize,
    pub dimension: String,
    /// `H^0` and `H^k`, `k >= 2`: always zero.
    pub h_other_degrees: usize,
    pub s_e: usize,
    pub s_h: usize,
    pub singular_bs_leaves: Vec<BsEntry>,
    pub system: String,
    /// `N -> cn_factor_count (N + 1) + bs_count`.
    pub truncated_dims: BTreeMap<String, usize>,
}

/// The cohomology of the whole system at truncation orders `0..=n_max`.
pub fn quantize(analysis: &Analysis, n_max: usize) -> QuantizationReport {
    let (s_e, s_h) = analysis.singular_counts();
    let regular = analysis.regular_bs();
    let cn = 2 * s_h;
    let m = regular.len();
    QuantizationReport {
        bs_count: m,
        bs_leaves: regular.iter().map(BsEntry::of).collect(),
        chi: s_e as i64 - s_h as i64,
        chi_declared: analysis.euler_characteristic,
        cn_factor_count: cn,
        dimension: if cn == 0 { format!("{m}") } else { format!("infinite ({cn} graded C^N factors) + {m}") },
        h_other_degrees: 0,
        s_e,
        s_h,
        singular_bs_leaves: analysis.singular_bs().iter().map(BsEntry::of).collect(),
        system: analysis.system_name.clone(),
        truncated_dims: (0..=n_max).map(|n| (n.to_string(), truncated_dim(cn, m, n))).collect(),
    }
}

pub fn truncated_dim(cn_factor_count: usize, bs_count: usize, order: usize) -> usize {
    cn_factor_count * (order + 1) + bs_count
}

impl QuantizationReport {
    pub fn dim_at(&self, order: usize) -> Option<usize> {
        self.truncated_dims.get(&order.to_string()).copied()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

/// Truncated dimension at order `N` from brute-force ranks: the Čech model
/// of every hyperbolic vertex plus the Bohr-Sommerfeld leaves of the regular
/// pieces. Uses the exact path when `exact` is set and `N` allows it.
pub fn rank_dim(analysis: &Analysis, order: usize, exact: bool) -> Result<usize> {
    let mut total = analysis.regular_piece_bs();
    for &v in analysis.leaf_graphs.keys() {
        let c = analysis.cech_model(v, order)?;
        total += if exact && order <= EXACT_MAX_ORDER { cohomology_dims_exact(&c)?.h1 } else { cohomology_dims(&c).h1 };
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PoincareHopf {
    pub chi: i64,
    pub declared: Option<i64>,
    pub ok: bool,
}

/// `s_e - s_h` against the declared Euler characteristic; systems without
/// one pass trivially.
pub fn poincare_hopf_check(analysis: &Analysis) -> PoincareHopf {
    let (e, h) = analysis.singular_counts();
    let chi = e as i64 - h as i64;
    PoincareHopf {
        chi,
        declared: analysis.euler_characteristic,
        ok: analysis.euler_characteristic.is_none_or(|d| d == chi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{double_well, sphere_height, standing_torus};

    pub(crate) fn sphere_analysis(k: f64) -> Analysis {
        let mut opts = AnalysisOptions::default();
        opts.reeb.mesh_triangles = 1000;
        analyze(&sphere_height(k), &opts).unwrap()
    }

    #[test]
    fn sphere_report() {
        let a = sphere_analysis(4.0);
        let r = quantize(&a, 6);
        assert_eq!((r.s_e, r.s_h, r.cn_factor_count, r.bs_count), (2, 0, 0, 3));
        assert!((0..=6).all(|n| r.dim_at(n) == Some(3)));
        assert_eq!(rank_dim(&a, 3, true).unwrap(), 3);
        let ph = poincare_hopf_check(&a);
        assert!(ph.ok && ph.chi == 2);
        let text = r.to_toml();
        assert!(text.contains("cn_factor_count = 0"));
        assert!(text.find("bs_count").unwrap() < text.find("system").unwrap());
    }

    #[test]
    fn torus_report_and_ranks() {
        let a = analyze(&standing_torus(6.0, 0.5), &AnalysisOptions::default()).unwrap();
        let r = quantize(&a, 4);
        assert_eq!((r.s_e, r.s_h, r.cn_factor_count), (2, 2, 4));
        assert!(poincare_hopf_check(&a).ok);
        for n in 0..=4 {
            assert_eq!(rank_dim(&a, n, n <= 2).unwrap(), r.dim_at(n).unwrap(), "N={n}");
        }
    }

    #[test]
    fn double_well_lobes() {
        let a = analyze(&double_well(std::f64::consts::TAU), &AnalysisOptions::default()).unwrap();
        let r = quantize(&a, 2);
        assert_eq!(r.cn_factor_count, 2);
        // Both lobes are tuned to 2π: their singular leaf is Bohr-Sommerfeld
        // and is left out of the count.
        assert!(!r.singular_bs_leaves.is_empty());
        assert_eq!(rank_dim(&a, 2, true).unwrap(), r.dim_at(2).unwrap());
    }

    #[test]
    fn thread_pool_keeps_order() {
        let v = parallel_map(37, |i| i * i);
        assert_eq!(v, (0..37).map(|i| i * i).collect::<Vec<_>>());
        assert!(thread_count() >= 1);
    }
}
