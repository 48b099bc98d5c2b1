//! TOML description of a Čech model and its report.
//!
//! ```toml
//! order = 3
//! graph = "figure-eight"        # or `vertices` plus `arcs`
//! # vertices = 1
//! # arcs = [[0, 3, 0, 0], [0, 1, 0, 2]]   # from vertex, slot, to vertex, slot
//! chains = [1, 1]               # optional, rectangles per arc
//!
//! [[family]]                    # one per loop family, in walk order
//! action = [0.3, 6.283185307179586]
//! bs = [0.9522535170724314]
//! ```

use serde::{Deserialize, Serialize};

use super::{build_model, CechComplex, CohomologyDims};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::reeb::{LeafArc, LeafGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<[usize; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<Vec<usize>>,
    #[serde(default)]
    pub family: Vec<FamilyEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyEntry {
    pub action: Vec<f64>,
    #[serde(default)]
    pub bs: Vec<f64>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<ModelFile> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model serializes")
    }

    pub fn leaf_graph(&self) -> Result<LeafGraph> {
        match (&self.graph, self.vertices, &self.arcs) {
            (Some(name), None, None) => LeafGraph::by_name(name),
            (None, Some(v), Some(arcs)) => {
                LeafGraph::from_arcs(v, arcs.iter().map(|a| LeafArc { from: (a[0], a[1]), to: (a[2], a[3]) }).collect())
            }
            _ => Err(Error::InvalidInput("give either `graph` or both `vertices` and `arcs`".into())),
        }
    }

    pub fn build(&self) -> Result<CechComplex<f64>> {
        let g = self.leaf_graph()?;
        let polys = self.family.iter().map(|f| Poly::new(f.action.clone())).collect();
        let params = self.family.iter().map(|f| f.bs.clone()).collect();
        let c = build_model(&g, self.order, polys, params)?;
        match &self.chains {
            Some(ch) => c.with_chains(ch.clone()),
            None => Ok(c),
        }
    }

    /// Description of an existing complex.
    pub fn describe(c: &CechComplex<f64>) -> ModelFile {
        let g = &c.leaf_graph;
        ModelFile {
            order: c.order,
            graph: None,
            vertices: Some(g.vertex_count),
            arcs: Some(g.arcs.iter().map(|a| [a.from.0, a.from.1, a.to.0, a.to.1]).collect()),
            chains: Some(c.chains.clone()),
            family: c
                .holonomy_polys
                .iter()
                .zip(&c.bs_params)
                .map(|(p, bs)| FamilyEntry { action: p.coeffs().to_vec(), bs: bs.clone() })
                .collect(),
        }
    }
}

/// Dimensions and conditioning of one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub order: usize,
    pub arcs: usize,
    pub bs_count: usize,
    pub c0_dim: usize,
    pub c1_dim: usize,
    pub rank: usize,
    pub h0_raw: usize,
    pub h0_smooth: usize,
    pub h1: usize,
    pub h2: usize,
    pub formula_h1: usize,
    pub sigma_max: f64,
    pub sigma_min_kept: f64,
    pub condition: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ModelReport {
    pub fn new(c: &CechComplex<f64>, d: &CohomologyDims<f64>) -> ModelReport {
        let (smax, skept, cond) =
            d.rank_info.as_ref().map(|i| (i.sigma_max, i.sigma_min_kept, i.condition())).unwrap_or((0.0, 0.0, 1.0));
        ModelReport {
            order: c.order,
            arcs: c.leaf_graph.arcs.len(),
            bs_count: c.bs_count(),
            c0_dim: c.c0_dim,
            c1_dim: c.c1_dim,
            rank: d.rank,
            h0_raw: d.h0_raw,
            h0_smooth: d.h0_smooth,
            h1: d.h1,
            h2: d.h2,
            formula_h1: super::general_leaf_h1(&c.leaf_graph, c.order, c.bs_count()),
            sigma_max: crate::report::round_sig(smax),
            sigma_min_kept: crate::report::round_sig(skept),
            condition: crate::report::round_sig(cond),
            warning: d.warning.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::cohomology_dims;

    const FIG8: &str = r#"
order = 3
graph = "figure-eight"

[[family]]
action = [0.3, 6.283185307179586]
bs = [0.9522535170724314]

[[family]]
action = [1.0, 2.0]

[[family]]
action = [2.0, -1.0]
"#;

    #[test]
    fn parse_build_report() {
        let m = ModelFile::parse(FIG8).unwrap();
        let c = m.build().unwrap();
        let d = cohomology_dims(&c);
        assert_eq!(d.h1, 9);
        let r = ModelReport::new(&c, &d);
        assert_eq!(r.formula_h1, 9);
        let text = r.to_toml();
        assert!(text.contains("h1 = 9"));
        // Explicit description builds the same matrix.
        let again = ModelFile::parse(&ModelFile::describe(&c).to_toml()).unwrap().build().unwrap();
        assert_eq!(again.d0, c.d0);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ModelFile::parse("order = -1"), Err(Error::Parse(_))));
        let both = ModelFile::parse("order = 1\ngraph = \"figure-eight\"\nvertices = 1\narcs = []").unwrap();
        assert!(both.leaf_graph().is_err());
        let short = ModelFile::parse("order = 1\ngraph = \"figure-eight\"\n[[family]]\naction = [0.0]").unwrap();
        assert!(short.build().is_err());
        let bad = FIG8.replace("bs = [0.9522535170724314]", "bs = [0.5]");
        assert!(matches!(ModelFile::parse(&bad).unwrap().build(), Err(Error::InconsistentHolonomy(_))));
    }
}
