//! Jet-truncated Čech complex of flat sections around a singular leaf.
//!
//! The cover has one chain of rectangles along every arc of the leaf graph
//! and one cross per hyperbolic point, split into its four quadrants. A
//! 0-cochain is a jet of order `N` in the transversal coordinate on each
//! rectangle, plus point values on the Bohr-Sommerfeld leaves. Sections on
//! the quadrants are flat at the singular leaf, so their jets vanish and only
//! their point values survive.

pub mod model_file;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Zero};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{exact_nullity, exact_rank, numeric_rank, select_columns, GaussianRational, RankInfo};
use crate::poly::Poly;
use crate::reeb::LeafGraph;
use crate::scalar::{lit, LinalgReal};

pub use model_file::ModelFile;

/// Relative singular-value threshold for the numeric rank.
pub const RANK_TOL: f64 = 1e-8;
/// Allowed `|hol - 1|` at a declared Bohr-Sommerfeld parameter.
pub const HOLONOMY_TOL: f64 = 1e-9;
/// Parameters closer than this are treated as one leaf.
pub const MERGE_TOL: f64 = 1e-9;
/// Largest jet order handled by the exact path.
pub const EXACT_MAX_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoverSet {
    Rect { arc: usize, index: usize },
    Quadrant { vertex: usize, quadrant: usize },
}

/// Coordinate of `C⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    Jet { arc: usize, index: usize, degree: usize },
    Value { family: usize, bs: usize, set: CoverSet },
}

/// Coordinate of `C¹`. Jet overlap `o` of an arc sits between rectangles
/// `o - 1` and `o`; overlaps `0` and `n` touch the crosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Row {
    Jet { arc: usize, overlap: usize, degree: usize },
    Value { family: usize, bs: usize, step: usize },
}

/// The sets met by one Bohr-Sommerfeld leaf, in walk order, with the phase of
/// the step leaving each set. The last step is closed up so that the product
/// of all factors is exactly one.
#[derive(Debug, Clone)]
struct LeafCycle<T> {
    family: usize,
    bs: usize,
    sets: Vec<CoverSet>,
    phases: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct CechComplex<T> {
    pub leaf_graph: LeafGraph,
    pub order: usize,
    /// Action `A(t)` per loop family, `t > 0` on the family's side.
    pub holonomy_polys: Vec<Poly<T>>,
    /// Sorted, merged Bohr-Sommerfeld parameters per loop family.
    pub bs_params: Vec<Vec<T>>,
    /// Rectangles per arc.
    pub chains: Vec<usize>,
    /// Constant phase changes applied to the sections of single sets.
    pub gauge: Vec<(CoverSet, T)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub c0_dim: usize,
    pub c1_dim: usize,
    pub d0: DMatrix<Complex<T>>,
    cycles: Vec<LeafCycle<T>>,
}

/// Dimensions of the truncated cohomology.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyDims<T> {
    pub h0_raw: usize,
    pub h0_smooth: usize,
    pub h1: usize,
    pub h2: usize,
    pub rank: usize,
    /// Singular-value data; absent for the exact path.
    pub rank_info: Option<RankInfo<T>>,
    /// Set when singular values sit close to the rank threshold.
    pub warning: Option<String>,
}

/// `(#arcs)(N + 1) + m`.
pub fn general_leaf_h1(leaf_graph: &LeafGraph, order: usize, bs_count: usize) -> usize {
    leaf_graph.arcs.len() * (order + 1) + bs_count
}

/// Builds the complex with one rectangle per arc.
pub fn build_model<T: LinalgReal>(
    leaf_graph: &LeafGraph,
    order: usize,
    holonomy_polys: Vec<Poly<T>>,
    bs_params: Vec<Vec<T>>,
) -> Result<CechComplex<T>> {
    let chains = vec![1; leaf_graph.arcs.len()];
    CechComplex::assemble(leaf_graph.clone(), order, holonomy_polys, bs_params, chains, Vec::new())
}

/// The coboundary `d0 : C⁰ → C¹`.
pub fn coboundary_matrix<T: LinalgReal>(complex: &CechComplex<T>) -> &DMatrix<Complex<T>> {
    &complex.d0
}

/// Numeric dimensions with an SVD rank at `RANK_TOL`.
pub fn cohomology_dims<T: LinalgReal>(complex: &CechComplex<T>) -> CohomologyDims<T> {
    let info = numeric_rank(&complex.d0, lit(RANK_TOL));
    let value_cols = complex.value_columns();
    let value_rank = numeric_rank(&select_columns(&complex.d0, &value_cols), lit(RANK_TOL)).rank;
    let h0_raw = complex.c0_dim - info.rank;
    let warning = info.near_threshold.then(|| {
        format!(
            "singular values near the rank threshold (kept {:e}, dropped {:e}, condition {:e})",
            info.sigma_min_kept.to_f64_lossy(),
            info.sigma_max_dropped.to_f64_lossy(),
            info.condition().to_f64_lossy()
        )
    });
    CohomologyDims {
        h0_raw,
        h0_smooth: h0_raw - (value_cols.len() - value_rank),
        h1: complex.c1_dim - info.rank,
        h2: 0,
        rank: info.rank,
        rank_info: Some(info),
        warning,
    }
}

/// Exact dimensions over the Gaussian rationals. Every float entering the
/// matrix is converted exactly, and unit factors are replaced by exact unit
/// rationals with the same tangent half-angle, so a cycle's factors still
/// multiply to one.
pub fn cohomology_dims_exact<T: LinalgReal>(complex: &CechComplex<T>) -> Result<CohomologyDims<T>> {
    if complex.order > EXACT_MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "exact rank is limited to jet order {EXACT_MAX_ORDER}, got {}",
            complex.order
        )));
    }
    let rows = complex.exact_rows();
    let rank = exact_rank(&rows);
    let value_cols = complex.value_columns();
    let sub: Vec<Vec<GaussianRational>> =
        rows.iter().map(|r| value_cols.iter().map(|&c| r[c].clone()).collect()).collect();
    let value_null = exact_nullity(&sub, value_cols.len());
    let h0_raw = complex.c0_dim - rank;
    Ok(CohomologyDims {
        h0_raw,
        h0_smooth: h0_raw - value_null,
        h1: complex.c1_dim - rank,
        h2: 0,
        rank,
        rank_info: None,
        warning: None,
    })
}

impl<T: LinalgReal> CechComplex<T> {
    fn assemble(
        leaf_graph: LeafGraph,
        order: usize,
        holonomy_polys: Vec<Poly<T>>,
        bs_params: Vec<Vec<T>>,
        chains: Vec<usize>,
        gauge: Vec<(CoverSet, T)>,
    ) -> Result<Self> {
        let families = leaf_graph.loop_families.len();
        if holonomy_polys.len() != families || bs_params.len() != families {
            return Err(Error::InvalidInput(format!(
                "leaf graph has {families} loop families, got {} actions and {} parameter lists",
                holonomy_polys.len(),
                bs_params.len()
            )));
        }
        if chains.len() != leaf_graph.arcs.len() {
            return Err(Error::InvalidChain(format!(
                "{} chain lengths for {} arcs",
                chains.len(),
                leaf_graph.arcs.len()
            )));
        }
        if let Some(e) = chains.iter().position(|&n| n == 0) {
            return Err(Error::InvalidChain(format!("arc {e} has no rectangles")));
        }
        let mut merged = Vec::with_capacity(families);
        for (f, params) in bs_params.into_iter().enumerate() {
            merged.push(merge_params(f, params, &holonomy_polys[f])?);
        }
        let mut c = CechComplex {
            leaf_graph,
            order,
            holonomy_polys,
            bs_params: merged,
            chains,
            gauge,
            columns: Vec::new(),
            rows: Vec::new(),
            c0_dim: 0,
            c1_dim: 0,
            d0: DMatrix::zeros(0, 0),
            cycles: Vec::new(),
        };
        c.cycles = c.leaf_cycles();
        c.layout();
        let dense =
            c.dense(&|phase: T| Complex::new(T::zero(), phase).exp(), &|p: &Poly<T>| Jet::unit_exp_of(p, order));
        c.d0 = DMatrix::from_fn(c.c1_dim, c.c0_dim, |i, j| dense[i][j]);
        Ok(c)
    }

    fn rebuild(
        &self,
        chains: Vec<usize>,
        polys: Vec<Poly<T>>,
        params: Vec<Vec<T>>,
        gauge: Vec<(CoverSet, T)>,
    ) -> Result<Self> {
        Self::assemble(self.leaf_graph.clone(), self.order, polys, params, chains, gauge)
    }

    /// Same model at another jet order.
    pub fn with_order(&self, order: usize) -> Self {
        Self::assemble(
            self.leaf_graph.clone(),
            order,
            self.holonomy_polys.clone(),
            self.bs_params.clone(),
            self.chains.clone(),
            self.gauge.clone(),
        )
        .expect("inputs already validated")
    }

    pub fn with_chains(&self, chains: Vec<usize>) -> Result<Self> {
        self.rebuild(chains, self.holonomy_polys.clone(), self.bs_params.clone(), self.gauge.clone())
    }

    /// Replaces the rectangle chain on `arc` by a single rectangle carrying
    /// the total transport factor.
    pub fn chain_collapse(&self, arc: usize) -> Result<Self> {
        let mut chains = self.chains.clone();
        match chains.get_mut(arc) {
            Some(0) => Err(Error::InvalidChain(format!("arc {arc} has no rectangles"))),
            Some(n) => {
                *n = 1;
                self.with_chains(chains)
            }
            None => Err(Error::InvalidChain(format!("no arc {arc}"))),
        }
    }

    /// Subdivides every rectangle chain `factor` times.
    pub fn refine_cover(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidInput("subdivision factor must be positive".into()));
        }
        self.with_chains(self.chains.iter().map(|n| n * factor).collect())
    }

    /// Multiplies every section on `set` by `exp(i phase)`.
    pub fn with_gauge(&self, set: CoverSet, phase: T) -> Result<Self> {
        let mut gauge = self.gauge.clone();
        gauge.push((set, phase));
        self.rebuild(self.chains.clone(), self.holonomy_polys.clone(), self.bs_params.clone(), gauge)
    }

    /// New transversal parameter `c t`, `c > 0`.
    pub fn reparametrized(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::InvalidInput("reparametrization factor must be positive".into()));
        }
        let polys = self.holonomy_polys.iter().map(|p| p.rescale_arg(T::one() / c)).collect();
        let params = self.bs_params.iter().map(|ps| ps.iter().map(|&t| t * c).collect()).collect();
        self.rebuild(self.chains.clone(), polys, params, self.gauge.clone())
    }

    /// Opposite orientation of every leaf: all transport factors inverted.
    pub fn reversed(&self) -> Self {
        let polys = self.holonomy_polys.iter().map(|p| p.scale(-T::one())).collect();
        self.rebuild(self.chains.clone(), polys, self.bs_params.clone(), self.gauge.clone())
            .expect("inputs already validated")
    }

    pub fn bs_count(&self) -> usize {
        self.bs_params.iter().map(Vec::len).sum()
    }

    /// Phase of one rectangle step along `arc`, as a polynomial in the
    /// signed transversal coordinate (positive on the `+` side).
    pub fn step_action(&self, arc: usize) -> Poly<T> {
        let (f, fam) = self
            .leaf_graph
            .loop_families
            .iter()
            .enumerate()
            .find(|(_, fam)| fam.side > 0i8 && fam.arcs.contains(&arc))
            .expect("every arc borders a + family");
        let share = T::from_usize(fam.arcs.len() * self.chains[arc]).expect("small integer");
        self.holonomy_polys[f].scale(T::one() / share)
    }

    /// Jet of the transport factor between consecutive rectangles on `arc`.
    pub fn transport_jet(&self, arc: usize) -> Jet<Complex<T>> {
        Jet::unit_exp_of(&self.step_action(arc), self.order)
    }

    fn value_columns(&self) -> Vec<usize> {
        (0..self.c0_dim).filter(|&j| matches!(self.columns[j], Column::Value { .. })).collect()
    }

    fn leaf_cycles(&self) -> Vec<LeafCycle<T>> {
        let mut out = Vec::new();
        for (f, fam) in self.leaf_graph.loop_families.iter().enumerate() {
            let sigma = if fam.side > 0i8 { T::one() } else { -T::one() };
            for (b, &t) in self.bs_params[f].iter().enumerate() {
                let s = sigma * t;
                let mut sets = Vec::new();
                let mut phases = Vec::new();
                let mut rect_total = T::zero();
                let mut quadrant_slots = Vec::new();
                for (i, &(v, q)) in fam.corners.iter().enumerate() {
                    quadrant_slots.push(sets.len());
                    sets.push(CoverSet::Quadrant { vertex: v, quadrant: q });
                    phases.push(T::zero());
                    let arc = fam.arcs[i];
                    let n = self.chains[arc];
                    let step = sigma * self.step_action(arc).eval(s);
                    let order: Vec<usize> = if fam.side > 0i8 { (0..n).collect() } else { (0..n).rev().collect() };
                    for j in order {
                        sets.push(CoverSet::Rect { arc, index: j });
                        phases.push(step);
                        rect_total += step;
                    }
                }
                let k = T::from_usize(quadrant_slots.len()).expect("small integer");
                let rest = (sigma * self.holonomy_polys[f].eval(t) - rect_total) / k;
                for &i in &quadrant_slots {
                    phases[i] = rest;
                }
                out.push(LeafCycle { family: f, bs: b, sets, phases });
            }
        }
        out
    }

    fn layout(&mut self) {
        let n1 = self.order + 1;
        self.columns.clear();
        self.rows.clear();
        for (arc, &n) in self.chains.iter().enumerate() {
            for index in 0..n {
                for degree in 0..n1 {
                    self.columns.push(Column::Jet { arc, index, degree });
                }
            }
            for overlap in 0..=n {
                for degree in 0..n1 {
                    self.rows.push(Row::Jet { arc, overlap, degree });
                }
            }
        }
        for cyc in &self.cycles {
            for (step, &set) in cyc.sets.iter().enumerate() {
                self.columns.push(Column::Value { family: cyc.family, bs: cyc.bs, set });
                self.rows.push(Row::Value { family: cyc.family, bs: cyc.bs, step });
            }
        }
        self.c0_dim = self.columns.len();
        self.c1_dim = self.rows.len();
    }

    /// Dense row-major `d0` over any complex coefficient ring, given the
    /// unit factor of a phase and the transport jet of an action polynomial.
    fn dense<R>(
        &self,
        unit: &dyn Fn(T) -> Complex<R>,
        tau: &dyn Fn(&Poly<T>) -> Jet<Complex<R>>,
    ) -> Vec<Vec<Complex<R>>>
    where
        R: Clone + Num + FromPrimitive + std::ops::Neg<Output = R>,
    {
        let n1 = self.order + 1;
        let zero = Complex::new(R::zero(), R::zero());
        let one = Complex::new(R::one(), R::zero());
        let mut m = vec![vec![zero.clone(); self.c0_dim]; self.c1_dim];
        let mut col_of = std::collections::HashMap::new();
        for (j, c) in self.columns.iter().enumerate() {
            col_of.insert(*c, j);
        }
        let mut row = 0;
        for (arc, &n) in self.chains.iter().enumerate() {
            let t = tau(&self.step_action(arc));
            let jet_col = |index: usize, degree: usize| col_of[&Column::Jet { arc, index, degree }];
            for overlap in 0..=n {
                for k in 0..n1 {
                    if overlap < n && overlap > 0 {
                        m[row][jet_col(overlap, k)] = one.clone();
                    }
                    if overlap == 0 {
                        m[row][jet_col(0, k)] = -one.clone();
                    } else {
                        for d in 0..=k {
                            m[row][jet_col(overlap - 1, d)] = -t.coeff(k - d).clone();
                        }
                    }
                    row += 1;
                }
            }
        }
        for cyc in &self.cycles {
            let len = cyc.sets.len();
            let mut factors: Vec<Complex<R>> = cyc.phases[..len - 1].iter().map(|&p| unit(p)).collect();
            let prod = factors.iter().fold(one.clone(), |acc, f| acc * f.clone());
            factors.push(prod.conj());
            for step in 0..len {
                let from = col_of[&Column::Value { family: cyc.family, bs: cyc.bs, set: cyc.sets[step] }];
                let to = col_of[&Column::Value { family: cyc.family, bs: cyc.bs, set: cyc.sets[(step + 1) % len] }];
                m[row][to] = one.clone();
                m[row][from] = -factors[step].clone();
                row += 1;
            }
        }
        for &(set, phase) in &self.gauge {
            let g = unit(phase);
            for (j, c) in self.columns.iter().enumerate() {
                let hit = match *c {
                    Column::Jet { arc, index, .. } => set == CoverSet::Rect { arc, index },
                    Column::Value { set: s, .. } => s == set,
                };
                if hit {
                    for r in m.iter_mut() {
                        r[j] = r[j].clone() * g.clone();
                    }
                }
            }
        }
        m
    }

    fn exact_rows(&self) -> Vec<Vec<GaussianRational>> {
        let order = self.order;
        self.dense(&|p: T| exact_unit(p.to_f64_lossy()), &|p: &Poly<T>| {
            let a = p.coeffs();
            let tail: Vec<GaussianRational> = std::iter::once(GaussianRational::zero())
                .chain(a.iter().skip(1).map(|c| Complex::new(BigRational::zero(), exact(c.to_f64_lossy()))))
                .collect();
            Jet::new(tail, order).exp_nilpotent().scale(&exact_unit(a[0].to_f64_lossy()))
        })
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// Exact point on the unit circle with tangent half-angle `tan(phase / 2)`.
fn exact_unit(phase: f64) -> GaussianRational {
    let half = (phase / 2.0).rem_euclid(std::f64::consts::PI);
    if (half - std::f64::consts::FRAC_PI_2).abs() < 1e-300 {
        return Complex::new(-BigRational::one(), BigRational::zero());
    }
    let u = exact(half.tan());
    let u2 = &u * &u;
    let one = BigRational::one();
    let den = &one + &u2;
    let two = BigRational::from_integer(BigInt::from(2));
    Complex::new((&one - &u2) / &den, two * u / den)
}

fn merge_params<T: LinalgReal>(family: usize, mut params: Vec<T>, action: &Poly<T>) -> Result<Vec<T>> {
    if let Some(t) = params.iter().find(|t| !(**t > T::zero())) {
        return Err(Error::InvalidInput(format!("family {family}: Bohr-Sommerfeld parameter {t} is not positive")));
    }
    params.sort_by(|a, b| a.partial_cmp(b).expect("finite parameters"));
    params.dedup_by(|b, a| num_traits::Float::abs(*b - *a) <= lit(MERGE_TOL));
    for &t in &params {
        let hol = Complex::new(T::zero(), action.eval(t)).exp();
        let miss = (hol - Complex::new(T::one(), T::zero())).norm();
        if miss > lit(HOLONOMY_TOL) {
            return Err(Error::InconsistentHolonomy(format!(
                "family {family}: |hol({t}) - 1| = {:e}",
                miss.to_f64_lossy()
            )));
        }
    }
    Ok(params)
}

/// Test model: `bs_counts[f]` Bohr-Sommerfeld leaves on family `f`, with
/// linear actions `A_f(t) = a_f + 2π t` and `a_f = offsets[f]` (cycled).
pub fn synthetic_model(
    leaf_graph: &LeafGraph,
    order: usize,
    bs_counts: &[usize],
    offsets: &[f64],
) -> Result<CechComplex<f64>> {
    let tau = std::f64::consts::TAU;
    let families = leaf_graph.loop_families.len();
    let mut polys = Vec::with_capacity(families);
    let mut params = Vec::with_capacity(families);
    for f in 0..families {
        let a = offsets[f % offsets.len().max(1)];
        polys.push(Poly::new(vec![a, tau]));
        // First level in 2πZ strictly above a, then the next ones.
        let first = (a / tau).floor() + 1.0;
        let m = bs_counts.get(f).copied().unwrap_or(0);
        params.push((0..m).map(|j| ((first + j as f64) * tau - a) / tau).collect());
    }
    build_model(leaf_graph, order, polys, params)
}

/// Spreads `m` leaves over the families round-robin.
pub fn spread_bs(leaf_graph: &LeafGraph, m: usize) -> Vec<usize> {
    let k = leaf_graph.loop_families.len();
    (0..k).map(|f| m / k + usize::from(f < m % k)).collect()
}

/// Default action offsets for synthetic models; none lies in `2πZ`.
pub const DEFAULT_OFFSETS: [f64; 4] = [0.3, 1.1, 2.5, 4.2];
