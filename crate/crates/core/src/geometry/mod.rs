//! Two-dimensional integrable systems with prequantum data, described in
//! chart trivializations.
//!
//! Every chart carries `omega = w(x, y) dx ^ dy`, the moment function `F` and
//! a potential `Theta` with `dTheta = omega`. Where charts overlap the
//! potentials differ by an exact form `Theta_a - Theta_b = d g_ab`; the
//! system's gauge function supplies `g_ab`.

mod builtins;
mod detect;
mod eliasson;
mod specfile;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use builtins::{
    builtin, builtin_names, double_well, euler_sphere, normal_form, sphere_height, sphere_with_function, standing_torus,
};
pub use detect::{
    classify_singularity, detect_singularities, detect_singularities_with, form_residual, prequant_check,
    DetectOptions, PrequantReport,
};
pub use eliasson::{eliasson_chart, EliassonChart};
pub use specfile::{load_system, parse_system};

use crate::scalar::Real;

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type CovectorFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
pub type EmbedFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;
pub type LocateFn = Arc<dyn Fn([f64; 3]) -> Option<[f64; 2]> + Send + Sync>;
/// `g_ab` evaluated at a point given in chart `a` coordinates.
pub type GaugeFn = Arc<dyn Fn(usize, usize, [f64; 2]) -> f64 + Send + Sync>;

/// Numerical tolerances shared by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub grad_tol: f64,
    pub degen_tol: f64,
    pub form_tol: f64,
    pub prequant_tol: f64,
    pub hol_tol: f64,
    pub bs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { grad_tol: 1e-10, degen_tol: 1e-8, form_tol: 1e-6, prequant_tol: 1e-9, hol_tol: 1e-7, bs_tol: 1e-9 }
    }
}

impl Tolerances {
    /// Overrides one tolerance by name (`grad`, `degen`, `form`, `prequant`,
    /// `hol`, `bs`). Returns false for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name.trim_end_matches("_tol") {
            "grad" => &mut self.grad_tol,
            "degen" => &mut self.degen_tol,
            "form" => &mut self.form_tol,
            "prequant" => &mut self.prequant_tol,
            "hol" => &mut self.hol_tol,
            "bs" => &mut self.bs_tol,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// Axis-aligned coordinate rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }
}

/// One coordinate chart of the surface.
#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub domain: Rect,
    /// Coordinates that wrap around with the domain width/height as period.
    pub periodic: [bool; 2],
    pub f: ScalarFn,
    pub omega: ScalarFn,
    pub theta: CovectorFn,
    pub embed: Option<EmbedFn>,
    pub locate: Option<LocateFn>,
    /// Signed distance-like margin: positive where the chart is comfortable
    /// to use. Defaults to the relative distance to non-periodic edges.
    pub margin: Option<ScalarFn>,
    /// Region integrated by the area quadrature; regions of all charts must
    /// tile the surface.
    pub area_region: Option<Rect>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("periodic", &self.periodic)
            .finish_non_exhaustive()
    }
}

/// Step used by the finite-difference stencils, relative to the chart diameter.
const FD_REL_STEP: f64 = 2e-4;

impl Chart {
    pub fn fd_step(&self) -> f64 {
        FD_REL_STEP * self.domain.diameter().min(10.0)
    }

    pub fn margin_at(&self, p: [f64; 2]) -> f64 {
        if let Some(m) = &self.margin {
            return m(p[0], p[1]);
        }
        let d = &self.domain;
        let mut m = f64::INFINITY;
        if !self.periodic[0] {
            m = m.min((p[0] - d.x0).min(d.x1 - p[0]) / d.width());
        }
        if !self.periodic[1] {
            m = m.min((p[1] - d.y0).min(d.y1 - p[1]) / d.height());
        }
        m
    }

    /// Maps periodic coordinates back into the domain.
    pub fn wrap(&self, mut p: [f64; 2]) -> [f64; 2] {
        let d = &self.domain;
        if self.periodic[0] {
            p[0] = d.x0 + (p[0] - d.x0).rem_euclid(d.width());
        }
        if self.periodic[1] {
            p[1] = d.y0 + (p[1] - d.y0).rem_euclid(d.height());
        }
        p
    }

    pub fn period(&self, axis: usize) -> Option<f64> {
        if !self.periodic[axis] {
            return None;
        }
        Some(if axis == 0 { self.domain.width() } else { self.domain.height() })
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        (self.f)(p[0], p[1])
    }

    /// Fourth-order central-difference gradient of `F`.
    pub fn grad(&self, p: [f64; 2]) -> [f64; 2] {
        let h = self.fd_step();
        let f = &self.f;
        let d = |ex: f64, ey: f64| {
            let at = |s: f64| f(p[0] + s * ex, p[1] + s * ey);
            (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
        };
        [d(1.0, 0.0), d(0.0, 1.0)]
    }

    /// Hessian of `F` from differences of the gradient stencil.
    pub fn hessian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let h = self.fd_step();
        let g = |q: [f64; 2]| self.grad(q);
        let dd = |axis: usize| {
            let shift = |s: f64| {
                let mut q = p;
                q[axis] += s;
                g(q)
            };
            let (a, b, c, e) = (shift(h), shift(-h), shift(2.0 * h), shift(-2.0 * h));
            [(8.0 * (a[0] - b[0]) - (c[0] - e[0])) / (12.0 * h), (8.0 * (a[1] - b[1]) - (c[1] - e[1])) / (12.0 * h)]
        };
        let hx = dd(0);
        let hy = dd(1);
        let off = 0.5 * (hx[1] + hy[0]);
        [[hx[0], off], [off, hy[1]]]
    }

    /// Hamiltonian vector field `X_F` with `i_X omega = -dF`.
    pub fn hamiltonian_field(&self, p: [f64; 2]) -> [f64; 2] {
        let g = self.grad(p);
        let w = (self.omega)(p[0], p[1]);
        [-g[1] / w, g[0] / w]
    }

    pub fn theta_at(&self, p: [f64; 2]) -> [f64; 2] {
        (self.theta)(p[0], p[1])
    }

    /// `dTheta - omega` by central differences.
    pub fn curvature_defect(&self, p: [f64; 2]) -> f64 {
        let h = self.fd_step();
        let th = &self.theta;
        let dy_dx = (8.0 * (th(p[0] + h, p[1])[1] - th(p[0] - h, p[1])[1])
            - (th(p[0] + 2.0 * h, p[1])[1] - th(p[0] - 2.0 * h, p[1])[1]))
            / (12.0 * h);
        let dx_dy = (8.0 * (th(p[0], p[1] + h)[0] - th(p[0], p[1] - h)[0])
            - (th(p[0], p[1] + 2.0 * h)[0] - th(p[0], p[1] - 2.0 * h)[0]))
            / (12.0 * h);
        (dy_dx - dx_dy - (self.omega)(p[0], p[1])).abs()
    }
}

/// A prequantized surface described by an atlas.
#[derive(Clone)]
pub struct SurfaceSystem {
    pub name: String,
    pub charts: Vec<Chart>,
    pub builtin_params: BTreeMap<String, f64>,
    /// `g_ab` with `Theta_a - Theta_b = d g_ab`; absent means all zero.
    pub gauge: Option<GaugeFn>,
    /// Extra constant transition phases per ordered chart pair (user input).
    pub transition_phases: BTreeMap<(usize, usize), f64>,
    /// Euler characteristic of the closed surface, if compact.
    pub euler_characteristic: Option<i64>,
    /// Tiles of `[chart, region]` used by quadratures over the surface.
    total_area: Option<f64>,
}

impl fmt::Debug for SurfaceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceSystem")
            .field("name", &self.name)
            .field("charts", &self.charts)
            .field("builtin_params", &self.builtin_params)
            .field("euler_characteristic", &self.euler_characteristic)
            .finish_non_exhaustive()
    }
}

impl SurfaceSystem {
    pub fn new(name: impl Into<String>, charts: Vec<Chart>) -> Self {
        SurfaceSystem {
            name: name.into(),
            charts,
            builtin_params: BTreeMap::new(),
            gauge: None,
            transition_phases: BTreeMap::new(),
            euler_characteristic: None,
            total_area: None,
        }
    }

    pub fn with_gauge(mut self, g: GaugeFn) -> Self {
        self.gauge = Some(g);
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.builtin_params.insert(key.to_string(), value);
        self
    }

    pub fn with_euler_characteristic(mut self, chi: i64) -> Self {
        self.euler_characteristic = Some(chi);
        self
    }

    pub fn is_compact(&self) -> bool {
        self.euler_characteristic.is_some()
    }

    /// Symplectic area from chart-wise Gauss-Legendre quadrature over the
    /// declared area regions (cached after the first call).
    pub fn total_area(&mut self) -> f64 {
        if let Some(a) = self.total_area {
            return a;
        }
        let a = self.compute_area();
        self.total_area = Some(a);
        a
    }

    pub fn compute_area(&self) -> f64 {
        let mut tiles: Vec<(usize, Rect)> =
            self.charts.iter().enumerate().filter_map(|(i, c)| c.area_region.map(|r| (i, r))).collect();
        if tiles.is_empty() && !self.charts.is_empty() {
            tiles.push((0, self.charts[0].domain));
        }
        tiles.iter().map(|&(i, r)| crate::quadrature::rect_integral(&*self.charts[i].omega, r, 24, 8)).sum()
    }

    /// Phase to add when a path in chart `a` continues in chart `b` at `p`
    /// (chart `a` coordinates): `-g_ab(p)` minus any constant phase.
    pub fn transition_phase(&self, a: usize, b: usize, p: [f64; 2]) -> f64 {
        if a == b {
            return 0.0;
        }
        let g = self.gauge.as_ref().map_or(0.0, |g| g(a, b, p));
        let c = self.transition_phases.get(&(a, b)).copied().unwrap_or(0.0)
            - self.transition_phases.get(&(b, a)).copied().unwrap_or(0.0);
        -g - c
    }

    /// Embedded position of a chart point, or the chart point itself padded
    /// with a chart tag when the system has no embedding.
    pub fn position(&self, chart: usize, p: [f64; 2]) -> [f64; 3] {
        match &self.charts[chart].embed {
            Some(e) => e(p[0], p[1]),
            None => [p[0], p[1], chart as f64],
        }
    }

    /// Coordinates of an embedded point in chart `b`, if covered.
    pub fn locate(&self, b: usize, pos: [f64; 3]) -> Option<[f64; 2]> {
        let c = &self.charts[b];
        match &c.locate {
            Some(l) => l(pos).map(|q| c.wrap(q)),
            None => (pos[2] == b as f64).then_some([pos[0], pos[1]]),
        }
    }

    /// Re-expresses `(chart, p)` in the chart with the largest margin, if
    /// that beats the current one.
    pub fn best_chart(&self, chart: usize, p: [f64; 2]) -> (usize, [f64; 2]) {
        let here = self.charts[chart].margin_at(p);
        let pos = self.position(chart, p);
        let mut best = (chart, p, here);
        for (b, c) in self.charts.iter().enumerate() {
            if b == chart {
                continue;
            }
            if let Some(q) = self.locate(b, pos) {
                let m = c.margin_at(q);
                if m > best.2 {
                    best = (b, q, m);
                }
            }
        }
        (best.0, best.1)
    }
}

/// Kind of a nondegenerate critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SingularKind {
    Elliptic,
    Hyperbolic,
}

impl SingularKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SingularKind::Elliptic => "elliptic",
            SingularKind::Hyperbolic => "hyperbolic",
        }
    }
}

/// A critical point of the moment function.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPoint {
    pub chart: usize,
    pub location: [f64; 2],
    pub position: [f64; 3],
    pub hessian: [[f64; 2]; 2],
    pub kind: SingularKind,
    pub critical_value: f64,
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym_eigenvalues<T: Real>(m: [[T; 2]; 2]) -> [T; 2] {
    let two = T::one() + T::one();
    let mean = (m[0][0] + m[1][1]) / two;
    let half_diff = (m[0][0] - m[1][1]) / two;
    let off = (m[0][1] + m[1][0]) / two;
    let r = half_diff.hypot(off);
    [mean - r, mean + r]
}
