//! Normal-form coordinates near singular points of the built-in systems.
//!
//! Near a saddle with value `c` each built-in supplies an exact factorization
//! `F - c = u v` with explicit inverse `(u, v) -> (x, y)`. On an open quadrant
//! of `(u, v)` we keep `Q = u v` and replace `beta = ln|u/v| / 2` by the flow
//! coordinate `beta~ = -int_0^beta dbeta' / X_F(beta)`, which makes
//! `omega = dbeta~ ^ dQ`. Then `x~ = sgn(u) sqrt|Q| e^beta~`,
//! `y~ = sgn(v) sqrt|Q| e^-beta~` has `x~ y~ = F - c` and `dx~ ^ dy~ = omega`.
//! The coordinate axes themselves are excluded.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SingularKind, SingularPoint, SurfaceSystem};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

type Map = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Normal-form chart around one singular point.
#[derive(Clone)]
pub struct EliassonChart {
    pub point: SingularPoint,
    /// Extent of the sampled cross in normal-form coordinates.
    pub radius: f64,
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Identity,
    /// `F - c = u v` with `uv(p) = (u, v)` and its inverse.
    Saddle {
        uv: Map,
        xy: Map,
    },
    /// Area-preserving polar coordinates on a cap: `(u, v) -> (x~, y~)`.
    Polar {
        radius: f64,
    },
}

impl fmt::Debug for EliassonChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EliassonChart")
            .field("point", &self.point)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

/// Outcome of the numerical pushforward check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EliassonCheck {
    /// Largest `|det D(map) - omega|` over the samples.
    pub form_residual: f64,
    /// Largest `|F - phi(Q)|` over the samples.
    pub function_residual: f64,
    pub samples: usize,
}

pub fn eliasson_chart(system: &SurfaceSystem, p: &SingularPoint) -> Result<EliassonChart> {
    let unsupported = || {
        Err(Error::Unsupported(format!(
            "no analytic normal form for the {} point of `{}`",
            p.kind.as_str(),
            system.name
        )))
    };
    let kind = match (system.name.as_str(), p.kind) {
        ("normal-form", _) => Kind::Identity,
        ("sphere-height", SingularKind::Elliptic) => Kind::Polar { radius: (system.builtin_params["k"] / 2.0).sqrt() },
        ("euler-sphere", SingularKind::Hyperbolic) => {
            let par = &system.builtin_params;
            let a = (0.5 * (1.0 / par["i1"] - 1.0 / par["i2"])).sqrt();
            let b = (0.5 * (1.0 / par["i2"] - 1.0 / par["i3"])).sqrt();
            // Cap coordinates are (m3, m1) on both caps up to the sign of m1.
            Kind::Saddle {
                uv: Arc::new(move |q| [a * q[1] - b * q[0], a * q[1] + b * q[0]]),
                xy: Arc::new(move |w| [(w[1] - w[0]) / (2.0 * b), (w[0] + w[1]) / (2.0 * a)]),
            }
        }
        ("standing-torus", SingularKind::Hyperbolic) => {
            let rt = system.builtin_params["tube"];
            let r0 = system.builtin_params["k"] / (2.0 * PI * rt);
            let th0 = p.location[0];
            let upper = p.critical_value > 0.0;
            let sign = if upper { -1.0 } else { 1.0 };
            // s = theta - theta0 (with a sign on the upper saddle), t = phi - pi.
            let flip = if upper { -1.0 } else { 1.0 };
            Kind::Saddle {
                uv: Arc::new(move |q| {
                    let s = flip * (q[0] - th0);
                    let t = q[1] - PI;
                    let a = (2.0 * (r0 - rt * t.cos())).sqrt() * (0.5 * s).sin();
                    let b = (2.0 * rt).sqrt() * (0.5 * t).sin();
                    [a - b, sign * (a + b)]
                }),
                xy: Arc::new(move |w| {
                    let (u, v) = (w[0], sign * w[1]);
                    let t = 2.0 * ((v - u) / (2.0 * (2.0 * rt).sqrt())).asin();
                    let s = 2.0 * ((u + v) / (2.0 * (2.0 * (r0 - rt * t.cos())).sqrt())).asin();
                    [th0 + flip * s, PI + t]
                }),
            }
        }
        _ => return unsupported(),
    };
    let radius = match &kind {
        Kind::Identity => 0.5,
        Kind::Polar { radius } => 0.5 * radius,
        Kind::Saddle { .. } => 0.15,
    };
    Ok(EliassonChart { point: p.clone(), radius, kind })
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

impl EliassonChart {
    pub fn kind(&self) -> SingularKind {
        self.point.kind
    }

    /// `phi` with `F = phi(Q)` near the point.
    pub fn phi(&self, q: f64) -> f64 {
        match &self.kind {
            Kind::Identity | Kind::Saddle { .. } => self.point.critical_value + q,
            Kind::Polar { radius } => {
                let sign = if self.point.critical_value > 0.0 { 1.0 } else { -1.0 };
                sign * (radius - q / (2.0 * radius))
            }
        }
    }

    pub fn quadratic_form(&self, q: [f64; 2]) -> f64 {
        match self.point.kind {
            SingularKind::Hyperbolic => q[0] * q[1],
            SingularKind::Elliptic => q[0] * q[0] + q[1] * q[1],
        }
    }

    /// `dbeta~/dbeta` at the leaf point with parameters `(Q, beta)` in the
    /// quadrant given by the signs of `(u, v)`.
    fn jacobian_factor(&self, system: &SurfaceSystem, uv: &Map, xy: &Map, signs: (f64, f64), q: f64, beta: f64) -> f64 {
        let r = q.abs().sqrt();
        let w = [signs.0 * r * beta.exp(), signs.1 * r * (-beta).exp()];
        let p = xy(w);
        let chart = &system.charts[self.point.chart];
        let x = chart.hamiltonian_field(p);
        // grad beta = (grad u / u - grad v / v) / 2
        let h = 1e-3 * q.abs().sqrt().max(1e-3);
        let du = |axis: usize| {
            let at = |s: f64| {
                let mut a = p;
                a[axis] += s;
                uv(a)
            };
            let (a, b, c, e) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
            [(8.0 * (a[0] - b[0]) - (c[0] - e[0])) / (12.0 * h), (8.0 * (a[1] - b[1]) - (c[1] - e[1])) / (12.0 * h)]
        };
        let (gx, gy) = (du(0), du(1));
        let gb = [0.5 * (gx[0] / w[0] - gx[1] / w[1]), 0.5 * (gy[0] / w[0] - gy[1] / w[1])];
        -1.0 / (gb[0] * x[0] + gb[1] * x[1])
    }

    fn beta_tilde(&self, system: &SurfaceSystem, uv: &Map, xy: &Map, signs: (f64, f64), q: f64, beta: f64) -> f64 {
        let panels = ((beta.abs() / 0.2).ceil() as usize).max(1);
        let rule = gauss_legendre(16);
        let hp = beta / panels as f64;
        let mut s = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * hp;
            for &(x, wt) in &rule {
                s += wt * self.jacobian_factor(system, uv, xy, signs, q, mid + 0.5 * hp * x);
            }
        }
        0.5 * hp * s
    }

    /// Normal-form coordinates of a chart point. Fails on the separatrices
    /// of a saddle and at the centre of an elliptic point.
    pub fn map(&self, system: &SurfaceSystem, p: [f64; 2]) -> Result<[f64; 2]> {
        match &self.kind {
            Kind::Identity => Ok(p),
            Kind::Polar { radius } => {
                let r2 = p[0] * p[0] + p[1] * p[1];
                if r2 == 0.0 {
                    return Ok([0.0, 0.0]);
                }
                let s = (radius * radius - r2).max(0.0).sqrt();
                let rho = (2.0 * radius * (radius - s)).sqrt();
                let k = rho / r2.sqrt();
                Ok([k * p[0], k * p[1]])
            }
            Kind::Saddle { uv, xy } => {
                let w = uv(p);
                if w[0] == 0.0 || w[1] == 0.0 {
                    return Err(Error::OnAxis(format!("({}, {}) lies on a separatrix", p[0], p[1])));
                }
                let q = w[0] * w[1];
                let beta = 0.5 * (w[0] / w[1]).abs().ln();
                let signs = (sgn(w[0]), sgn(w[1]));
                let bt = self.beta_tilde(system, uv, xy, signs, q, beta);
                let r = q.abs().sqrt();
                Ok([signs.0 * r * bt.exp(), signs.1 * r * (-bt).exp()])
            }
        }
    }

    /// Inverse of [`map`](Self::map), by Newton iteration on `beta`.
    pub fn inverse(&self, system: &SurfaceSystem, t: [f64; 2]) -> Result<[f64; 2]> {
        match &self.kind {
            Kind::Identity => Ok(t),
            Kind::Polar { radius } => {
                let rho2 = t[0] * t[0] + t[1] * t[1];
                if rho2 == 0.0 {
                    return Ok([0.0, 0.0]);
                }
                let s = radius - rho2 / (2.0 * radius);
                let r = (radius * radius - s * s).max(0.0).sqrt();
                let k = r / rho2.sqrt();
                Ok([k * t[0], k * t[1]])
            }
            Kind::Saddle { uv, xy } => {
                if t[0] == 0.0 || t[1] == 0.0 {
                    return Err(Error::OnAxis(format!("({}, {}) lies on an axis", t[0], t[1])));
                }
                let q = t[0] * t[1];
                let target = 0.5 * (t[0] / t[1]).abs().ln();
                let signs = (sgn(t[0]), sgn(t[1]));
                let mut beta = target;
                let mut last = f64::INFINITY;
                for _ in 0..50 {
                    let f = self.beta_tilde(system, uv, xy, signs, q, beta) - target;
                    let d = self.jacobian_factor(system, uv, xy, signs, q, beta);
                    let step = f / d;
                    beta -= step;
                    last = step.abs();
                    if last < 1e-13 * (1.0 + beta.abs()) {
                        break;
                    }
                }
                if !(last < 1e-10) {
                    return Err(Error::NonConvergence(format!("normal-form inverse stalled at step {last:e}")));
                }
                let r = q.abs().sqrt();
                Ok(xy([signs.0 * r * beta.exp(), signs.1 * r * (-beta).exp()]))
            }
        }
    }

    /// Compares the pushforward of `omega` with `dx~ ^ dy~` and `F` with
    /// `phi(Q)` at `samples` random points of the cross (open quadrants).
    pub fn check(&self, system: &SurfaceSystem, samples: usize, seed: u64) -> Result<EliassonCheck> {
        let chart = &system.charts[self.point.chart];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = EliassonCheck { form_residual: 0.0, function_residual: 0.0, samples };
        let h = 1e-4;
        for i in 0..samples {
            let t = loop {
                let a = rng.random_range(0.3..1.0) * self.radius;
                let b = rng.random_range(0.3..1.0) * self.radius;
                let (sa, sb) = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)][i % 4];
                let cand = [sa * a, sb * b];
                if self.point.kind == SingularKind::Hyperbolic || cand[0].hypot(cand[1]) < self.radius {
                    break cand;
                }
            };
            let p = self.inverse(system, t)?;
            let fm = |q: [f64; 2]| self.map(system, q);
            let d = |axis: usize| -> Result<[f64; 2]> {
                let at = |s: f64| {
                    let mut q = p;
                    q[axis] += s;
                    fm(q)
                };
                let (a, b, c, e) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
                Ok([
                    (8.0 * (a[0] - b[0]) - (c[0] - e[0])) / (12.0 * h),
                    (8.0 * (a[1] - b[1]) - (c[1] - e[1])) / (12.0 * h),
                ])
            };
            let (jx, jy) = (d(0)?, d(1)?);
            let det = jx[0] * jy[1] - jx[1] * jy[0];
            let w = (chart.omega)(p[0], p[1]);
            out.form_residual = out.form_residual.max((det - w).abs());
            let q = self.map(system, p)?;
            let fres = (chart.value(p) - self.phi(self.quadratic_form(q))).abs();
            out.function_residual = out.function_residual.max(fres);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{detect_singularities, euler_sphere, normal_form, sphere_height, standing_torus};

    #[test]
    fn normal_form_chart_is_identity() {
        let sys = normal_form();
        let pts = detect_singularities(&sys).unwrap();
        let e = eliasson_chart(&sys, &pts[0]).unwrap();
        assert_eq!(e.map(&sys, [0.3, -0.2]).unwrap(), [0.3, -0.2]);
        let c = e.check(&sys, 20, 1).unwrap();
        assert!(c.form_residual < 1e-8 && c.function_residual < 1e-12);
    }

    #[test]
    fn saddle_charts_push_omega_to_standard_form() {
        for sys in [standing_torus(2.0, 0.3), euler_sphere(6.0, [1.0, 2.0, 3.0])] {
            for p in detect_singularities(&sys).unwrap().iter().filter(|p| p.kind == SingularKind::Hyperbolic) {
                let e = eliasson_chart(&sys, p).unwrap();
                let c = e.check(&sys, 100, 7).unwrap();
                assert!(c.form_residual < 1e-8, "{} {:?}: {c:?}", sys.name, p.location);
                assert!(c.function_residual < 1e-10, "{} {:?}: {c:?}", sys.name, p.location);
            }
        }
    }

    #[test]
    fn sphere_poles_use_area_polar_coordinates() {
        let sys = sphere_height(4.0);
        for p in detect_singularities(&sys).unwrap() {
            let e = eliasson_chart(&sys, &p).unwrap();
            let c = e.check(&sys, 50, 3).unwrap();
            assert!(c.form_residual < 1e-8 && c.function_residual < 1e-10, "{c:?}");
        }
    }

    #[test]
    fn other_systems_are_unsupported() {
        let sys = standing_torus(2.0, 0.3);
        let p = detect_singularities(&sys).unwrap().into_iter().find(|p| p.kind == SingularKind::Elliptic).unwrap();
        assert!(matches!(eliasson_chart(&sys, &p), Err(Error::Unsupported(_))));
    }
}
