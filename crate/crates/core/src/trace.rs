//! Level-set tracing by predictor-corrector marching along `X_F`.

use crate::error::{Error, Result};
use crate::geometry::SurfaceSystem;
use crate::quadrature::adaptive_simpson;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Maximal step as a fraction of the chart diameter.
    pub rel_step: f64,
    /// Target for `|F - c|` after correction.
    pub newton_tol: f64,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { rel_step: 1e-3, newton_tol: 1e-10, max_steps: 400_000 }
    }
}

/// A run of traced points inside one chart. Coordinates are continuous
/// (periodic coordinates are not wrapped inside a segment).
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub chart: usize,
    pub points: Vec<[f64; 2]>,
    /// Unit tangents along `X_F` at the points.
    pub tangents: Vec<[f64; 2]>,
}

/// A traced piece of a level set, possibly closed.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafPath {
    pub level: f64,
    pub segments: Vec<Segment>,
    pub closed: bool,
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = norm(v);
    [v[0] / n, v[1] / n]
}

/// Moves `p` onto `F = c` along the gradient.
pub fn project_to_level(system: &SurfaceSystem, chart: usize, mut p: [f64; 2], c: f64, tol: f64) -> Result<[f64; 2]> {
    let ch = &system.charts[chart];
    let mut best = f64::INFINITY;
    for _ in 0..50 {
        let r = ch.value(p) - c;
        best = best.min(r.abs());
        if r.abs() <= 0.01 * tol {
            return Ok(p);
        }
        let g = ch.grad(p);
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2 == 0.0 || !g2.is_finite() {
            break;
        }
        p = [p[0] - r * g[0] / g2, p[1] - r * g[1] / g2];
    }
    let r = (ch.value(p) - c).abs();
    if r <= tol {
        Ok(p)
    } else {
        Err(Error::TracingFailure(format!(
            "cannot reach level {c} from chart {} ({}, {}); residual {r:e} (best {best:e})",
            ch.name, p[0], p[1]
        )))
    }
}

/// Difference `b - a` using the nearest periodic image of `b`.
fn periodic_delta(system: &SurfaceSystem, chart: usize, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let ch = &system.charts[chart];
    let mut d = [b[0] - a[0], b[1] - a[1]];
    for (axis, di) in d.iter_mut().enumerate() {
        if let Some(per) = ch.period(axis) {
            *di -= per * (*di / per).round();
        }
    }
    d
}

/// Where to stop: back at the start point, or at a given target.
#[derive(Debug, Clone)]
enum Stop {
    Closed,
    At(usize, [f64; 2]),
    Near(Vec<[f64; 3]>, f64),
}

/// Traces the closed leaf through `(chart, p)` at level `F(p)` (after
/// projection onto `level`).
pub fn trace_leaf(
    system: &SurfaceSystem,
    chart: usize,
    p: [f64; 2],
    level: f64,
    opts: &TraceOptions,
) -> Result<LeafPath> {
    march(system, chart, p, level, Stop::Closed, opts).map(|r| r.0)
}

/// Traces along `X_F` from `start` until `target` (same leaf) is reached.
pub fn trace_between(
    system: &SurfaceSystem,
    start: (usize, [f64; 2]),
    target: (usize, [f64; 2]),
    level: f64,
    opts: &TraceOptions,
) -> Result<LeafPath> {
    march(system, start.0, start.1, level, Stop::At(target.0, target.1), opts).map(|r| r.0)
}

/// Traces along `X_F` until the path comes within `radius` (embedded
/// distance) of one of `targets`; returns the path and the target index.
pub fn trace_to_any(
    system: &SurfaceSystem,
    start: (usize, [f64; 2]),
    level: f64,
    targets: &[[f64; 3]],
    radius: f64,
    opts: &TraceOptions,
) -> Result<(LeafPath, usize)> {
    let (path, hit) = march(system, start.0, start.1, level, Stop::Near(targets.to_vec(), radius), opts)?;
    Ok((path, hit.unwrap_or(0)))
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn march(
    system: &SurfaceSystem,
    chart0: usize,
    p0: [f64; 2],
    c: f64,
    stop: Stop,
    opts: &TraceOptions,
) -> Result<(LeafPath, Option<usize>)> {
    let (chart0, p0) = system.best_chart(chart0, p0);
    let p0 = project_to_level(system, chart0, p0, c, opts.newton_tol)?;
    let start_pos = system.position(chart0, p0);
    let goal_pos = match &stop {
        Stop::Closed | Stop::Near(..) => start_pos,
        Stop::At(ch, q) => system.position(*ch, *q),
    };
    let tangent = |ch: usize, p: [f64; 2]| -> Result<[f64; 2]> {
        let x = system.charts[ch].hamiltonian_field(p);
        let n = norm(x);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::TracingFailure(format!("X_F vanishes at {p:?}; level {c} is critical")));
        }
        Ok([x[0] / n, x[1] / n])
    };

    let mut chart = chart0;
    let mut p = p0;
    let mut t = tangent(chart, p)?;
    let mut seg = Segment { chart, points: vec![p], tangents: vec![t] };
    let mut segments = Vec::new();
    let mut travelled = 0.0;
    let mut h = opts.rel_step * system.charts[chart].domain.diameter();
    for _ in 0..opts.max_steps {
        let hmax = opts.rel_step * system.charts[chart].domain.diameter();
        // Near a critical point the level set bends on the scale |grad F| / |H|.
        let local = {
            let ch = &system.charts[chart];
            let hs = ch.hessian(p);
            let hn = hs[0][0].abs().max(hs[1][1].abs()).max(hs[0][1].abs());
            if hn > 0.0 {
                0.2 * norm(ch.grad(p)) / hn
            } else {
                f64::INFINITY
            }
        };
        h = h.min(hmax).min(local.max(1e-9 * hmax));

        if let Stop::Near(targets, radius) = &stop {
            let here = system.position(chart, system.charts[chart].wrap(p));
            if travelled > 2.0 * radius {
                if let Some(i) = targets.iter().position(|&q| dist3(q, here) < *radius) {
                    segments.push(seg);
                    return Ok((LeafPath { level: c, segments, closed: false }, Some(i)));
                }
            }
        }
        // Finish if the goal sits within this step, ahead of us.
        let goal = if matches!(stop, Stop::Near(..)) { None } else { system.locate(chart, goal_pos) };
        if let Some(g) = goal {
            let d = periodic_delta(system, chart, p, g);
            let along = d[0] * t[0] + d[1] * t[1];
            let across = (d[0] * t[1] - d[1] * t[0]).abs();
            let armed = match stop {
                Stop::Closed => travelled > 4.0 * h,
                Stop::At(..) | Stop::Near(..) => true,
            };
            if armed && along > 0.0 && along <= 1.05 * h && across < 0.2 * h.max(along) {
                let q = [p[0] + d[0], p[1] + d[1]];
                let tq = tangent(chart, q)?;
                seg.points.push(q);
                seg.tangents.push(tq);
                segments.push(seg);
                return Ok((LeafPath { level: c, segments, closed: matches!(stop, Stop::Closed) }, None));
            }
        }

        // Midpoint predictor, gradient corrector; shrink on sharp turns.
        let q = loop {
            let mid = [p[0] + 0.5 * h * t[0], p[1] + 0.5 * h * t[1]];
            let tm = tangent(chart, mid)?;
            let guess = [p[0] + h * tm[0], p[1] + h * tm[1]];
            let q = project_to_level(system, chart, guess, c, opts.newton_tol);
            let ok = q.as_ref().ok().map(|q| {
                let tq = tangent(chart, *q).unwrap_or(t);
                let turn = (t[0] * tq[1] - t[1] * tq[0]).atan2(t[0] * tq[0] + t[1] * tq[1]).abs();
                let jump = norm([q[0] - guess[0], q[1] - guess[1]]);
                let moved = norm([q[0] - p[0], q[1] - p[1]]);
                turn < 0.08 && jump < 0.05 * h && moved > 0.5 * h
            });
            match ok {
                Some(true) => break q?,
                _ if h > 1e-9 * hmax => h *= 0.5,
                _ => {
                    return Err(q
                        .err()
                        .unwrap_or_else(|| Error::TracingFailure(format!("step collapsed at {p:?} on level {c}"))))
                }
            }
        };
        let tq = tangent(chart, q)?;
        let turn = (t[0] * tq[1] - t[1] * tq[0]).atan2(t[0] * tq[0] + t[1] * tq[1]).abs();
        travelled += norm([q[0] - p[0], q[1] - p[1]]);
        seg.points.push(q);
        seg.tangents.push(tq);
        p = q;
        t = tq;
        if turn < 0.02 {
            h *= 1.5;
        }

        if system.charts[chart].margin_at(system.charts[chart].wrap(p)) < 0.0 {
            let (b, pb) = system.best_chart(chart, system.charts[chart].wrap(p));
            if b == chart {
                return Err(Error::TracingFailure(format!("leaf at level {c} leaves every chart near {p:?}")));
            }
            segments.push(std::mem::replace(&mut seg, Segment { chart: b, points: vec![], tangents: vec![] }));
            chart = b;
            p = pb;
            t = tangent(chart, p)?;
            seg.points.push(p);
            seg.tangents.push(t);
        }
    }
    Err(Error::TracingFailure(format!("no closure after {} steps on level {c}", opts.max_steps)))
}

/// Follows `grad F / |grad F|^2` from `p` until `F = target`, hopping charts
/// as needed. Fails when the flow runs into a critical point.
pub fn flow_to_level(
    system: &SurfaceSystem,
    chart: usize,
    p: [f64; 2],
    target: f64,
    opts: &TraceOptions,
) -> Result<(usize, [f64; 2])> {
    let (mut chart, mut p) = system.best_chart(chart, p);
    let field = |ch: usize, q: [f64; 2]| -> Option<[f64; 2]> {
        let g = system.charts[ch].grad(q);
        let g2 = g[0] * g[0] + g[1] * g[1];
        (g2 > 1e-24 && g2.is_finite()).then(|| [g[0] / g2, g[1] / g2])
    };
    for _ in 0..100_000 {
        let ch = &system.charts[chart];
        let rest = target - ch.value(p);
        if rest.abs() <= opts.newton_tol {
            return Ok((chart, ch.wrap(p)));
        }
        let g = ch.grad(p);
        let gn = norm(g);
        let dmax = 0.01 * ch.domain.diameter();
        let df = rest.signum() * rest.abs().min(dmax * gn);
        // RK4 in the level variable.
        let fail = || Error::TracingFailure(format!("gradient flow towards level {target} stalls near {p:?}"));
        let k1 = field(chart, p).ok_or_else(fail)?;
        let k2 = field(chart, [p[0] + 0.5 * df * k1[0], p[1] + 0.5 * df * k1[1]]).ok_or_else(fail)?;
        let k3 = field(chart, [p[0] + 0.5 * df * k2[0], p[1] + 0.5 * df * k2[1]]).ok_or_else(fail)?;
        let k4 = field(chart, [p[0] + df * k3[0], p[1] + df * k3[1]]).ok_or_else(fail)?;
        p = [
            p[0] + df / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            p[1] + df / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if df == rest {
            p = project_to_level(system, chart, p, target, opts.newton_tol)?;
        }
        if ch.margin_at(ch.wrap(p)) < 0.0 {
            let (b, q) = system.best_chart(chart, ch.wrap(p));
            if b == chart {
                return Err(Error::TracingFailure(format!("gradient flow towards level {target} leaves the atlas")));
            }
            chart = b;
            p = q;
        }
    }
    Err(Error::TracingFailure(format!("gradient flow towards level {target} did not arrive")))
}

/// Regular leaves of one Reeb edge, parametrized by `t = F - lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafFamily {
    pub lo: f64,
    pub hi: f64,
    /// A point on the leaf at `seed_level`.
    pub seed: (usize, [f64; 2]),
    pub seed_level: f64,
}

impl LeafFamily {
    pub fn t_max(&self) -> f64 {
        self.hi - self.lo
    }

    /// A point on the leaf at parameter `t`.
    pub fn point_at(&self, system: &SurfaceSystem, t: f64, opts: &TraceOptions) -> Result<(usize, [f64; 2])> {
        if !(t > 0.0 && t < self.t_max()) {
            return Err(Error::OutOfRange(format!("t = {t} outside (0, {})", self.t_max())));
        }
        flow_to_level(system, self.seed.0, self.seed.1, self.lo + t, opts)
    }

    pub fn leaf(&self, system: &SurfaceSystem, t: f64, opts: &TraceOptions) -> Result<LeafPath> {
        let (ch, p) = self.point_at(system, t, opts)?;
        trace_leaf(system, ch, p, self.lo + t, opts)
    }
}

impl LeafPath {
    pub fn point_count(&self) -> usize {
        self.segments.iter().map(|s| s.points.len()).sum()
    }

    /// Embedded sample positions.
    pub fn positions(&self, system: &SurfaceSystem) -> Vec<[f64; 3]> {
        self.segments
            .iter()
            .flat_map(|s| s.points.iter().map(move |&p| system.position(s.chart, system.charts[s.chart].wrap(p))))
            .collect()
    }

    /// Largest `|F - level|` along the samples.
    pub fn level_deviation(&self, system: &SurfaceSystem) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| s.points.iter().map(move |&p| (system.charts[s.chart].value(p) - self.level).abs()))
            .fold(0.0, f64::max)
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> LeafPath {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                chart: s.chart,
                points: s.points.iter().rev().copied().collect(),
                tangents: s.tangents.iter().rev().map(|t| [-t[0], -t[1]]).collect(),
            })
            .collect();
        LeafPath { level: self.level, segments, closed: self.closed }
    }

    /// `int Theta` along the path plus the gauge phases at chart changes.
    /// Each step is a cubic Hermite arc integrated by adaptive Simpson.
    pub fn theta_integral(&self, system: &SurfaceSystem) -> f64 {
        let mut total = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            let chart = &system.charts[s.chart];
            for i in 1..s.points.len() {
                let (a, b) = (s.points[i - 1], s.points[i]);
                let len = norm([b[0] - a[0], b[1] - a[1]]);
                if len == 0.0 {
                    continue;
                }
                let (ta, tb) = (s.tangents[i - 1], s.tangents[i]);
                let (ma, mb) = ([ta[0] * len, ta[1] * len], [tb[0] * len, tb[1] * len]);
                let integrand = |u: f64| {
                    let (u2, u3) = (u * u, u * u * u);
                    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
                    let h10 = u3 - 2.0 * u2 + u;
                    let h01 = -2.0 * u3 + 3.0 * u2;
                    let h11 = u3 - u2;
                    let d00 = 6.0 * u2 - 6.0 * u;
                    let d10 = 3.0 * u2 - 4.0 * u + 1.0;
                    let d01 = -6.0 * u2 + 6.0 * u;
                    let d11 = 3.0 * u2 - 2.0 * u;
                    let x = [
                        h00 * a[0] + h10 * ma[0] + h01 * b[0] + h11 * mb[0],
                        h00 * a[1] + h10 * ma[1] + h01 * b[1] + h11 * mb[1],
                    ];
                    let dx = [
                        d00 * a[0] + d10 * ma[0] + d01 * b[0] + d11 * mb[0],
                        d00 * a[1] + d10 * ma[1] + d01 * b[1] + d11 * mb[1],
                    ];
                    let th = chart.theta_at(x);
                    th[0] * dx[0] + th[1] * dx[1]
                };
                total += adaptive_simpson(&integrand, 0.0, 1.0, 1e-13 * (1.0 + len));
            }
            if let Some(next) = self.segments.get(k + 1) {
                if let Some(&last) = s.points.last() {
                    total += system.transition_phase(s.chart, next.chart, chart.wrap(last));
                }
            }
        }
        total
    }

    /// Euclidean length in chart coordinates (a rough size measure).
    pub fn coordinate_length(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.points.windows(2).map(|w| norm([w[1][0] - w[0][0], w[1][1] - w[0][1]])).sum::<f64>())
            .sum()
    }

    /// Samples with the largest `|grad F|`, a point far from critical points.
    pub fn regular_point(&self, system: &SurfaceSystem) -> (usize, [f64; 2]) {
        let mut best = (self.segments[0].chart, self.segments[0].points[0], -1.0);
        for s in &self.segments {
            let ch = &system.charts[s.chart];
            for &p in s.points.iter().step_by(7) {
                let g = norm(ch.grad(p));
                if g > best.2 && ch.margin_at(ch.wrap(p)) > 0.0 {
                    best = (s.chart, ch.wrap(p), g);
                }
            }
        }
        (best.0, best.1)
    }

    /// Hausdorff distance between two sampled curves in the embedding.
    pub fn hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
        let d =
            |p: &[f64; 3], q: &[f64; 3]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        let one = |x: &[[f64; 3]], y: &[[f64; 3]]| {
            x.iter().map(|p| y.iter().map(|q| d(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        one(a, b).max(one(b, a))
    }
}

/// Unit tangent helper exposed for callers that march by hand.
pub fn unit_field(system: &SurfaceSystem, chart: usize, p: [f64; 2]) -> [f64; 2] {
    unit(system.charts[chart].hamiltonian_field(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sphere_height, standing_torus, Chart, Rect};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn disc_system() -> SurfaceSystem {
        let chart = Chart {
            name: "plane".into(),
            domain: Rect::new(-2.0, 2.0, -2.0, 2.0),
            periodic: [false, false],
            f: Arc::new(|x, y| x * x + y * y),
            omega: Arc::new(|_, _| 1.0),
            theta: Arc::new(|x, y| [-0.5 * y, 0.5 * x]),
            embed: None,
            locate: None,
            margin: None,
            area_region: None,
        };
        SurfaceSystem::new("disc", vec![chart])
    }

    #[test]
    fn circle_encloses_pi_r_squared() {
        let sys = disc_system();
        for r in [0.3, 0.7, 1.2] {
            let leaf = trace_leaf(&sys, 0, [r, 0.0], r * r, &TraceOptions::default()).unwrap();
            assert!(leaf.closed);
            assert!(leaf.positions(&sys).iter().all(|q| (q[0].hypot(q[1]) - r).abs() < 1e-9));
            assert!((leaf.theta_integral(&sys) - PI * r * r).abs() < 1e-8, "r={r}");
            assert!((leaf.reversed().theta_integral(&sys) + PI * r * r).abs() < 1e-8);
            assert!(leaf.level_deviation(&sys) < 1e-10);
        }
    }

    #[test]
    fn latitude_circle_on_sphere_has_zone_area() {
        let sys = sphere_height(4.0);
        let r = 2f64.sqrt();
        for w in [-1.0, -0.2, 0.5, 1.3] {
            let leaf = trace_leaf(&sys, 0, [0.4, w], w, &TraceOptions::default()).unwrap();
            let a = leaf.theta_integral(&sys);
            let want = 2.0 * PI * r * (w + r);
            let k = ((a - want) / (2.0 * PI)).round();
            assert!((a - want - 2.0 * PI * k).abs() < 1e-8, "w={w}: {a} vs {want}");
        }
    }

    #[test]
    fn torus_leaves_close_in_both_charts() {
        let sys = standing_torus(2.0, 0.3);
        // Between the saddles: two meridian-like circles.
        for th in [0.2, PI - 0.2] {
            let c = sys.charts[0].value([th, 1.0]);
            let leaf = trace_leaf(&sys, 0, [th, 1.0], c, &TraceOptions::default()).unwrap();
            assert!(leaf.closed && leaf.level_deviation(&sys) < 1e-10);
        }
    }

    #[test]
    fn family_continues_between_levels() {
        let sys = disc_system();
        let fam = LeafFamily { lo: 0.0, hi: 3.0, seed: (0, [0.5, 0.5]), seed_level: 0.5 };
        for t in [0.01, 0.9, 2.5] {
            let (ch, p) = fam.point_at(&sys, t, &TraceOptions::default()).unwrap();
            assert!((sys.charts[ch].value(p) - t).abs() < 1e-10);
        }
        assert!(matches!(fam.point_at(&sys, 3.5, &TraceOptions::default()), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn cap_crossing_circles_keep_stokes() {
        // Leaves of a tilted height cross between the cylinder and a cap.
        let axis = [0.6f64, 0.0, 0.8];
        let sys = crate::geometry::sphere_with_function(
            "tilted",
            4.0,
            Arc::new(move |m: [f64; 3]| m[0] * axis[0] + m[2] * axis[2]),
        );
        let r = 2f64.sqrt();
        let mut hops = 0;
        for h in [-0.9, 0.3, 1.1] {
            let p = sys.locate(0, [h * axis[0] + 0.3 * axis[2], 0.3, h * axis[2] - 0.3 * axis[0]]).unwrap();
            let leaf = trace_leaf(&sys, 0, p, h, &TraceOptions::default()).unwrap();
            hops += leaf.segments.len() - 1;
            let a = leaf.theta_integral(&sys);
            let want = 2.0 * PI * r * (h + r);
            let d = (a - want) - 2.0 * PI * ((a - want) / (2.0 * PI)).round();
            assert!(d.abs() < 1e-7, "h={h}: {a} vs {want}");
        }
        assert!(hops >= 2);
    }
}
