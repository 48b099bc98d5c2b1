//! Critical point search and classification.

use super::{sym_eigenvalues, SingularKind, SingularPoint, SurfaceSystem, Tolerances};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Classifies a symmetric Hessian by the signs of its eigenvalues.
pub fn classify_singularity<T: Real>(hessian: [[T; 2]; 2], degen_tol: T) -> Result<SingularKind> {
    let [lo, hi] = sym_eigenvalues(hessian);
    if lo.abs() < degen_tol || hi.abs() < degen_tol {
        return Err(Error::DegenerateSingularity(format!("Hessian eigenvalues {lo}, {hi} within {degen_tol} of zero")));
    }
    Ok(if (lo > T::zero()) == (hi > T::zero()) { SingularKind::Elliptic } else { SingularKind::Hyperbolic })
}

#[derive(Debug, Clone, Copy)]
pub struct DetectOptions {
    /// Grid points per axis and chart.
    pub resolution: usize,
    /// Embedded distance under which two points are the same.
    pub merge_dist: f64,
    pub tol: Tolerances,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions { resolution: 256, merge_dist: 1e-6, tol: Tolerances::default() }
    }
}

pub fn detect_singularities(system: &SurfaceSystem) -> Result<Vec<SingularPoint>> {
    detect_singularities_with(system, &DetectOptions::default())
}

fn solve2(m: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([(b[0] * m[1][1] - b[1] * m[0][1]) / det, (m[0][0] * b[1] - m[1][0] * b[0]) / det])
}

/// Grid scan for local minima of `|grad F|` followed by Newton polish of
/// `grad F = 0`.
pub fn detect_singularities_with(system: &SurfaceSystem, opts: &DetectOptions) -> Result<Vec<SingularPoint>> {
    let n = opts.resolution.max(8);
    let mut found: Vec<SingularPoint> = Vec::new();
    for (ci, chart) in system.charts.iter().enumerate() {
        let d = chart.domain;
        let (dx, dy) = (d.width() / n as f64, d.height() / n as f64);
        let at = |i: usize, j: usize| [d.x0 + (i as f64 + 0.5) * dx, d.y0 + (j as f64 + 0.5) * dy];
        let mut g2 = vec![f64::NAN; n * n];
        for i in 0..n {
            for j in 0..n {
                let p = at(i, j);
                if chart.margin_at(p) > 0.0 {
                    let g = chart.grad(p);
                    g2[i * n + j] = g[0] * g[0] + g[1] * g[1];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = g2[i * n + j];
                if !v.is_finite() {
                    continue;
                }
                let mut is_min = true;
                'nb: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (mut a, mut b) = (i as i64 + di, j as i64 + dj);
                        if chart.periodic[0] {
                            a = a.rem_euclid(n as i64);
                        }
                        if chart.periodic[1] {
                            b = b.rem_euclid(n as i64);
                        }
                        if a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                            is_min = false;
                            break 'nb;
                        }
                        let w = g2[a as usize * n + b as usize];
                        // Ties go to the lexicographically first cell.
                        if !w.is_finite() || w < v || (w == v && (a, b) < (i as i64, j as i64)) {
                            is_min = false;
                            break 'nb;
                        }
                    }
                }
                if !is_min {
                    continue;
                }
                let p0 = at(i, j);
                let h = chart.hessian(p0);
                let hnorm = h[0][0].abs().max(h[1][1].abs()).max(h[0][1].abs());
                // A zero of grad F is at most one cell away from a minimum cell.
                if v.sqrt() > 4.0 * hnorm * dx.hypot(dy) + opts.tol.grad_tol {
                    continue;
                }
                let p = newton_polish(system, ci, p0, opts.tol.grad_tol)?;
                if chart.margin_at(p) <= 0.0 {
                    continue;
                }
                let pos = system.position(ci, p);
                if found.iter().any(|q| dist(q.position, pos) < opts.merge_dist) {
                    continue;
                }
                let hessian = chart.hessian(p);
                let kind = classify_singularity(hessian, opts.tol.degen_tol)?;
                found.push(SingularPoint {
                    chart: ci,
                    location: p,
                    position: pos,
                    hessian,
                    kind,
                    critical_value: chart.value(p),
                });
            }
        }
    }
    found.sort_by(|a, b| {
        a.critical_value
            .total_cmp(&b.critical_value)
            .then(a.position[0].total_cmp(&b.position[0]))
            .then(a.position[1].total_cmp(&b.position[1]))
            .then(a.position[2].total_cmp(&b.position[2]))
    });
    Ok(found)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn newton_polish(system: &SurfaceSystem, ci: usize, mut p: [f64; 2], grad_tol: f64) -> Result<[f64; 2]> {
    let chart = &system.charts[ci];
    for _ in 0..60 {
        let g = chart.grad(p);
        if g[0].hypot(g[1]) < 0.01 * grad_tol {
            return Ok(chart.wrap(p));
        }
        let h = chart.hessian(p);
        let Some(step) = solve2(h, g) else { break };
        p = [p[0] - step[0], p[1] - step[1]];
        if step[0].hypot(step[1]) < 1e-15 * (1.0 + p[0].hypot(p[1])) {
            break;
        }
    }
    let g = chart.grad(p);
    if g[0].hypot(g[1]) < grad_tol {
        Ok(chart.wrap(p))
    } else {
        Err(Error::NonConvergence(format!(
            "chart {} near ({:.6}, {:.6}): |grad F| = {:e}",
            chart.name,
            p[0],
            p[1],
            g[0].hypot(g[1])
        )))
    }
}

/// Result of the integrality test on the symplectic area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrequantReport {
    pub area: f64,
    pub integer_multiple: i64,
    pub ok: bool,
}

pub fn prequant_check(system: &SurfaceSystem, prequant_tol: f64) -> PrequantReport {
    let area = system.compute_area();
    let q = area / (2.0 * std::f64::consts::PI);
    let n = q.round();
    PrequantReport { area, integer_multiple: n as i64, ok: (q - n).abs() < prequant_tol }
}

/// Largest `|dTheta - omega|` over a `samples x samples` grid per chart,
/// skipping points outside the comfortable part of each chart.
pub fn form_residual(system: &SurfaceSystem, samples: usize) -> f64 {
    let mut worst = 0.0f64;
    for chart in &system.charts {
        let d = chart.domain;
        for i in 0..samples {
            for j in 0..samples {
                let p = [
                    d.x0 + d.width() * (i as f64 + 0.5) / samples as f64,
                    d.y0 + d.height() * (j as f64 + 0.5) / samples as f64,
                ];
                if chart.margin_at(p) > 0.0 {
                    worst = worst.max(chart.curvature_defect(p));
                }
            }
        }
    }
    worst
}
