//! Prequantum parallel transport along leaves, action profiles and
//! Bohr-Sommerfeld leaves.
//!
//! Holonomy of a leaf `gamma` oriented by `X_F` is `exp(i oint Theta)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::SurfaceSystem;
use crate::poly::Poly;
use crate::trace::{trace_between, LeafFamily, LeafPath, TraceOptions};

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportFactor {
    pub value: Complex64,
    /// Unreduced phase `int Theta`.
    pub phase: f64,
}

impl TransportFactor {
    pub fn identity() -> Self {
        Self::from_phase(0.0)
    }

    pub fn from_phase(phase: f64) -> Self {
        TransportFactor { value: Complex64::from_polar(1.0, phase), phase }
    }

    pub fn then(&self, other: &TransportFactor) -> Self {
        Self::from_phase(self.phase + other.phase)
    }

    pub fn inverse(&self) -> Self {
        Self::from_phase(-self.phase)
    }
}

/// Transport along a traced path; the path must stay on its level set.
pub fn parallel_transport(system: &SurfaceSystem, path: &LeafPath, level_tol: f64) -> Result<TransportFactor> {
    let dev = path.level_deviation(system);
    if dev > level_tol {
        return Err(Error::PathLeavesLeaf(format!(
            "path deviates {dev:e} from level {} (tolerance {level_tol:e})",
            path.level
        )));
    }
    Ok(TransportFactor::from_phase(path.theta_integral(system)))
}

/// Transport from `p` to `q` along the flow of `X_F` on their common leaf.
pub fn transport_between(
    system: &SurfaceSystem,
    p: (usize, [f64; 2]),
    q: (usize, [f64; 2]),
    level_tol: f64,
    opts: &TraceOptions,
) -> Result<TransportFactor> {
    let cp = system.charts[p.0].value(p.1);
    let cq = system.charts[q.0].value(q.1);
    if (cp - cq).abs() > level_tol {
        return Err(Error::PathLeavesLeaf(format!("endpoints lie on levels {cp} and {cq}")));
    }
    let path = trace_between(system, p, q, cp, opts)?;
    parallel_transport(system, &path, level_tol)
}

/// Holonomy of the leaf at parameter `t` of a family.
pub fn loop_holonomy(
    system: &SurfaceSystem,
    family: &LeafFamily,
    t: f64,
    opts: &TraceOptions,
) -> Result<TransportFactor> {
    let leaf = family.leaf(system, t, opts)?;
    parallel_transport(system, &leaf, 1e3 * opts.newton_tol)
}

/// What sits at an end of a Reeb edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeEnd {
    Elliptic,
    Hyperbolic,
    /// Leaves run out of the described region.
    Open,
}

pub type ActionFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub samples: usize,
    pub degree: usize,
    /// Added to every `oint Theta` (a multiple of `2 pi` for non-contractible
    /// leaves whose holonomy convention is fixed by the user).
    pub homology_offset: f64,
    /// Distance of the end samples from the edge ends, relative to its length.
    pub end_eps: f64,
    pub trace: TraceOptions,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { samples: 24, degree: 6, homology_offset: 0.0, end_eps: 1e-7, trace: TraceOptions::default() }
    }
}

/// Action `A(t) = oint Theta` over the leaves of one edge.
#[derive(Clone)]
pub struct ActionProfile {
    pub edge_id: usize,
    pub t_max: f64,
    pub ends: [EdgeEnd; 2],
    /// Sorted `(t, A)` pairs, continuous in `t`; the first and last sit
    /// `end_eps * t_max` from the edge ends.
    pub samples: Vec<(f64, f64)>,
    pub fit: Poly<f64>,
    pub fit_residual: f64,
    pub homology_offset: f64,
    eval: ActionFn,
}

impl std::fmt::Debug for ActionProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ActionProfile")
            .field("edge_id", &self.edge_id)
            .field("t_max", &self.t_max)
            .field("ends", &self.ends)
            .field("samples", &self.samples.len())
            .field("fit_residual", &self.fit_residual)
            .finish()
    }
}

fn chebyshev_nodes(n: usize, t_max: f64) -> Vec<f64> {
    (0..n).rev().map(|i| 0.5 * t_max * (1.0 + ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos())).collect()
}

/// Shifts `raw` by a multiple of `2 pi` to land closest to `reference`.
fn unwrap_near(raw: f64, reference: f64) -> f64 {
    raw + TAU * ((reference - raw) / TAU).round()
}

impl ActionProfile {
    /// Samples `raw` (defined modulo `2 pi`) and fixes a continuous branch.
    pub fn from_fn(
        edge_id: usize,
        t_max: f64,
        ends: [EdgeEnd; 2],
        raw: ActionFn,
        opts: &ProfileOptions,
    ) -> Result<Self> {
        if opts.samples < 8 {
            return Err(Error::InvalidInput(format!("action profiles need at least 8 samples, got {}", opts.samples)));
        }
        let eps = opts.end_eps * t_max;
        let mut ts = vec![eps];
        ts.extend(chebyshev_nodes(opts.samples, t_max));
        ts.push(t_max - eps);
        let mut samples: Vec<(f64, f64)> = Vec::with_capacity(ts.len());
        for &t in &ts {
            let a = raw(t)? + opts.homology_offset;
            let a = match samples.last() {
                Some(&(_, prev)) => unwrap_near(a, prev),
                None if ends[0] == EdgeEnd::Elliptic => unwrap_near(a, 0.0),
                None => a,
            };
            samples.push((t, a));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        let fit = Poly::fit(&xs, &ys, opts.degree.min(xs.len() - 1))?;
        let fit_residual = fit.rms_residual(&xs, &ys);
        let offset = opts.homology_offset;
        let eval: ActionFn = Arc::new(move |t| Ok(raw(t)? + offset));
        Ok(ActionProfile { edge_id, t_max, ends, samples, fit, fit_residual, homology_offset: offset, eval })
    }

    /// Profile from traced leaves of a family.
    pub fn traced(
        system: &SurfaceSystem,
        edge_id: usize,
        family: &LeafFamily,
        ends: [EdgeEnd; 2],
        opts: &ProfileOptions,
    ) -> Result<Self> {
        let sys = system.clone();
        let fam = *family;
        let topts = opts.trace;
        let raw: ActionFn = Arc::new(move |t| Ok(fam.leaf(&sys, t, &topts)?.theta_integral(&sys)));
        Self::from_fn(edge_id, family.t_max(), ends, raw, opts)
    }

    /// Continuous action at `t`, on the branch of the stored samples.
    pub fn value(&self, t: f64) -> Result<f64> {
        let raw = (self.eval)(t)?;
        Ok(unwrap_near(raw, self.interpolate(t)))
    }

    /// Piecewise-linear interpolation of the samples.
    pub fn interpolate(&self, t: f64) -> f64 {
        let s = &self.samples;
        let i = s.partition_point(|&(x, _)| x < t).clamp(1, s.len() - 1);
        let ((x0, y0), (x1, y1)) = (s[i - 1], s[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    pub fn is_monotone(&self) -> bool {
        let inc = self.samples.windows(2).all(|w| w[1].1 >= w[0].1);
        let dec = self.samples.windows(2).all(|w| w[1].1 <= w[0].1);
        inc || dec
    }

    /// `A(0+)` and `A(t_max-)` as sampled.
    pub fn end_values(&self) -> [f64; 2] {
        [self.samples[0].1, self.samples[self.samples.len() - 1].1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,action\n");
        for (t, a) in &self.samples {
            let _ = writeln!(out, "{t:.11e},{a:.11e}");
        }
        out
    }

    /// The same leaves with reversed orientation.
    pub fn reversed(&self) -> ActionProfile {
        let eval = self.eval.clone();
        ActionProfile {
            samples: self.samples.iter().map(|&(t, a)| (t, -a)).collect(),
            fit: self.fit.scale(-1.0),
            homology_offset: -self.homology_offset,
            eval: Arc::new(move |t| Ok(-eval(t)?)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BSLeaf {
    pub edge_id: usize,
    pub t: f64,
    pub level: i64,
    pub singular: bool,
    /// `dA/dt` at the root (zero for singular leaves).
    pub slope: f64,
}

/// Tolerance for deciding that an edge end itself is Bohr-Sommerfeld; the end
/// action is only known from a sample at `end_eps` distance.
pub const END_BS_TOL: f64 = 1e-5;

/// All `t` with `A(t)` in `2 pi Z`, sorted. Roots at elliptic ends are not
/// reported; roots at hyperbolic ends are flagged singular.
pub fn find_bs_leaves(profile: &ActionProfile, bs_tol: f64) -> Result<Vec<BSLeaf>> {
    let s = &profile.samples;
    let mut out = Vec::new();
    let near_end = |t: f64| t < 1e-6 * profile.t_max || t > (1.0 - 1e-6) * profile.t_max;
    let mut singular_levels = [None; 2];
    for (k, &(_, a)) in [s[0], s[s.len() - 1]].iter().enumerate() {
        let n = (a / TAU).round();
        if profile.ends[k] == EdgeEnd::Hyperbolic && (a - TAU * n).abs() < END_BS_TOL * a.abs().max(1.0) {
            singular_levels[k] = Some(n as i64);
        }
    }
    for w in s.windows(2) {
        let ((t0, a0), (t1, a1)) = (w[0], w[1]);
        let (lo, hi) = (a0.min(a1), a0.max(a1));
        // Levels crossed in (lo, hi], oriented so each root is counted once.
        let n_lo = (lo / TAU).floor() as i64 + 1;
        let n_hi = (hi / TAU).floor() as i64;
        for n in n_lo..=n_hi {
            let target = TAU * n as f64;
            let (mut x0, mut f0, mut x1) = (t0, a0 - target, t1);
            let mut root = 0.5 * (x0 + x1);
            for _ in 0..60 {
                root = 0.5 * (x0 + x1);
                let f = profile.value(root)? - target;
                if f.abs() < 0.1 * bs_tol || (x1 - x0) < 1e-15 * profile.t_max {
                    break;
                }
                if (f < 0.0) == (f0 < 0.0) {
                    x0 = root;
                    f0 = f;
                } else {
                    x1 = root;
                }
            }
            if near_end(root) {
                // Elliptic ends have A in 2 pi Z automatically; hyperbolic ones
                // are reported below.
                continue;
            }
            let h = 1e-6 * profile.t_max;
            let slope = (profile.value(root + h)? - profile.value(root - h)?) / (2.0 * h);
            out.push(BSLeaf { edge_id: profile.edge_id, t: root, level: n, singular: false, slope });
        }
    }
    for (k, lvl) in singular_levels.iter().enumerate() {
        if let Some(n) = *lvl {
            let t = if k == 0 { 0.0 } else { profile.t_max };
            out.push(BSLeaf { edge_id: profile.edge_id, t, level: n, singular: true, slope: 0.0 });
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{double_well, sphere_height};

    fn sphere_family(k: f64) -> (SurfaceSystem, LeafFamily) {
        let sys = sphere_height(k);
        let r = (k / 2.0).sqrt();
        (sys, LeafFamily { lo: -r, hi: r, seed: (0, [1.0, 0.0]), seed_level: 0.0 })
    }

    #[test]
    fn factors_are_unit_and_invertible() {
        let (sys, fam) = sphere_family(4.0);
        let leaf = fam.leaf(&sys, 0.7, &TraceOptions::default()).unwrap();
        let f = parallel_transport(&sys, &leaf, 1e-8).unwrap();
        let b = parallel_transport(&sys, &leaf.reversed(), 1e-8).unwrap();
        assert!((f.value.norm() - 1.0).abs() < 1e-12);
        assert!((f.then(&b).value - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert_eq!(TransportFactor::identity().value, Complex64::new(1.0, 0.0));
        assert!((TransportFactor::from_phase(PI).value + 1.0).norm() < 1e-15);
    }

    #[test]
    fn open_path_transport_and_reverse() {
        let (sys, _) = sphere_family(4.0);
        let p = (0, [0.3, 0.4]);
        let q = (0, [2.5, 0.4]);
        let opts = TraceOptions::default();
        let pq = transport_between(&sys, p, q, 1e-8, &opts).unwrap();
        let qp = transport_between(&sys, q, p, 1e-8, &opts).unwrap();
        // Forward then onward closes the full circle.
        let r = 2f64.sqrt();
        let full = 2.0 * PI * r * (0.4 + r);
        let d = pq.phase + qp.phase - full;
        assert!((d - TAU * (d / TAU).round()).abs() < 1e-8);
        // The reverse of a traced path undoes it.
        let path = trace_between(&sys, p, q, 0.4, &opts).unwrap();
        let back = parallel_transport(&sys, &path.reversed(), 1e-8).unwrap();
        assert!((pq.then(&back).value - 1.0).norm() < 1e-9);
    }

    #[test]
    fn off_level_path_is_rejected() {
        let (sys, fam) = sphere_family(4.0);
        let mut leaf = fam.leaf(&sys, 0.7, &TraceOptions::default()).unwrap();
        leaf.level += 1e-3;
        assert!(matches!(parallel_transport(&sys, &leaf, 1e-8), Err(Error::PathLeavesLeaf(_))));
    }

    #[test]
    fn sphere_profile_is_cap_area() {
        let (sys, fam) = sphere_family(4.0);
        let prof = ActionProfile::traced(&sys, 0, &fam, [EdgeEnd::Elliptic; 2], &ProfileOptions::default()).unwrap();
        let r = 2f64.sqrt();
        for &(t, a) in &prof.samples {
            assert!((a - 2.0 * PI * r * t).abs() < 1e-7, "t={t}: {a}");
        }
        assert!(prof.is_monotone());
        assert!(prof.fit_residual < 1e-8);
        let bs = find_bs_leaves(&prof, 1e-9).unwrap();
        assert_eq!(bs.len(), 3);
        for (i, b) in bs.iter().enumerate() {
            assert_eq!(b.level, i as i64 + 1);
            assert!(!b.singular && b.slope.abs() > 1e-6);
            let hol = loop_holonomy(&sys, &fam, b.t, &TraceOptions::default()).unwrap();
            assert!((hol.value - 1.0).norm() < 1e-8);
        }
        let rev = prof.reversed();
        assert!((rev.value(1.0).unwrap() + prof.value(1.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn bs_count_survives_step_halving() {
        let (sys, fam) = sphere_family(5.0);
        let mut opts = ProfileOptions::default();
        let a = find_bs_leaves(&ActionProfile::traced(&sys, 0, &fam, [EdgeEnd::Elliptic; 2], &opts).unwrap(), 1e-9)
            .unwrap();
        opts.trace.rel_step *= 0.5;
        let b = find_bs_leaves(&ActionProfile::traced(&sys, 0, &fam, [EdgeEnd::Elliptic; 2], &opts).unwrap(), 1e-9)
            .unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn band_without_multiples_has_no_roots() {
        let raw: ActionFn = Arc::new(|t| Ok(0.3 + 5.6 * t));
        let prof = ActionProfile::from_fn(0, 1.0, [EdgeEnd::Open; 2], raw, &ProfileOptions::default()).unwrap();
        assert!(find_bs_leaves(&prof, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn tuned_lobe_gives_singular_root() {
        // Lobe edges of the double well run from a minimum up to the figure-eight.
        let sys = double_well(TAU);
        let fam = LeafFamily { lo: -0.25, hi: 0.0, seed: (0, [1.0, 0.2]), seed_level: 0.04 };
        let prof =
            ActionProfile::traced(&sys, 0, &fam, [EdgeEnd::Elliptic, EdgeEnd::Hyperbolic], &ProfileOptions::default())
                .unwrap();
        assert!((prof.end_values()[1] - TAU).abs() < 1e-4);
        let bs = find_bs_leaves(&prof, 1e-9).unwrap();
        assert_eq!(bs.len(), 1);
        assert!(bs[0].singular && bs[0].level == 1 && bs[0].t == 0.25);
    }

    #[test]
    fn lobe_action_matches_polygon_area() {
        let lobe = 2.0;
        let sys = double_well(lobe);
        let fam = LeafFamily { lo: -0.25, hi: 0.0, seed: (0, [1.0, 0.2]), seed_level: 0.04 };
        let near = fam.leaf(&sys, 0.25 - 1e-9, &TraceOptions::default()).unwrap();
        // Shoelace area of the traced near-singular lobe, times the density.
        let pts: Vec<[f64; 2]> = near.segments[0].points.clone();
        let shoelace: f64 = pts.windows(2).map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1]).sum::<f64>() * 0.5;
        let a = near.theta_integral(&sys);
        assert!((a - 1.5 * lobe * shoelace).abs() < 1e-4, "{a} vs {}", 1.5 * lobe * shoelace);
        assert!((a - lobe).abs() < 1e-4);
    }
}
