//! Built-in systems with analytic atlases.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{Chart, Rect, SurfaceSystem};
use crate::error::{Error, Result};

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn comb(a: f64, u: Vec3, b: f64, v: Vec3, c: f64, w: Vec3) -> Vec3 {
    [a * u[0] + b * v[0] + c * w[0], a * u[1] + b * v[1] + c * w[1], a * u[2] + b * v[2] + c * w[2]]
}

/// Round sphere of radius `r` with a right-handed frame `(e1, e2, e3)`.
/// Charts: 0 = cylinder `(phi, w)` around `e3`, 1 = cap around `+e3`,
/// 2 = cap around `-e3`.
fn sphere_atlas(name: &str, r: f64, frame: [Vec3; 3], f3: Arc<dyn Fn(Vec3) -> f64 + Send + Sync>) -> SurfaceSystem {
    let [e1, e2, e3] = frame;
    let r2 = r * r;

    let cyl_embed = Arc::new(move |phi: f64, w: f64| {
        let rho = (r2 - w * w).max(0.0).sqrt();
        comb(rho * phi.cos(), e1, rho * phi.sin(), e2, w, e3)
    });
    let cyl = {
        let embed = cyl_embed.clone();
        let f3 = f3.clone();
        Chart {
            name: "cylinder".into(),
            domain: Rect::new(0.0, 2.0 * PI, -r, r),
            periodic: [true, false],
            f: Arc::new(move |phi, w| f3(embed(phi, w))),
            omega: Arc::new(move |_, _| r),
            theta: Arc::new(move |_, w| [-r * (w + r), 0.0]),
            embed: Some(cyl_embed),
            locate: Some(Arc::new(move |p: Vec3| {
                let n = dot(p, p).sqrt();
                let w = dot(p, e3) * r / n;
                (w.abs() < r).then(|| [dot(p, e2).atan2(dot(p, e1)).rem_euclid(2.0 * PI), w])
            })),
            margin: Some(Arc::new(move |_, w| (r2 - w * w).max(0.0).sqrt() / r - 0.3)),
            area_region: Some(Rect::new(0.0, 2.0 * PI, -r, r)),
        }
    };

    let cap = |sign: f64, label: &str| {
        let embed = Arc::new(move |u: f64, v: f64| {
            let s = (r2 - u * u - v * v).max(0.0).sqrt();
            comb(u, e1, sign * v, e2, sign * s, e3)
        });
        let fe = embed.clone();
        let f3 = f3.clone();
        let g = move |u: f64, v: f64| {
            let s = (r2 - u * u - v * v).max(0.0).sqrt();
            r / (r + s)
        };
        Chart {
            name: label.into(),
            domain: Rect::new(-0.9 * r, 0.9 * r, -0.9 * r, 0.9 * r),
            periodic: [false, false],
            f: Arc::new(move |u, v| f3(fe(u, v))),
            omega: Arc::new(move |u, v| r / (r2 - u * u - v * v).max(1e-300).sqrt()),
            theta: Arc::new(move |u, v| {
                let k = g(u, v);
                [-v * k, u * k]
            }),
            embed: Some(embed),
            locate: Some(Arc::new(move |p: Vec3| {
                let n = dot(p, p).sqrt();
                let s = r / n;
                (sign * dot(p, e3) > 0.0).then(|| [dot(p, e1) * s, sign * dot(p, e2) * s])
            })),
            margin: Some(Arc::new(move |u, v| 0.9 - u.hypot(v) / r)),
            area_region: None,
        }
    };

    // Theta_cyl - Theta_north = -2 r^2 dphi; the south cap matches the cylinder.
    let gauge = Arc::new(move |a: usize, b: usize, p: [f64; 2]| match (a, b) {
        (0, 1) => -2.0 * r2 * p[0],
        (1, 0) => 2.0 * r2 * p[1].atan2(p[0]).rem_euclid(2.0 * PI),
        _ => 0.0,
    });

    SurfaceSystem::new(name, vec![cyl, cap(1.0, "north-cap"), cap(-1.0, "south-cap")])
        .with_gauge(gauge)
        .with_euler_characteristic(2)
}

/// Height function on a round sphere of area `2 pi k`.
pub fn sphere_height(k: f64) -> SurfaceSystem {
    let r = (k / 2.0).sqrt();
    let frame = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    sphere_atlas("sphere-height", r, frame, Arc::new(|p: Vec3| p[2])).with_param("k", k)
}

/// Round sphere of area `2 pi k` with an arbitrary function of the
/// embedded point.
pub fn sphere_with_function(name: &str, k: f64, f3: Arc<dyn Fn(Vec3) -> f64 + Send + Sync>) -> SurfaceSystem {
    let r = (k / 2.0).sqrt();
    let frame = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    sphere_atlas(name, r, frame, f3).with_param("k", k)
}

/// Free rigid body energy on the momentum sphere of area `2 pi k` with
/// principal moments `i1 < i2 < i3`.
pub fn euler_sphere(k: f64, inertia: [f64; 3]) -> SurfaceSystem {
    let r = (k / 2.0).sqrt();
    // Cylinder axis along m2, where the unstable rotations sit.
    let frame = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let [i1, i2, i3] = inertia;
    let f = Arc::new(move |m: Vec3| 0.5 * (m[0] * m[0] / i1 + m[1] * m[1] / i2 + m[2] * m[2] / i3));
    sphere_atlas("euler-sphere", r, frame, f)
        .with_param("k", k)
        .with_param("i1", i1)
        .with_param("i2", i2)
        .with_param("i3", i3)
}

/// Height of a torus standing on its rim: tube radius `tube`, area `2 pi k`.
/// Chart 0 has `theta in (-pi, pi)`, chart 1 has `theta in (0, 2 pi)`; both
/// are periodic in the tube angle `phi`.
pub fn standing_torus(k: f64, tube: f64) -> SurfaceSystem {
    let rt = tube;
    let r0 = k / (2.0 * PI * rt);
    let embed = Arc::new(move |th: f64, ph: f64| {
        let rho = r0 + rt * ph.cos();
        [rho * th.cos(), rt * ph.sin(), rho * th.sin()]
    });
    let chart = |name: &str, lo: f64, shift: f64| {
        let hi = lo + 2.0 * PI;
        let centre = lo + PI;
        Chart {
            name: name.into(),
            domain: Rect::new(lo, hi, 0.0, 2.0 * PI),
            periodic: [false, true],
            f: Arc::new(move |th, ph| (r0 + rt * ph.cos()) * th.sin()),
            omega: Arc::new(move |_, ph| rt * (r0 + rt * ph.cos())),
            theta: Arc::new(move |th, ph| [0.0, rt * (r0 + rt * ph.cos()) * (th - shift)]),
            embed: Some(embed.clone()),
            locate: Some(Arc::new(move |p: Vec3| {
                let th = lo + (p[2].atan2(p[0]) - lo).rem_euclid(2.0 * PI);
                let rho = p[0].hypot(p[2]);
                let ph = p[1].atan2(rho - r0).rem_euclid(2.0 * PI);
                (th > lo && th < hi).then_some([th, ph])
            })),
            margin: Some(Arc::new(move |th, _| (PI - (th - centre).abs()) / PI - 0.25)),
            area_region: (lo < 0.0).then(|| Rect::new(lo, hi, 0.0, 2.0 * PI)),
        }
    };
    // Theta_0 - Theta_1 = +-pi rt (r0 + rt cos phi) dphi on the two overlap strips.
    let g = move |ph: f64| PI * rt * (r0 * ph + rt * ph.sin());
    let gauge = Arc::new(move |a: usize, b: usize, p: [f64; 2]| match (a, b) {
        (0, 1) if p[0] > 0.0 => g(p[1]),
        (0, 1) => -g(p[1]),
        (1, 0) if p[0] < PI => -g(p[1]),
        (1, 0) => g(p[1]),
        _ => 0.0,
    });
    SurfaceSystem::new("standing-torus", vec![chart("theta-centred", -PI, 0.0), chart("theta-shifted", 0.0, PI)])
        .with_gauge(gauge)
        .with_euler_characteristic(0)
        .with_param("k", k)
        .with_param("tube", rt)
}

/// Planar double well `F = y^2 + x^4 - x^2` with `omega = s dx ^ dy` scaled so
/// each lobe of the figure-eight level `F = 0` has the given area.
pub fn double_well(lobe_area: f64) -> SurfaceSystem {
    let s = 1.5 * lobe_area;
    let chart = Chart {
        name: "plane".into(),
        domain: Rect::new(-1.6, 1.6, -1.6, 1.6),
        periodic: [false, false],
        f: Arc::new(|x, y| y * y + x * x * x * x - x * x),
        omega: Arc::new(move |_, _| s),
        theta: Arc::new(move |x, y| [-0.5 * s * y, 0.5 * s * x]),
        embed: None,
        locate: None,
        margin: None,
        area_region: None,
    };
    SurfaceSystem::new("double-well", vec![chart]).with_param("lobe_area", lobe_area)
}

/// Local normal form `F = xy`, `omega = dx ^ dy`, `Theta = (x dy - y dx)/2`.
pub fn normal_form() -> SurfaceSystem {
    let chart = Chart {
        name: "plane".into(),
        domain: Rect::new(-1.0, 1.0, -1.0, 1.0),
        periodic: [false, false],
        f: Arc::new(|x, y| x * y),
        omega: Arc::new(|_, _| 1.0),
        theta: Arc::new(|x, y| [-0.5 * y, 0.5 * x]),
        embed: None,
        locate: None,
        margin: None,
        area_region: None,
    };
    SurfaceSystem::new("normal-form", vec![chart])
}

pub fn builtin_names() -> &'static [&'static str] {
    &["sphere-height", "euler-sphere", "standing-torus", "double-well", "normal-form"]
}

/// Default area multiple for the Euler system.
pub const EULER_DEFAULT_K: f64 = 6.0;

/// Builds a named system; unknown parameters are rejected.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<SurfaceSystem> {
    let allowed: &[&str] = match name {
        "sphere-height" => &["k"],
        "euler-sphere" => &["k", "i1", "i2", "i3"],
        "standing-torus" => &["k", "tube"],
        "double-well" => &["lobe_area"],
        "normal-form" => &[],
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown builtin `{name}` (expected one of {})",
                builtin_names().join(", ")
            )))
        }
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidInput(format!("builtin `{name}` has no parameter `{bad}`")));
    }
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let sys = match name {
        "sphere-height" => sphere_height(get("k", 4.0)),
        "euler-sphere" => euler_sphere(get("k", EULER_DEFAULT_K), [get("i1", 1.0), get("i2", 2.0), get("i3", 3.0)]),
        "standing-torus" => standing_torus(get("k", 2.0), get("tube", 0.3)),
        "double-well" => double_well(get("lobe_area", 2.0 * PI)),
        _ => normal_form(),
    };
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_round_trip(sys: &SurfaceSystem) {
        for (i, c) in sys.charts.iter().enumerate() {
            for a in 1..6 {
                for b in 1..6 {
                    let p = [
                        c.domain.x0 + c.domain.width() * a as f64 / 6.0,
                        c.domain.y0 + c.domain.height() * b as f64 / 6.0,
                    ];
                    if c.margin_at(p) <= 0.0 {
                        continue;
                    }
                    let q = sys.locate(i, sys.position(i, p)).expect("chart locates its own points");
                    assert!((q[0] - p[0]).abs() < 1e-9 && (q[1] - p[1]).abs() < 1e-9, "{} {p:?} {q:?}", c.name);
                }
            }
        }
    }

    #[test]
    fn embeddings_invert() {
        check_round_trip(&sphere_height(4.0));
        check_round_trip(&euler_sphere(6.0, [1.0, 2.0, 3.0]));
        check_round_trip(&standing_torus(2.0, 0.3));
    }

    #[test]
    fn gauge_matches_potential_difference() {
        // Theta_a - Theta_b = d g_ab, checked by differencing g along a short
        // segment in chart a and integrating both potentials over it.
        for sys in [sphere_height(4.0), standing_torus(2.0, 0.3)] {
            for a in 0..sys.charts.len() {
                for b in 0..sys.charts.len() {
                    if a == b {
                        continue;
                    }
                    let ca = &sys.charts[a];
                    for s in 0..40 {
                        let p = [
                            ca.domain.x0 + ca.domain.width() * (0.013 + s as f64 / 41.0),
                            ca.domain.y0 + ca.domain.height() * (0.37 + 0.011 * s as f64),
                        ];
                        let q = [p[0] + 1e-4, p[1] + 2e-4];
                        let (Some(pb), Some(qb)) =
                            (sys.locate(b, sys.position(a, p)), sys.locate(b, sys.position(a, q)))
                        else {
                            continue;
                        };
                        if ca.margin_at(p) <= 0.0
                            || sys.charts[b].margin_at(pb) <= 0.0
                            || (qb[0] - pb[0]).abs() > 0.1
                            || (qb[1] - pb[1]).abs() > 0.1
                        {
                            continue;
                        }
                        let ta = ca.theta_at([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                        let tb = sys.charts[b].theta_at([0.5 * (pb[0] + qb[0]), 0.5 * (pb[1] + qb[1])]);
                        let ia = ta[0] * (q[0] - p[0]) + ta[1] * (q[1] - p[1]);
                        let ib = tb[0] * (qb[0] - pb[0]) + tb[1] * (qb[1] - pb[1]);
                        let g = sys.gauge.as_ref().unwrap();
                        let dg = g(a, b, q) - g(a, b, p);
                        assert!((ia - ib - dg).abs() < 1e-9, "{} {a}->{b} at {p:?}: {}", sys.name, ia - ib - dg);
                    }
                }
            }
        }
    }

    #[test]
    fn unknown_builtin_parameter_is_rejected() {
        let mut p = BTreeMap::new();
        p.insert("radius".to_string(), 1.0);
        assert!(builtin("sphere-height", &p).is_err());
        assert!(builtin("klein-bottle", &BTreeMap::new()).is_err());
    }
}
