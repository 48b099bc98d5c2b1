//! Action profiles as a single SVG file.

use std::f64::consts::TAU;

use svg::node::element::{Circle, Line, Polyline, Rectangle, Text};
use svg::Document;

use crate::quantize::Analysis;
use crate::report::fmt_sig;

const WIDTH: f64 = 760.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 50.0;

fn line(x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) -> Line {
    Line::new().set("x1", x1).set("y1", y1).set("x2", x2).set("y2", y2).set("stroke", stroke)
}

fn label(x: f64, y: f64, anchor: &str, text: String) -> Text {
    Text::new(text)
        .set("x", x)
        .set("y", y)
        .set("font-size", 11)
        .set("font-family", "monospace")
        .set("text-anchor", anchor)
}

/// One panel per edge: `A(t)` against `t`, dashed lines at the multiples of
/// `2 pi` in range, filled dots at regular Bohr-Sommerfeld leaves and hollow
/// ones at singular leaves.
pub fn action_plot(analysis: &Analysis) -> String {
    let n = analysis.profiles.len().max(1);
    let height = n as f64 * PANEL;
    let mut doc = Document::new()
        .set("viewBox", (0, 0, WIDTH, height))
        .set("width", WIDTH)
        .set("height", height)
        .add(Rectangle::new().set("width", "100%").set("height", "100%").set("fill", "white"));

    for (e, p) in analysis.profiles.iter().enumerate() {
        let top = e as f64 * PANEL;
        let (x0, x1) = (MARGIN, WIDTH - 20.0);
        let (y0, y1) = (top + PANEL - 30.0, top + 20.0);
        let (mut lo, mut hi) =
            p.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, a)| (lo.min(a), hi.max(a)));
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        let sx = |t: f64| x0 + (x1 - x0) * t / p.t_max;
        let sy = |a: f64| y0 + (y1 - y0) * (a - lo) / (hi - lo);

        doc = doc
            .add(line(x0, y0, x1, y0, "black"))
            .add(line(x0, y0, x0, y1, "black"))
            .add(label(x0, y1 - 6.0, "start", format!("edge {e}: A(t), 0 <= t <= {}", fmt_sig(p.t_max))))
            .add(label(x0 - 4.0, y0, "end", fmt_sig(lo)))
            .add(label(x0 - 4.0, y1 + 8.0, "end", fmt_sig(hi)));

        let first = (lo / TAU).ceil() as i64;
        let last = (hi / TAU).floor() as i64;
        for k in first..=last {
            let y = sy(k as f64 * TAU);
            doc = doc.add(line(x0, y, x1, y, "#999").set("stroke-dasharray", "4 3")).add(label(
                x1,
                y - 3.0,
                "end",
                format!("{k}*2pi"),
            ));
        }

        let points: Vec<String> = p.samples.iter().map(|&(t, a)| format!("{:.3},{:.3}", sx(t), sy(a))).collect();
        doc = doc.add(
            Polyline::new()
                .set("points", points.join(" "))
                .set("fill", "none")
                .set("stroke", "#1f5fa8")
                .set("stroke-width", 1.5),
        );

        for b in &analysis.bs_leaves[e] {
            let dot =
                Circle::new().set("cx", sx(b.t)).set("cy", sy(b.level as f64 * TAU)).set("r", 4).set("stroke", "#b22");
            doc = doc.add(if b.singular { dot.set("fill", "white") } else { dot.set("fill", "#b22") });
        }
    }
    doc.to_string()
}
