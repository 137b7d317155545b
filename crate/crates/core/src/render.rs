//! Deterministic SVG rendering: each polygon as a regular polygon with
//! labelled, arrowed sides; curves as straight chords between ports.
//!
//! Styles: α solid, β dashed, γ dotted; shadow arcs thin in the same
//! colours; marks as filled dots; boundary sides drawn heavy.

use std::fmt::Write;

use crate::arrangement::{Arrangement, Port, Tag};
use crate::bridge::Corner;

const R: f64 = 120.0;
const CELL: f64 = 300.0;
const COLUMNS: usize = 3;

fn style(t: Tag) -> (&'static str, &'static str, f64) {
    match t {
        Tag::Alpha => ("#c0392b", "none", 2.5),
        Tag::Beta => ("#2471a3", "8 5", 2.5),
        Tag::Gamma => ("#1e8449", "2 4", 2.5),
        Tag::ShadowAlpha => ("#c0392b", "none", 1.2),
        Tag::ShadowBeta => ("#2471a3", "6 3", 1.2),
        Tag::ShadowGamma => ("#1e8449", "1.5 3", 1.2),
        Tag::Aux(_) => ("#7f8c8d", "4 2 1 2", 1.0),
    }
}

fn vertex(center: (f64, f64), n: usize, k: usize) -> (f64, f64) {
    let a = -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * (k % n) as f64 / n as f64;
    (center.0 + R * a.cos(), center.1 + R * a.sin())
}

fn lerp(a: (f64, f64), b: (f64, f64), s: f64) -> (f64, f64) {
    (a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s)
}

/// Render `arr` (with optional marks) as an SVG document.
pub fn svg(arr: &Arrangement, marks: &[Corner]) -> String {
    let s = &*arr.surface;
    let np = s.num_polygons().max(1);
    let cols = np.min(COLUMNS);
    let rows = np.div_ceil(COLUMNS);
    let (w, h) = (cols as f64 * CELL, rows as f64 * CELL);
    let center = |p: usize| (CELL * ((p % COLUMNS) as f64 + 0.5), CELL * ((p / COLUMNS) as f64 + 0.5));
    // polygons of length < 3 are drawn as bigons/monogons on a circle too
    let point = |p: usize, port: Port| -> (f64, f64) {
        let n = s.poly_len(p).max(1);
        match port {
            Port::Corner(c) => vertex(center(p), n, c),
            Port::Side { side, t } => {
                let rev = s.polygons()[p][side].reversed;
                let u = if rev { 1.0 - t } else { t };
                lerp(vertex(center(p), n, side), vertex(center(p), n, side + 1), u)
            }
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, poly) in s.polygons().iter().enumerate() {
        let n = poly.len();
        let c = center(p);
        for (k, sd) in poly.iter().enumerate() {
            let (a, b) = (vertex(c, n, k), vertex(c, n, k + 1));
            let width = if s.is_interior(sd.edge) { 1.0 } else { 3.0 };
            let _ = writeln!(out, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="{width}"/>"#, a.0, a.1, b.0, b.1);
            // arrow head at the far end of the edge's own direction
            let (from, to) = if sd.reversed { (b, a) } else { (a, b) };
            let tip = lerp(from, to, 0.6);
            let back = lerp(from, to, 0.52);
            let (dx, dy) = (tip.0 - back.0, tip.1 - back.1);
            let _ = writeln!(
                out,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="black"/>"#,
                tip.0,
                tip.1,
                back.0 - dy * 0.6,
                back.1 + dx * 0.6,
                back.0 + dy * 0.6,
                back.1 - dx * 0.6
            );
            let mid = lerp(a, b, 0.5);
            let out_pt = lerp(c, mid, 1.15);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-family="serif" font-size="13" text-anchor="middle">{}</text>"#,
                out_pt.0,
                out_pt.1 + 4.0,
                escape(&s.labels()[sd.edge])
            );
        }
    }
    for c in &arr.curves {
        let (color, dash, width) = style(c.tag);
        let _ = write!(out, r#"<path fill="none" stroke="{color}" stroke-width="{width}" stroke-dasharray="{dash}" d=""#);
        for g in &c.segs {
            let (a, b) = (point(g.poly, g.from), point(g.poly, g.to));
            let _ = write!(out, "M{:.2},{:.2} L{:.2},{:.2} ", a.0, a.1, b.0, b.1);
        }
        let _ = writeln!(out, r#""/>"#);
    }
    for &(p, k) in marks {
        let v = point(p, Port::Corner(k));
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, v.0, v.1);
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rendering_is_deterministic() {
        let a = svg(&fixtures::klein(), &[]);
        assert_eq!(a, svg(&fixtures::klein(), &[]));
        assert!(a.contains("stroke-dasharray=\"8 5\""));
        assert_eq!(a.matches("<path").count(), 3);
    }

    #[test]
    fn empty_sphere_renders() {
        let a = svg(&fixtures::sphere(), &[]);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<path").count(), 0);
    }
}
