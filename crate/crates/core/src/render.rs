//! Deterministic SVG rendering of generator trees and scaffolds.

use std::fmt::Write;

use crate::geom::Point2;
use crate::scaffold::Scaffold;
use crate::scalar::Scalar;
use crate::tree::GeneratorTree;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub width: f64,
    pub height: f64,
    /// Fraction of the canvas left empty on every side.
    pub margin: f64,
    /// Stroke width of the trunk, in pixels.
    pub stroke_width: f64,
    /// Scale stroke width by branch start speed relative to the trunk.
    pub taper: bool,
    pub overlay_scaffold: bool,
    pub markers: bool,
    pub marker_radius: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 800.0,
            margin: 0.05,
            stroke_width: 3.0,
            taper: true,
            overlay_scaffold: false,
            markers: false,
            marker_radius: 2.5,
        }
    }
}

const BRANCH_COLOR: &str = "#2f4f2f";
const SCAFFOLD_COLOR: &str = "#b03a2e";
const MARKER_COLOR: &str = "#1f5fa8";

/// Fixed three-decimal formatting with negative zero folded to zero.
fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    off_x: f64,
    off_y: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, opts: &RenderOptions) -> Self {
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        for (x, y) in points {
            lo_x = lo_x.min(x);
            lo_y = lo_y.min(y);
            hi_x = hi_x.max(x);
            hi_y = hi_y.max(y);
        }
        if !lo_x.is_finite() {
            (lo_x, lo_y, hi_x, hi_y) = (0.0, 0.0, 1.0, 1.0);
        }
        let inner_w = opts.width * (1.0 - 2.0 * opts.margin);
        let inner_h = opts.height * (1.0 - 2.0 * opts.margin);
        let span_x = (hi_x - lo_x).max(1e-12);
        let span_y = (hi_y - lo_y).max(1e-12);
        let scale = (inner_w / span_x).min(inner_h / span_y);
        Self {
            min_x: lo_x,
            max_y: hi_y,
            scale,
            off_x: opts.width * opts.margin + (inner_w - span_x * scale) / 2.0,
            off_y: opts.height * opts.margin + (inner_h - span_y * scale) / 2.0,
        }
    }

    fn map(&self, x: f64, y: f64) -> (String, String) {
        (
            num(self.off_x + (x - self.min_x) * self.scale),
            num(self.off_y + (self.max_y - y) * self.scale),
        )
    }
}

fn xy<T: Scalar>(p: Point2<T>) -> (f64, f64) {
    (p.x.to_f64_lossy(), p.y.to_f64_lossy())
}

/// Renders `tree` as an SVG document. Every drawn element is a `<path>`.
pub fn render_svg<T: Scalar>(
    tree: &GeneratorTree<T>,
    scaffold: Option<&Scaffold<T>>,
    opts: &RenderOptions,
) -> String {
    let overlay = scaffold.filter(|_| opts.overlay_scaffold || opts.markers);
    let tree_pts = tree
        .branches
        .iter()
        .flat_map(|b| b.trajectory.samples.iter().map(|s| xy(s.state.position())));
    let scaffold_pts = overlay
        .into_iter()
        .flat_map(|s| s.nodes.iter().map(|n| xy(n.position)));
    let frame = Frame::fit(tree_pts.chain(scaffold_pts), opts);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(opts.width),
        h = num(opts.height)
    );

    let speed_at_start = |i: usize| {
        let b = &tree.branches[i];
        b.field
            .rho
            .eval(b.field.phase(b.span.0, b.init.tau))
            .to_f64_lossy()
    };
    let root_speed = if tree.is_empty() {
        1.0
    } else {
        speed_at_start(0)
    };
    let _ = writeln!(
        out,
        r#"<g id="branches" fill="none" stroke="{BRANCH_COLOR}" stroke-linecap="round">"#
    );
    for b in &tree.branches {
        let mut d = String::new();
        for (i, s) in b.trajectory.samples.iter().enumerate() {
            let (x, y) = frame.map(s.state.x.to_f64_lossy(), s.state.y.to_f64_lossy());
            let _ = write!(d, "{}{x} {y}", if i == 0 { "M" } else { " L" });
        }
        let ratio = if opts.taper && root_speed > 0.0 {
            (speed_at_start(b.id) / root_speed).clamp(0.05, 1.0)
        } else {
            1.0
        };
        let _ = writeln!(
            out,
            r#"<path d="{d}" stroke-width="{}"/>"#,
            num(opts.stroke_width * ratio)
        );
    }
    let _ = writeln!(out, "</g>");

    if let Some(sc) = overlay {
        if opts.overlay_scaffold {
            let _ = writeln!(
                out,
                r#"<g id="scaffold" fill="none" stroke="{SCAFFOLD_COLOR}" stroke-width="1.000" stroke-dasharray="4 3">"#
            );
            for e in &sc.edges {
                let (ax, ay) = xy(sc.nodes[e.from].position);
                let (bx, by) = xy(sc.nodes[e.to].position);
                let (ax, ay) = frame.map(ax, ay);
                let (bx, by) = frame.map(bx, by);
                let _ = writeln!(out, r#"<path d="M{ax} {ay} L{bx} {by}"/>"#);
            }
            let _ = writeln!(out, "</g>");
        }
        if opts.markers {
            let r = opts.marker_radius;
            let _ = writeln!(
                out,
                r#"<g id="markers" fill="{MARKER_COLOR}" stroke="none">"#
            );
            for n in &sc.nodes {
                let (px, py) = xy(n.position);
                let cx = frame.off_x + (px - frame.min_x) * frame.scale;
                let cy = frame.off_y + (frame.max_y - py) * frame.scale;
                let _ = writeln!(
                    out,
                    r#"<path d="M{} {} a{r} {r} 0 1 0 {d} 0 a{r} {r} 0 1 0 -{d} 0 Z"/>"#,
                    num(cx - r),
                    num(cy),
                    r = num(r),
                    d = num(2.0 * r)
                );
            }
            let _ = writeln!(out, "</g>");
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_folded() {
        assert_eq!(num(-0.0001), "0.000");
        assert_eq!(num(1.23456), "1.235");
    }
}
