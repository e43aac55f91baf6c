//! Minimal SVG output for pipes, obstacles, and planned paths.  World
//! coordinates are mapped into a y-up viewport with a small margin; no
//! plotting dependencies.

use std::fmt::Write as _;

use nalgebra::Vector2;

use crate::geom::Polygon;

type P2 = Vector2<f64>;

enum Item {
    Poly { pts: Vec<P2>, fill: String, stroke: String, opacity: f64 },
    Line { pts: Vec<P2>, stroke: String, width: f64 },
    Text { at: P2, s: String, size: f64, fill: String },
}

/// Collects shapes in world coordinates and renders them to one SVG
/// document.
#[derive(Default)]
pub struct SvgScene {
    items: Vec<Item>,
}

impl SvgScene {
    pub fn new() -> Self {
        SvgScene::default()
    }

    pub fn polygon(&mut self, poly: &Polygon, fill: &str, stroke: &str, opacity: f64) {
        self.items.push(Item::Poly {
            pts: poly.vertices().to_vec(),
            fill: fill.to_string(),
            stroke: stroke.to_string(),
            opacity,
        });
    }

    pub fn polyline(&mut self, pts: &[P2], stroke: &str, width: f64) {
        self.items.push(Item::Line { pts: pts.to_vec(), stroke: stroke.to_string(), width });
    }

    /// Label anchored at a world-coordinate point; `size` is in world units.
    pub fn text(&mut self, at: P2, s: &str, size: f64, fill: &str) {
        self.items.push(Item::Text { at, s: s.to_string(), size, fill: fill.to_string() });
    }

    fn bounds(&self) -> (P2, P2) {
        let mut lo = P2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut feed = |p: &P2| {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        };
        for item in &self.items {
            match item {
                Item::Poly { pts, .. } | Item::Line { pts, .. } => pts.iter().for_each(&mut feed),
                Item::Text { at, .. } => feed(at),
            }
        }
        if lo.x > hi.x {
            (P2::new(0.0, 0.0), P2::new(1.0, 1.0))
        } else {
            (lo, hi)
        }
    }

    /// Render with the given pixel width; height follows the aspect ratio.
    pub fn render(&self, width_px: f64) -> String {
        let (lo, hi) = self.bounds();
        let span = (hi - lo).map(|s| s.max(1e-9));
        let margin = 0.05 * span.x.max(span.y);
        let world_w = span.x + 2.0 * margin;
        let world_h = span.y + 2.0 * margin;
        let scale = width_px / world_w;
        let height_px = world_h * scale;
        // SVG y grows downward; flip about the top of the padded box.
        let to_px = |p: &P2| {
            let x = (p.x - lo.x + margin) * scale;
            let y = (hi.y + margin - p.y) * scale;
            (x, y)
        };

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width_px:.0}" height="{height_px:.0}" viewBox="0 0 {width_px:.2} {height_px:.2}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for item in &self.items {
            match item {
                Item::Poly { pts, fill, stroke, opacity } => {
                    let coords = pts
                        .iter()
                        .map(|p| {
                            let (x, y) = to_px(p);
                            format!("{x:.2},{y:.2}")
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    let _ = writeln!(
                        out,
                        r#"<polygon points="{coords}" fill="{fill}" stroke="{stroke}" fill-opacity="{opacity}"/>"#
                    );
                }
                Item::Line { pts, stroke, width } => {
                    let coords = pts
                        .iter()
                        .map(|p| {
                            let (x, y) = to_px(p);
                            format!("{x:.2},{y:.2}")
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
                    );
                }
                Item::Text { at, s, size, fill } => {
                    let (x, y) = to_px(at);
                    let px = size * scale;
                    let _ = writeln!(
                        out,
                        r#"<text x="{x:.2}" y="{y:.2}" font-size="{px:.2}" font-family="sans-serif" fill="{fill}">{s}</text>"#
                    );
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }

    pub fn write_to(&self, path: impl AsRef<std::path::Path>, width_px: f64) -> std::io::Result<()> {
        std::fs::write(path, self.render(width_px))
    }
}
