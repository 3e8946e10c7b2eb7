//! Publication-style SVG figures: store scatter plots, field heatmaps,
//! contour and reference lines, landmarks, and the boundary outline.
//! Output bytes are deterministic for identical scenes.

use crate::error::{Error, Result};
use crate::evaluate::Landmark;
use crate::field::ScalarField;
use crate::geodata::{ClassLabel, LabeledPoint, LandmassMask};
use crate::geom::{BoundingBox, GeoPoint, Polyline};

/// Class +1 (North) marker color.
pub const NORTH_COLOR: &str = "#2166ac";
/// Class -1 (South) marker color.
pub const SOUTH_COLOR: &str = "#b2182b";
/// Diverging colormap midpoint, used exactly at the anchor level.
const MID_RGB: (u8, u8, u8) = (247, 247, 247);
const NORTH_RGB: (u8, u8, u8) = (33, 102, 172);
const SOUTH_RGB: (u8, u8, u8) = (178, 24, 43);

/// Pixel viewport over a geographic bounding box, equirectangular
/// (plate carree) with an optional cos(53 deg) horizontal compression for
/// visual fidelity at English latitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub bbox: BoundingBox,
    pub width_px: f64,
    pub height_px: f64,
    pub aspect_cos_lat: bool,
}

impl Viewport {
    fn effective_width(&self) -> f64 {
        if self.aspect_cos_lat {
            self.height_px * self.bbox.lon_span() * 53f64.to_radians().cos() / self.bbox.lat_span()
        } else {
            self.width_px
        }
    }

    fn project(&self, p: GeoPoint) -> (f64, f64) {
        let x = (p.lon - self.bbox.lon_min) / self.bbox.lon_span() * self.effective_width();
        let y = self.height_px - (p.lat - self.bbox.lat_min) / self.bbox.lat_span() * self.height_px;
        (x, y)
    }
}

/// Painted back to front in list order.
#[derive(Clone, Debug)]
pub enum Layer {
    /// Class-colored scatter of labeled points.
    Points { points: Vec<LabeledPoint>, radius_px: f64 },
    /// Field heatmap with a diverging colormap anchored at `level`.
    Heatmap { field: ScalarField, level: f64 },
    /// A polyline with explicit styling.
    Line { line: Polyline, stroke: String, width_px: f64, dashed: bool },
    /// Marker plus label.
    Landmark { landmark: Landmark },
    /// Boundary ring outlines.
    Boundary { mask: LandmassMask },
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub viewport: Viewport,
    pub layers: Vec<Layer>,
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn lerp_color(a: (u8, u8, u8), b: (u8, u8, u8), t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let ch = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(a.0, b.0), ch(a.1, b.1), ch(a.2, b.2))
}

/// Diverging blue-white-red: low values (North side) blue, the anchor
/// level exactly the midpoint color, high values (South side) red.
fn heat_color(v: f64, level: f64, lo: f64, hi: f64) -> String {
    if v == level {
        return format!("#{:02x}{:02x}{:02x}", MID_RGB.0, MID_RGB.1, MID_RGB.2);
    }
    if v < level {
        let span = level - lo;
        let t = if span > 0.0 { (v - lo) / span } else { 1.0 };
        lerp_color(NORTH_RGB, MID_RGB, t)
    } else {
        let span = hi - level;
        let t = if span > 0.0 { (v - level) / span } else { 0.0 };
        lerp_color(MID_RGB, SOUTH_RGB, t)
    }
}

/// Render a scene to an SVG document string.
pub fn render_svg(scene: &Scene) -> Result<String> {
    if scene.layers.is_empty() {
        return Err(Error::EmptyScene);
    }
    scene.viewport.bbox.validate()?;
    if !(scene.viewport.width_px > 0.0 && scene.viewport.height_px > 0.0) {
        return Err(Error::EmptyScene);
    }
    let vp = &scene.viewport;
    let (w, h) = (vp.effective_width(), vp.height_px);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    out.push_str(&format!("<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n"));

    for layer in &scene.layers {
        match layer {
            Layer::Heatmap { field, level } => {
                let (lo, hi) = field.min_max().ok_or(Error::EmptyScene)?;
                let g = &field.grid;
                // one cell per node, sized to the node spacing
                let cw = g.lon_spacing() / vp.bbox.lon_span() * w;
                let chh = g.lat_spacing() / vp.bbox.lat_span() * h;
                out.push_str("<g shape-rendering=\"crispEdges\">\n");
                for j in 0..g.n_lat {
                    for i in 0..g.n_lon {
                        let v = field.value_at(i, j);
                        if !v.is_finite() {
                            continue;
                        }
                        let (x, y) = vp.project(g.node(i, j));
                        out.push_str(&format!(
                            "<rect x=\"{}\" y=\"{}\" width=\"{cw}\" height=\"{chh}\" fill=\"{}\"/>\n",
                            x - cw / 2.0,
                            y - chh / 2.0,
                            heat_color(v, *level, lo, hi)
                        ));
                    }
                }
                out.push_str("</g>\n");
            }
            Layer::Boundary { mask } => {
                out.push_str("<g fill=\"none\" stroke=\"#888888\" stroke-width=\"1\">\n");
                for ring in mask.outer().iter().chain(mask.holes()) {
                    let mut d = String::new();
                    for (k, p) in ring.iter().enumerate() {
                        let (x, y) = vp.project(*p);
                        d.push_str(if k == 0 { "M" } else { " L" });
                        d.push_str(&format!("{x} {y}"));
                    }
                    d.push_str(" Z");
                    out.push_str(&format!("<path d=\"{d}\"/>\n"));
                }
                out.push_str("</g>\n");
            }
            Layer::Points { points, radius_px } => {
                out.push_str("<g stroke=\"none\">\n");
                for p in points {
                    let (x, y) = vp.project(p.point);
                    let fill = match p.label {
                        ClassLabel::North => NORTH_COLOR,
                        ClassLabel::South => SOUTH_COLOR,
                    };
                    out.push_str(&format!("<circle cx=\"{x}\" cy=\"{y}\" r=\"{radius_px}\" fill=\"{fill}\"/>\n"));
                }
                out.push_str("</g>\n");
            }
            Layer::Line { line, stroke, width_px, dashed } => {
                let mut d = String::new();
                for (k, p) in line.points().iter().enumerate() {
                    let (x, y) = vp.project(*p);
                    d.push_str(if k == 0 { "M" } else { " L" });
                    d.push_str(&format!("{x} {y}"));
                }
                let dash = if *dashed { " stroke-dasharray=\"6 4\"" } else { "" };
                out.push_str(&format!(
                    "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{width_px}\"{dash}/>\n",
                    esc(stroke)
                ));
            }
            Layer::Landmark { landmark } => {
                let (x, y) = vp.project(landmark.point);
                let r = 5.0;
                out.push_str(&format!(
                    "<path d=\"M{} {} L{} {} M{} {} L{} {}\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n",
                    x - r,
                    y - r,
                    x + r,
                    y + r,
                    x - r,
                    y + r,
                    x + r,
                    y - r
                ));
                out.push_str(&format!(
                    "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                    x + r + 2.0,
                    y + 4.0,
                    esc(&landmark.name)
                ));
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
