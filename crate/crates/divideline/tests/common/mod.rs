//! Oracles and fixtures shared by the integration test suites. Everything
//! here is independent of the implementation paths it checks.
//!
//! Each test binary compiles its own copy and uses a different subset.
#![allow(dead_code)]

use divideline::geodata::{ClassLabel, LabeledPoint};
use divideline::geom::GeoPoint;
use rand::Rng;

/// An independent maximum-margin separator found by exhaustive search
/// over (angle, offset) in the same standardized plane the solver uses.
#[derive(Clone, Copy, Debug)]
pub struct OracleSeparator {
    pub w: [f64; 2],
    pub b: f64,
    pub margin: f64,
}

impl OracleSeparator {
    pub fn decision(&self, x: [f64; 2]) -> f64 {
        self.w[0] * x[0] + self.w[1] * x[1] + self.b
    }
}

/// Margin of the best offset for a fixed direction: project both classes
/// onto w; the optimal threshold sits midway between the class extremes.
fn margin_at(points: &[([f64; 2], f64)], w: [f64; 2]) -> (f64, f64) {
    let mut min_pos = f64::INFINITY;
    let mut max_neg = f64::NEG_INFINITY;
    for (x, y) in points {
        let p = w[0] * x[0] + w[1] * x[1];
        if *y > 0.0 {
            min_pos = min_pos.min(p);
        } else {
            max_neg = max_neg.max(p);
        }
    }
    let b = -0.5 * (min_pos + max_neg);
    let margin = 0.5 * (min_pos - max_neg);
    (margin, b)
}

/// Exhaustive angle sweep at `coarse` resolution over the full circle,
/// then a fine refinement pass around the best coarse angle. Returns the
/// margin-maximizing separator (margin may be negative for non-separable
/// input).
pub fn max_margin_oracle(points: &[([f64; 2], f64)], coarse: f64) -> OracleSeparator {
    let sweep = |lo: f64, hi: f64, step: f64| -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0); // (margin, theta, b)
        let mut theta = lo;
        while theta < hi {
            let w = [theta.cos(), theta.sin()];
            let (margin, b) = margin_at(points, w);
            if margin > best.0 {
                best = (margin, theta, b);
            }
            theta += step;
        }
        best
    };
    let (_, theta0, _) = sweep(0.0, std::f64::consts::TAU, coarse);
    let (margin, theta, b) = sweep(theta0 - 2.0 * coarse, theta0 + 2.0 * coarse, coarse * 1e-3);
    OracleSeparator { w: [theta.cos(), theta.sin()], b, margin }
}

/// Random strictly separable labeled set in a standardized-scale plane:
/// classes displaced along a random direction with a guaranteed gap.
pub fn random_separable(rng: &mut impl Rng, per_class: usize) -> Vec<([f64; 2], f64)> {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let u = [theta.cos(), theta.sin()];
    let gap: f64 = rng.random_range(0.4..1.2);
    let mut points = Vec::with_capacity(2 * per_class);
    for class in [1.0f64, -1.0] {
        for _ in 0..per_class {
            let along = gap / 2.0 + rng.random_range(0.0..1.5);
            let across = rng.random_range(-2.0..2.0);
            let x = [
                class * along * u[0] - across * u[1],
                class * along * u[1] + across * u[0],
            ];
            points.push((x, class));
        }
    }
    points
}

/// Labeled points for the library API from oracle-plane coordinates.
pub fn to_labeled(points: &[([f64; 2], f64)]) -> Vec<LabeledPoint> {
    points
        .iter()
        .map(|(x, y)| LabeledPoint {
            point: GeoPoint { lon: x[0], lat: x[1] },
            label: if *y > 0.0 { ClassLabel::North } else { ClassLabel::South },
        })
        .collect()
}

/// Signed winding number of a ring around `p`, via summed turn angles.
/// Independent of the even-odd ray-casting implementation.
fn winding_number(p: GeoPoint, ring: &[GeoPoint]) -> i32 {
    let mut total = 0.0f64;
    for seg in ring.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let v1 = (a.lon - p.lon, a.lat - p.lat);
        let v2 = (b.lon - p.lon, b.lat - p.lat);
        let cross = v1.0 * v2.1 - v1.1 * v2.0;
        let dot = v1.0 * v2.0 + v1.1 * v2.1;
        total += cross.atan2(dot);
    }
    (total / std::f64::consts::TAU).round() as i32
}

/// Even-odd membership oracle built on winding numbers: a point is inside
/// when the sum of |winding| over all rings is odd.
pub fn winding_oracle(p: GeoPoint, rings: &[Vec<GeoPoint>]) -> bool {
    let crossings: i32 = rings.iter().map(|r| winding_number(p, r).abs()).sum();
    crossings % 2 == 1
}

/// Latitude of a polyline at a given longitude: linear interpolation on
/// every segment straddling `lon`. Panics if the line never crosses it.
pub fn latitudes_at_lon(line: &divideline::geom::Polyline, lon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for seg in line.points().windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if (a.lon - lon) * (b.lon - lon) <= 0.0 && a.lon != b.lon {
            let t = (lon - a.lon) / (b.lon - a.lon);
            out.push(a.lat * (1.0 - t) + b.lat * t);
        }
    }
    assert!(!out.is_empty(), "polyline never crosses lon {lon}");
    out
}

/// Well-formedness check: run the document through a streaming XML parser.
pub fn assert_well_formed_xml(text: &str) {
    let mut reader = quick_xml::Reader::from_str(text);
    let mut depth = 0i64;
    loop {
        match reader.read_event() {
            Ok(quick_xml::events::Event::Start(_)) => depth += 1,
            Ok(quick_xml::events::Event::End(_)) => {
                depth -= 1;
                assert!(depth >= 0, "unbalanced closing tag");
            }
            Ok(quick_xml::events::Event::Eof) => break,
            Ok(_) => {}
            Err(e) => panic!("XML parse error at byte {}: {e}", reader.buffer_position()),
        }
    }
    assert_eq!(depth, 0, "unbalanced XML document");
}
