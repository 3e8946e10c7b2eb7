//! Accuracy accounting, geographic distance metrics, and line-vs-line /
//! line-vs-landmark comparison reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geodata::{ClassLabel, ReferenceLine, StoreDataset};
use crate::geom::{GeoPoint, Polyline};
use crate::svm::Hyperplane;

/// Mean Earth radius, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Kilometres per mile, exact.
pub const KM_PER_MILE: f64 = 1.609344;

/// A named point of interest the dividing line is compared against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub name: String,
    pub point: GeoPoint,
}

/// Great-circle distance in km.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let s = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * s.sqrt().min(1.0).asin()
}

/// Distance from a point to one segment: the segment is projected into a
/// local planar frame about `p` (equirectangular, valid at these scales),
/// the nearest parameter is clamped to the segment, and the distance is
/// reported via haversine to that nearest point. Both segment endpoints
/// are also candidates, so the result never exceeds the vertex distance.
fn point_to_segment_km(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    let k = p.lat.to_radians().cos();
    let ax = (a.lon - p.lon) * k;
    let ay = a.lat - p.lat;
    let bx = (b.lon - p.lon) * k;
    let by = b.lat - p.lat;
    let dx = bx - ax;
    let dy = by - ay;
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let nearest = GeoPoint {
        lon: a.lon * (1.0 - t) + b.lon * t,
        lat: a.lat * (1.0 - t) + b.lat * t,
    };
    haversine_km(p, nearest).min(haversine_km(p, a)).min(haversine_km(p, b))
}

/// Minimum distance from a point to a polyline, km.
pub fn point_to_polyline_km(p: GeoPoint, line: &Polyline) -> f64 {
    line.points()
        .windows(2)
        .map(|seg| point_to_segment_km(p, seg[0], seg[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Discrepancy statistics between two polylines, km.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyStats {
    /// Mean distance from samples along the first line to the second.
    pub mean_km: f64,
    /// Maximum of those sampled distances.
    pub max_km: f64,
    /// Symmetric (both-direction) maximum.
    pub hausdorff_km: f64,
}

/// Sample `n` points at uniform arc-length spacing along a polyline,
/// endpoints included.
fn sample_along(line: &Polyline, n: usize) -> Vec<GeoPoint> {
    let pts = line.points();
    let mut cumulative = Vec::with_capacity(pts.len());
    cumulative.push(0.0);
    for seg in pts.windows(2) {
        cumulative.push(cumulative.last().unwrap() + haversine_km(seg[0], seg[1]));
    }
    let total = *cumulative.last().unwrap();
    let mut out = Vec::with_capacity(n);
    let mut seg_idx = 0usize;
    for k in 0..n {
        let s = total * k as f64 / (n - 1) as f64;
        while seg_idx + 2 < cumulative.len() && cumulative[seg_idx + 1] < s {
            seg_idx += 1;
        }
        let seg_len = cumulative[seg_idx + 1] - cumulative[seg_idx];
        let t = if seg_len > 0.0 { ((s - cumulative[seg_idx]) / seg_len).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (pts[seg_idx], pts[seg_idx + 1]);
        out.push(GeoPoint {
            lon: a.lon * (1.0 - t) + b.lon * t,
            lat: a.lat * (1.0 - t) + b.lat * t,
        });
    }
    out
}

fn directed(from: &Polyline, to: &Polyline, n_samples: usize) -> (f64, f64) {
    let samples = sample_along(from, n_samples);
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for p in &samples {
        let d = point_to_polyline_km(*p, to);
        sum += d;
        max = max.max(d);
    }
    (sum / samples.len() as f64, max)
}

/// Compare two polylines by arc-length sampling: mean and max of the
/// directed distances from `a` to `b`, plus the symmetric Hausdorff
/// estimate over both directions. Identical polylines short-circuit to
/// exact zeros.
pub fn line_discrepancy(a: &Polyline, b: &Polyline, n_samples: usize) -> DiscrepancyStats {
    assert!(n_samples >= 2, "need at least 2 samples");
    if a == b {
        return DiscrepancyStats { mean_km: 0.0, max_km: 0.0, hausdorff_km: 0.0 };
    }
    let (mean_ab, max_ab) = directed(a, b, n_samples);
    let (_, max_ba) = directed(b, a, n_samples);
    DiscrepancyStats { mean_km: mean_ab, max_km: max_ab, hausdorff_km: max_ab.max(max_ba) }
}

/// Test accuracy of a hyperplane: predicted label is the sign of the
/// decision value, with zero counting as +1.
pub fn svm_accuracy(h: &Hyperplane, test: &StoreDataset) -> f64 {
    assert!(!test.is_empty(), "test set must be nonempty");
    let correct = test
        .points()
        .iter()
        .filter(|p| {
            let predicted = if h.decision(p.point) >= 0.0 { ClassLabel::North } else { ClassLabel::South };
            predicted == p.label
        })
        .count();
    correct as f64 / test.len() as f64
}

/// Full comparison report: per-line landmark distances, per-line
/// discrepancy against the reference line, and the model accuracies
/// passed through. Serializes to deterministic JSON (sorted keys).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// line name -> landmark name -> km
    pub landmark_distances: BTreeMap<String, BTreeMap<String, f64>>,
    /// line name -> discrepancy vs the reference line
    pub line_discrepancy: BTreeMap<String, DiscrepancyStats>,
    /// model name -> accuracy ratio
    pub accuracies: BTreeMap<String, f64>,
}

/// Assemble all pairwise metrics for a set of named lines.
pub fn build_report(
    lines: &[(String, Polyline)],
    landmarks: &[Landmark],
    reference: Option<&ReferenceLine>,
    accuracies: BTreeMap<String, f64>,
    n_samples: usize,
) -> ComparisonReport {
    let mut landmark_distances = BTreeMap::new();
    let mut discrepancies = BTreeMap::new();
    for (name, line) in lines {
        let per_landmark: BTreeMap<String, f64> = landmarks
            .iter()
            .map(|lm| (lm.name.clone(), point_to_polyline_km(lm.point, line)))
            .collect();
        landmark_distances.insert(name.clone(), per_landmark);
        if let Some(reference) = reference {
            discrepancies.insert(name.clone(), line_discrepancy(line, &reference.polyline, n_samples));
        }
    }
    ComparisonReport { landmark_distances, line_discrepancy: discrepancies, accuracies }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint::new(lon, lat).unwrap()
    }

    #[test]
    fn haversine_zero_for_identical() {
        let p = pt(-1.5, 52.5);
        assert_eq!(haversine_km(p, p), 0.0);
    }

    #[test]
    fn haversine_quarter_circumference() {
        // equator to pole: 2*pi*R/4 with R = 6371.0088
        let oracle = std::f64::consts::PI * EARTH_RADIUS_KM / 2.0;
        let d = haversine_km(pt(0.0, 0.0), pt(0.0, 90.0));
        assert!((oracle - 10_007.5571).abs() < 0.01);
        assert!((d - oracle).abs() < 0.01, "got {d}, oracle {oracle}");
    }

    #[test]
    fn haversine_symmetric() {
        use rand::Rng;
        let mut rng = crate::rng::stream(1, 55, 0);
        for _ in 0..100 {
            let a = pt(rng.random_range(-180.0..180.0), rng.random_range(-89.0..89.0));
            let b = pt(rng.random_range(-180.0..180.0), rng.random_range(-89.0..89.0));
            assert_eq!(haversine_km(a, b), haversine_km(b, a));
        }
    }

    #[test]
    fn point_on_vertex_is_zero() {
        let line = Polyline::new(vec![pt(-2.0, 52.0), pt(0.0, 52.5), pt(2.0, 52.0)]).unwrap();
        assert_eq!(point_to_polyline_km(pt(0.0, 52.5), &line), 0.0);
    }

    #[test]
    fn one_degree_north_of_long_segment() {
        // meridian arc oracle: 1 degree of latitude = pi*R/180 km
        let line = Polyline::new(vec![pt(-5.0, 52.0), pt(5.0, 52.0)]).unwrap();
        let d = point_to_polyline_km(pt(0.0, 53.0), &line);
        let oracle = std::f64::consts::PI * EARTH_RADIUS_KM / 180.0;
        assert!((d - oracle).abs() < 0.5, "got {d}, oracle {oracle}");
    }

    #[test]
    fn never_exceeds_vertex_distance() {
        use rand::Rng;
        let mut rng = crate::rng::stream(2, 55, 0);
        for _ in 0..200 {
            let line = Polyline::new(vec![
                pt(rng.random_range(-3.0..0.0), rng.random_range(50.0..55.0)),
                pt(rng.random_range(0.0..3.0), rng.random_range(50.0..55.0)),
            ])
            .unwrap();
            let p = pt(rng.random_range(-3.0..3.0), rng.random_range(50.0..55.0));
            let d = point_to_polyline_km(p, &line);
            let vmin = line.points().iter().map(|v| haversine_km(p, *v)).fold(f64::INFINITY, f64::min);
            assert!(d <= vmin + 1e-12);
        }
    }

    #[test]
    fn identical_lines_have_zero_discrepancy() {
        let line = Polyline::new(vec![pt(-2.0, 52.0), pt(0.0, 52.5), pt(2.0, 52.0)]).unwrap();
        let d = line_discrepancy(&line, &line.clone(), 64);
        assert_eq!((d.mean_km, d.max_km, d.hausdorff_km), (0.0, 0.0, 0.0));
    }

    #[test]
    fn parallel_lines_half_degree_apart() {
        let a = Polyline::new(vec![pt(-3.0, 52.0), pt(3.0, 52.0)]).unwrap();
        let b = Polyline::new(vec![pt(-3.0, 52.5), pt(3.0, 52.5)]).unwrap();
        let d = line_discrepancy(&a, &b, 50);
        let oracle = 0.5 * std::f64::consts::PI * EARTH_RADIUS_KM / 180.0;
        assert!((d.mean_km - oracle).abs() < 0.5, "mean {}", d.mean_km);
        assert!((d.max_km - oracle).abs() < 0.5, "max {}", d.max_km);
    }

    #[test]
    fn hausdorff_is_symmetric() {
        let a = Polyline::new(vec![pt(-3.0, 52.0), pt(3.0, 52.2)]).unwrap();
        let b = Polyline::new(vec![pt(-2.0, 52.6), pt(2.5, 51.8), pt(3.0, 52.9)]).unwrap();
        let ab = line_discrepancy(&a, &b, 100);
        let ba = line_discrepancy(&b, &a, 100);
        assert_eq!(ab.hausdorff_km, ba.hausdorff_km);
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        use rand::Rng;
        let mut rng = crate::rng::stream(3, 55, 0);
        for _ in 0..500 {
            let a = pt(rng.random_range(-180.0..180.0), rng.random_range(-89.0..89.0));
            let b = pt(rng.random_range(-180.0..180.0), rng.random_range(-89.0..89.0));
            let c = pt(rng.random_range(-180.0..180.0), rng.random_range(-89.0..89.0));
            let (ab, bc, ac) = (haversine_km(a, b), haversine_km(b, c), haversine_km(a, c));
            assert!(ac <= ab + bc + 1e-9 * ac.max(1.0));
        }
    }

    #[test]
    fn report_landmark_on_line_is_zero_and_roundtrips() {
        let line = Polyline::new(vec![pt(-2.0, 52.3), pt(0.0, 52.3)]).unwrap();
        let landmarks = vec![Landmark { name: "Watford Gap".into(), point: pt(-1.1105, 52.3) }];
        let mut accuracies = BTreeMap::new();
        accuracies.insert("svm".to_string(), 0.78);
        let report = build_report(&[("svm".into(), line)], &landmarks, None, accuracies, 50);
        let d = report.landmark_distances["svm"]["Watford Gap"];
        assert!(d < 1e-9, "landmark on the line should be at distance 0, got {d}");

        let json = serde_json::to_string(&report).unwrap();
        let back: ComparisonReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }
}
