//! Level-set contour extraction by marching squares with linear edge
//! interpolation, plus selection of the principal (longest) contour.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evaluate::haversine_km;
use crate::field::ScalarField;
use crate::geom::{GeoPoint, Polyline};

/// Level-set specification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub level: f64,
}

impl ContourSpec {
    pub fn new(level: f64) -> Result<Self> {
        if !level.is_finite() {
            return Err(Error::Config { msg: "contour level must be finite".into() });
        }
        Ok(Self { level })
    }
}

/// A grid edge carrying a level crossing. H is the edge from node (i, j)
/// to (i+1, j); V from (i, j) to (i, j+1). Chaining matches on edge
/// identity, not floating-point coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    H { i: usize, j: usize },
    V { i: usize, j: usize },
}

/// Interpolated crossing position on an edge.
fn edge_point(field: &ScalarField, key: EdgeKey, level: f64) -> GeoPoint {
    let g = &field.grid;
    let ((i0, j0), (i1, j1)) = match key {
        EdgeKey::H { i, j } => ((i, j), (i + 1, j)),
        EdgeKey::V { i, j } => ((i, j), (i, j + 1)),
    };
    let (v0, v1) = (field.value_at(i0, j0), field.value_at(i1, j1));
    let t = ((level - v0) / (v1 - v0)).clamp(0.0, 1.0);
    let (a, b) = (g.node(i0, j0), g.node(i1, j1));
    GeoPoint { lon: a.lon * (1.0 - t) + b.lon * t, lat: a.lat * (1.0 - t) + b.lat * t }
}

/// Marching squares over every cell whose four nodes are present (cells
/// touching NaN nodes are skipped). Segments are chained into maximal
/// polylines; saddle cells are disambiguated by the cell-center mean.
pub fn extract_contours(field: &ScalarField, spec: &ContourSpec) -> Result<Vec<Polyline>> {
    let g = &field.grid;
    let level = spec.level;
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();

    for j in 0..g.n_lat - 1 {
        for i in 0..g.n_lon - 1 {
            let v00 = field.value_at(i, j);
            let v10 = field.value_at(i + 1, j);
            let v01 = field.value_at(i, j + 1);
            let v11 = field.value_at(i + 1, j + 1);
            if !(v00.is_finite() && v10.is_finite() && v01.is_finite() && v11.is_finite()) {
                continue;
            }
            let mut case = 0u8;
            if v00 > level {
                case |= 1; // bottom-left
            }
            if v10 > level {
                case |= 2; // bottom-right
            }
            if v11 > level {
                case |= 4; // top-right
            }
            if v01 > level {
                case |= 8; // top-left
            }
            let bottom = EdgeKey::H { i, j };
            let top = EdgeKey::H { i, j: j + 1 };
            let left = EdgeKey::V { i, j };
            let right = EdgeKey::V { i: i + 1, j };
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    // bottom-left and top-right above: connectivity follows
                    // the cell-center mean
                    let center = 0.25 * (v00 + v10 + v01 + v11);
                    if center > level {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                10 => {
                    let center = 0.25 * (v00 + v10 + v01 + v11);
                    if center > level {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    if segments.is_empty() {
        return Err(Error::NoCrossing);
    }

    // adjacency on edge identity; every key has degree 1 or 2
    let mut adjacency: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (sid, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(sid);
        adjacency.entry(*b).or_default().push(sid);
    }

    let mut used = vec![false; segments.len()];
    let mut chains: Vec<Vec<EdgeKey>> = Vec::new();
    // open paths first (degree-1 starts), then remaining cycles, both in
    // deterministic key order
    let starts: Vec<EdgeKey> = adjacency
        .iter()
        .filter(|(_, sids)| sids.len() == 1)
        .map(|(k, _)| *k)
        .chain(adjacency.keys().copied())
        .collect();
    for start in starts {
        let Some(&first_sid) = adjacency[&start].iter().find(|&&sid| !used[sid]) else {
            continue;
        };
        let mut chain = vec![start];
        let mut current = start;
        let mut sid = first_sid;
        loop {
            used[sid] = true;
            let (a, b) = segments[sid];
            let next = if a == current { b } else { a };
            chain.push(next);
            current = next;
            match adjacency[&current].iter().find(|&&s| !used[s]) {
                Some(&s) => sid = s,
                None => break,
            }
        }
        chains.push(chain);
    }

    let mut contours = Vec::new();
    for chain in chains {
        let mut points: Vec<GeoPoint> = Vec::with_capacity(chain.len());
        for key in chain {
            let p = edge_point(field, key, level);
            // crossings at a shared node can repeat exactly; drop them
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        if points.len() >= 2 {
            contours.push(Polyline::new(points).expect("chained contour is valid"));
        }
    }
    if contours.is_empty() {
        return Err(Error::NoCrossing);
    }
    Ok(contours)
}

/// Arc length of a polyline in km.
pub fn arc_length_km(line: &Polyline) -> f64 {
    line.points().windows(2).map(|w| haversine_km(w[0], w[1])).sum()
}

/// The contour with the greatest arc length; exact ties go to the line
/// whose first vertex is westernmost, then to the earliest in the list.
pub fn principal_contour(contours: &[Polyline]) -> Option<&Polyline> {
    contours.iter().reduce(|best, candidate| {
        let (lb, lc) = (arc_length_km(best), arc_length_km(candidate));
        if lc > lb || (lc == lb && candidate.points()[0].lon < best.points()[0].lon) {
            candidate
        } else {
            best
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::{make_grid, Grid};
    use crate::geom::BoundingBox;

    fn grid(n: usize, span: f64) -> Grid {
        make_grid(BoundingBox::new(0.0, span, 0.0, span).unwrap(), n, n, None).unwrap()
    }

    fn field_from(grid: Grid, f: impl Fn(GeoPoint) -> f64) -> ScalarField {
        let values: Vec<f64> = (0..grid.n_lat)
            .flat_map(|j| (0..grid.n_lon).map(move |i| (i, j)))
            .map(|(i, j)| f(grid.node(i, j)))
            .collect();
        ScalarField::new(grid, values).unwrap()
    }

    #[test]
    fn two_by_two_step_yields_midlatitude_segment() {
        // values 0 on the bottom row, 1 on the top row, level 0.5
        let field = field_from(grid(2, 1.0), |p| p.lat);
        let contours = extract_contours(&field, &ContourSpec::new(0.5).unwrap()).unwrap();
        assert_eq!(contours.len(), 1);
        let pts = contours[0].points();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| (p.lat - 0.5).abs() < 1e-12));
        let mut lons: Vec<f64> = pts.iter().map(|p| p.lon).collect();
        lons.sort_by(f64::total_cmp);
        assert_eq!(lons, vec![0.0, 1.0]);
    }

    #[test]
    fn constant_field_has_no_crossing() {
        let field = field_from(grid(4, 1.0), |_| 0.3);
        assert!(matches!(
            extract_contours(&field, &ContourSpec::new(0.5).unwrap()),
            Err(Error::NoCrossing)
        ));
    }

    #[test]
    fn radial_field_recovers_circle() {
        // analytic oracle: the r0 level set of v = |p - c| is a circle;
        // every vertex must sit within half a cell diagonal of it and
        // re-interpolating the field at each vertex must give the level
        let n = 64;
        let g = grid(n, 2.0);
        let c = GeoPoint { lon: 1.0, lat: 1.0 };
        let field = field_from(g.clone(), |p| ((p.lon - c.lon).powi(2) + (p.lat - c.lat).powi(2)).sqrt());
        let r0 = 0.6;
        let contours = extract_contours(&field, &ContourSpec::new(r0).unwrap()).unwrap();
        let half_diag = 0.5 * (g.lon_spacing().powi(2) + g.lat_spacing().powi(2)).sqrt();
        let mut checked = 0;
        for contour in &contours {
            for p in contour.points() {
                let r = ((p.lon - c.lon).powi(2) + (p.lat - c.lat).powi(2)).sqrt();
                assert!((r - r0).abs() <= half_diag, "vertex radius {r} vs {r0}");
                checked += 1;
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn contour_vertices_interpolate_to_the_level() {
        let n = 32;
        let g = grid(n, 2.0);
        let field = field_from(g, |p| (3.0 * p.lon).sin() + (2.0 * p.lat).cos());
        let level = 0.25;
        let contours = extract_contours(&field, &ContourSpec::new(level).unwrap()).unwrap();
        // every vertex lies on a grid edge; linear interpolation of the
        // two edge values at the vertex position must reproduce the level
        let g = &field.grid;
        for contour in &contours {
            for p in contour.points() {
                let fi = (p.lon - g.bbox.lon_min) / g.lon_spacing();
                let fj = (p.lat - g.bbox.lat_min) / g.lat_spacing();
                let on_lon_node = (fi - fi.round()).abs() < 1e-6;
                let (i0, j0, i1, j1) = if on_lon_node {
                    let i = fi.round() as usize;
                    (i, fj.floor() as usize, i, (fj.floor() as usize + 1).min(g.n_lat - 1))
                } else {
                    let j = fj.round() as usize;
                    (fi.floor() as usize, j, (fi.floor() as usize + 1).min(g.n_lon - 1), j)
                };
                let (a, b) = (g.node(i0, j0), g.node(i1, j1));
                let (v0, v1) = (field.value_at(i0, j0), field.value_at(i1, j1));
                let t = if on_lon_node {
                    (p.lat - a.lat) / (b.lat - a.lat).max(1e-300)
                } else {
                    (p.lon - a.lon) / (b.lon - a.lon).max(1e-300)
                };
                let interpolated = v0 * (1.0 - t) + v1 * t;
                assert!(
                    (interpolated - level).abs() < 1e-9,
                    "vertex {p:?}: interpolated {interpolated} vs level {level}"
                );
            }
        }
    }

    #[test]
    fn nan_cells_are_skipped() {
        // mask out the center node: the 4 cells touching it are skipped
        let bbox = BoundingBox::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let n = 3usize;
        let mut mask = vec![true; n * n];
        mask[4] = false; // center of a 3x3 grid
        let g = Grid::with_mask(bbox, n, n, mask).unwrap();
        let values: Vec<f64> = (0..n * n)
            .map(|idx| {
                if idx == 4 {
                    f64::NAN
                } else {
                    let j = idx / n;
                    j as f64 // increases with latitude
                }
            })
            .collect();
        let field = ScalarField::new(g, values).unwrap();
        // a 0.5 level would cross cells in the bottom row, but all four
        // cells touch the masked center node, so nothing is produced
        assert!(matches!(
            extract_contours(&field, &ContourSpec::new(0.5).unwrap()),
            Err(Error::NoCrossing)
        ));
    }

    #[test]
    fn monotone_fields_give_single_valued_contours() {
        // on any field strictly increasing in latitude the level set is a
        // function of longitude: vertices grouped by longitude must agree
        use rand::Rng;
        let mut rng = crate::rng::stream(6, 70, 0);
        for trial in 0..20 {
            let n = 12;
            let g = grid(n, 1.0);
            // random strictly-increasing-in-latitude field
            let base: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
            let gain: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let field = field_from(g.clone(), |p| {
                let col = ((p.lon / 1.0) * (n - 1) as f64).round() as usize;
                base[col] + gain[col] * p.lat
            });
            let level = rng.random_range(0.2..0.8);
            let contours = match extract_contours(&field, &ContourSpec::new(level).unwrap()) {
                Ok(c) => c,
                Err(Error::NoCrossing) => continue,
                Err(e) => panic!("unexpected {e}"),
            };
            let mut by_lon: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
            for contour in &contours {
                for p in contour.points() {
                    let entry = by_lon.entry(p.lon.to_bits()).or_insert((p.lat, p.lat));
                    entry.0 = entry.0.min(p.lat);
                    entry.1 = entry.1.max(p.lat);
                }
            }
            let cell = g.lat_spacing();
            for (lon_bits, (lo, hi)) in by_lon {
                assert!(
                    hi - lo < cell,
                    "trial {trial}: two heights {lo}..{hi} at lon {}",
                    f64::from_bits(lon_bits)
                );
            }
        }
    }

    #[test]
    fn principal_contour_prefers_longest_then_westernmost() {
        let long = Polyline::new(vec![
            GeoPoint { lon: -3.0, lat: 52.0 },
            GeoPoint { lon: 2.0, lat: 52.5 },
        ])
        .unwrap();
        let tiny = Polyline::new(vec![
            GeoPoint { lon: 0.0, lat: 50.0 },
            GeoPoint { lon: 0.01, lat: 50.01 },
            GeoPoint { lon: 0.0, lat: 50.0 },
        ])
        .unwrap();
        assert_eq!(principal_contour(&[tiny.clone(), long.clone()]), Some(&long));
        assert_eq!(principal_contour(&[long.clone()]), Some(&long));
        assert_eq!(principal_contour(&[]), None);

        // exact tie: same geometry shifted east vs west
        let west = Polyline::new(vec![GeoPoint { lon: -1.0, lat: 52.0 }, GeoPoint { lon: 0.0, lat: 52.0 }]).unwrap();
        let east = Polyline::new(vec![GeoPoint { lon: 1.0, lat: 52.0 }, GeoPoint { lon: 2.0, lat: 52.0 }]).unwrap();
        // equal-latitude east-west segments of the same longitude span
        // have identical haversine length
        assert_eq!(arc_length_km(&west), arc_length_km(&east));
        assert_eq!(principal_contour(&[east.clone(), west.clone()]), Some(&west));
    }
}
