//! Minimal RFC 7946 GeoJSON reading and writing: Polygon/MultiPolygon
//! boundaries in, LineString reference lines in, LineString feature
//! collections out. Positions are [lon, lat].

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geom::{GeoPoint, Polyline};

use super::{LandmassMask, ReferenceLine};

fn read_json(path: &Path) -> Result<Value> {
    if !path.exists() {
        return Err(Error::MissingFile { path: path.to_path_buf() });
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| Error::Geojson { msg: e.to_string() })
}

fn as_position(v: &Value) -> Result<GeoPoint> {
    let arr = v.as_array().ok_or_else(|| Error::Geojson { msg: "position is not an array".into() })?;
    if arr.len() < 2 {
        return Err(Error::Geojson { msg: "position needs [lon, lat]".into() });
    }
    let lon = arr[0].as_f64().ok_or_else(|| Error::Geojson { msg: "non-numeric longitude".into() })?;
    let lat = arr[1].as_f64().ok_or_else(|| Error::Geojson { msg: "non-numeric latitude".into() })?;
    GeoPoint::new(lon, lat)
}

fn ring_from_value(v: &Value) -> Result<Vec<GeoPoint>> {
    let arr = v.as_array().ok_or_else(|| Error::Geojson { msg: "ring is not an array".into() })?;
    let mut ring = arr.iter().map(as_position).collect::<Result<Vec<_>>>()?;
    // enforce closure: append the first vertex if absent
    if ring.first() != ring.last() {
        if let Some(&first) = ring.first() {
            ring.push(first);
        }
    }
    if ring.len() < 4 {
        return Err(Error::DegenerateRing { vertices: ring.len() });
    }
    Ok(ring)
}

/// Walk a GeoJSON value (Geometry, Feature, or FeatureCollection) and
/// collect every polygonal geometry found.
fn collect_geometries<'a>(v: &'a Value, out: &mut Vec<&'a Value>) {
    match v.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {
            if let Some(features) = v.get("features").and_then(Value::as_array) {
                for f in features {
                    collect_geometries(f, out);
                }
            }
        }
        Some("Feature") => {
            if let Some(geom) = v.get("geometry") {
                collect_geometries(geom, out);
            }
        }
        Some(_) => out.push(v),
        None => {}
    }
}

/// Load a landmass mask from Polygon or MultiPolygon geometry. Outer rings
/// and holes are captured separately; ring closure is enforced.
pub fn load_boundary(path: &Path) -> Result<LandmassMask> {
    let value = read_json(path)?;
    let mut geoms = Vec::new();
    collect_geometries(&value, &mut geoms);

    let mut outer = Vec::new();
    let mut holes = Vec::new();
    let mut saw_polygon = false;
    for geom in geoms {
        let coords = geom.get("coordinates");
        match geom.get("type").and_then(Value::as_str) {
            Some("Polygon") => {
                saw_polygon = true;
                let rings = coords
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Geojson { msg: "Polygon without coordinates".into() })?;
                for (k, ring) in rings.iter().enumerate() {
                    let ring = ring_from_value(ring)?;
                    if k == 0 {
                        outer.push(ring);
                    } else {
                        holes.push(ring);
                    }
                }
            }
            Some("MultiPolygon") => {
                saw_polygon = true;
                let polys = coords
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Geojson { msg: "MultiPolygon without coordinates".into() })?;
                for poly in polys {
                    let rings = poly
                        .as_array()
                        .ok_or_else(|| Error::Geojson { msg: "polygon is not an array".into() })?;
                    for (k, ring) in rings.iter().enumerate() {
                        let ring = ring_from_value(ring)?;
                        if k == 0 {
                            outer.push(ring);
                        } else {
                            holes.push(ring);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    if !saw_polygon || outer.is_empty() {
        return Err(Error::NotAPolygon);
    }
    LandmassMask::new(outer, holes)
}

/// Load a reference line from a GeoJSON LineString. The name comes from a
/// `name` property when present, otherwise the file stem.
pub fn load_reference_line(path: &Path) -> Result<ReferenceLine> {
    let value = read_json(path)?;
    let mut name: Option<String> = None;

    fn find_linestring<'a>(v: &'a Value, name: &mut Option<String>) -> Option<&'a Value> {
        match v.get("type").and_then(Value::as_str) {
            Some("FeatureCollection") => v
                .get("features")
                .and_then(Value::as_array)
                .and_then(|fs| fs.iter().find_map(|f| find_linestring(f, name))),
            Some("Feature") => {
                if let Some(n) = v.pointer("/properties/name").and_then(Value::as_str) {
                    name.get_or_insert_with(|| n.to_string());
                }
                v.get("geometry").and_then(|g| find_linestring(g, name))
            }
            Some("LineString") => v.get("coordinates"),
            _ => None,
        }
    }

    let coords = find_linestring(&value, &mut name)
        .ok_or_else(|| Error::Geojson { msg: "no LineString geometry found".into() })?;
    let arr = coords.as_array().ok_or_else(|| Error::Geojson { msg: "coordinates is not an array".into() })?;
    let mut points = Vec::with_capacity(arr.len());
    for pos in arr {
        let p = as_position(pos)?;
        // silently drop repeated consecutive vertices from external files
        if points.last() != Some(&p) {
            points.push(p);
        }
    }
    let polyline = Polyline::new(points)?;
    let fallback = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_else(|| "reference".into());
    Ok(ReferenceLine { name: name.unwrap_or(fallback), polyline })
}

/// Load every LineString in a file as `(name, polyline, rank)`. Names
/// come from the `name` property (file stem plus index otherwise); `rank`
/// is the optional `rank` property written by the contour emitters.
pub fn load_lines(path: &Path) -> Result<Vec<(String, Polyline, Option<usize>)>> {
    let value = read_json(path)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_else(|| "line".into());
    let mut out = Vec::new();

    fn walk(
        v: &Value,
        props: Option<&Value>,
        stem: &str,
        out: &mut Vec<(String, Polyline, Option<usize>)>,
    ) -> Result<()> {
        match v.get("type").and_then(Value::as_str) {
            Some("FeatureCollection") => {
                if let Some(features) = v.get("features").and_then(Value::as_array) {
                    for f in features {
                        walk(f, None, stem, out)?;
                    }
                }
            }
            Some("Feature") => {
                if let Some(geom) = v.get("geometry") {
                    walk(geom, v.get("properties"), stem, out)?;
                }
            }
            Some("LineString") => {
                let coords = v
                    .get("coordinates")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Geojson { msg: "LineString without coordinates".into() })?;
                let mut points = Vec::with_capacity(coords.len());
                for pos in coords {
                    let p = as_position(pos)?;
                    if points.last() != Some(&p) {
                        points.push(p);
                    }
                }
                let name = props
                    .and_then(|p| p.get("name"))
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("{stem}-{}", out.len()));
                let rank = props
                    .and_then(|p| p.get("rank"))
                    .and_then(Value::as_u64)
                    .map(|r| r as usize);
                out.push((name, Polyline::new(points)?, rank));
            }
            _ => {}
        }
        Ok(())
    }

    walk(&value, None, &stem, &mut out)?;
    Ok(out)
}

/// A polyline to serialize, with its contour level (when it came from a
/// level set) and its rank (0 = principal).
pub struct PolylineFeature<'a> {
    pub line: &'a Polyline,
    pub name: String,
    pub level: Option<f64>,
    pub rank: usize,
}

/// Serialize polylines as a FeatureCollection of LineStrings with `name`,
/// `level`, and `rank` properties. Key order is alphabetical, so the byte
/// output is deterministic.
pub fn polylines_to_geojson(features: &[PolylineFeature<'_>]) -> String {
    let feats: Vec<Value> = features
        .iter()
        .map(|f| {
            let coords: Vec<Value> = f.line.points().iter().map(|p| json!([p.lon, p.lat])).collect();
            let mut props = Map::new();
            props.insert("name".into(), json!(f.name));
            props.insert("rank".into(), json!(f.rank));
            if let Some(level) = f.level {
                props.insert("level".into(), json!(level));
            }
            json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": coords },
                "properties": Value::Object(props),
            })
        })
        .collect();
    let fc = json!({ "type": "FeatureCollection", "features": feats });
    let mut text = serde_json::to_string_pretty(&fc).expect("geojson serialization cannot fail");
    text.push('\n');
    text
}

pub fn write_polylines_geojson(features: &[PolylineFeature<'_>], path: &Path) -> Result<()> {
    std::fs::write(path, polylines_to_geojson(features)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn unit_square_polygon_closes() {
        // last vertex omitted on purpose: closure appends it
        let f = write_tmp(
            r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}"#,
        );
        let mask = load_boundary(f.path()).unwrap();
        assert_eq!(mask.outer().len(), 1);
        assert_eq!(mask.outer()[0].len(), 5);
        assert_eq!(mask.outer()[0][0], mask.outer()[0][4]);
    }

    #[test]
    fn point_geometry_rejected() {
        let f = write_tmp(r#"{"type":"Point","coordinates":[0,0]}"#);
        assert!(matches!(load_boundary(f.path()), Err(Error::NotAPolygon)));
    }

    #[test]
    fn multipolygon_two_squares() {
        let f = write_tmp(
            r#"{"type":"MultiPolygon","coordinates":[
                [[[0,0],[1,0],[1,1],[0,1],[0,0]]],
                [[[2,2],[3,2],[3,3],[2,3],[2,2]]]
            ]}"#,
        );
        let mask = load_boundary(f.path()).unwrap();
        assert_eq!(mask.outer().len(), 2);
        assert!(mask.holes().is_empty());
    }

    #[test]
    fn degenerate_ring_rejected() {
        let f = write_tmp(r#"{"type":"Polygon","coordinates":[[[0,0],[1,0]]]}"#);
        assert!(matches!(load_boundary(f.path()), Err(Error::DegenerateRing { vertices: 3 })));
    }

    #[test]
    fn feature_collection_boundary() {
        let f = write_tmp(
            r#"{"type":"FeatureCollection","features":[
                {"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}
            ]}"#,
        );
        assert_eq!(load_boundary(f.path()).unwrap().outer().len(), 1);
    }

    #[test]
    fn reference_line_roundtrip() {
        let line = Polyline::new(vec![
            GeoPoint::new(-2.0, 53.0).unwrap(),
            GeoPoint::new(0.0, 52.5).unwrap(),
            GeoPoint::new(1.0, 52.0).unwrap(),
        ])
        .unwrap();
        let text = polylines_to_geojson(&[PolylineFeature { line: &line, name: "divide".into(), level: Some(0.5), rank: 0 }]);
        let f = write_tmp(&text);
        let back = load_reference_line(f.path()).unwrap();
        assert_eq!(back.name, "divide");
        assert_eq!(back.polyline, line);
    }

    #[test]
    fn geojson_output_is_deterministic() {
        let line = Polyline::new(vec![GeoPoint::new(0.0, 0.0).unwrap(), GeoPoint::new(1.0, 1.0).unwrap()]).unwrap();
        let a = polylines_to_geojson(&[PolylineFeature { line: &line, name: "x".into(), level: None, rank: 0 }]);
        let b = polylines_to_geojson(&[PolylineFeature { line: &line, name: "x".into(), level: None, rank: 0 }]);
        assert_eq!(a, b);
    }
}
