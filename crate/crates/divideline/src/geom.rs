//! Core geographic primitives shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A WGS84 coordinate, longitude first.
///
/// (lon, lat) is the internal order everywhere in this crate; CSV inputs
/// use (lat, lon) columns and are swapped at ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    /// Degrees east.
    pub lon: f64,
    /// Degrees north.
    pub lat: f64,
}

impl GeoPoint {
    /// Validating constructor: coordinates must be finite and in range.
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        if !lon.is_finite() || !lat.is_finite() || !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::CoordinateOutOfRange { lon, lat });
        }
        Ok(Self { lon, lat })
    }

    /// Identity key for exact-equality dedup.
    pub(crate) fn bits(&self) -> (u64, u64) {
        (self.lon.to_bits(), self.lat.to_bits())
    }
}

/// Geographic bounding box (lon_min, lon_max, lat_min, lat_max).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

/// Default bounding box covering England including Scilly.
pub const ENGLAND_BBOX: BoundingBox = BoundingBox {
    lon_min: -6.4,
    lon_max: 1.8,
    lat_min: 49.9,
    lat_max: 55.9,
};

impl BoundingBox {
    pub fn new(lon_min: f64, lon_max: f64, lat_min: f64, lat_max: f64) -> Result<Self> {
        let b = Self { lon_min, lon_max, lat_min, lat_max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.lon_min, self.lon_max, self.lat_min, self.lat_max];
        if vals.iter().any(|v| !v.is_finite()) || self.lon_min >= self.lon_max || self.lat_min >= self.lat_max {
            return Err(Error::DegenerateBbox { msg: format!("{self:?}") });
        }
        Ok(())
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lon >= self.lon_min && p.lon <= self.lon_max && p.lat >= self.lat_min && p.lat <= self.lat_max
    }

    pub fn lon_span(&self) -> f64 {
        self.lon_max - self.lon_min
    }

    pub fn lat_span(&self) -> f64 {
        self.lat_max - self.lat_min
    }
}

/// An ordered coordinate sequence with at least two points and no repeated
/// consecutive point. Output contours, dividing lines, and reference lines
/// all use this.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    points: Vec<GeoPoint>,
}

impl Polyline {
    pub fn new(points: Vec<GeoPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Geojson { msg: format!("polyline needs at least 2 points, got {}", points.len()) });
        }
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Geojson { msg: "polyline has repeated consecutive points".into() });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
